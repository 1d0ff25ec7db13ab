#include "trn/driver.hpp"

#include <algorithm>
#include <cmath>

#include "trn/errors.hpp"
#include "trn/exact_subproblem.hpp"
#include "trn/meo.hpp"

namespace trn {
namespace {

constexpr double kDegenerateDecrease = 1e-300;

std::uint64_t meo_seed(std::uint64_t base, int k) {
  // splitmix64 finalizer over (base, k)
  std::uint64_t z = base + 0x9E3779B97F4A7C15ull * (static_cast<std::uint64_t>(k) + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

void check_start(const Problem& problem, const Vector& x0) {
  if (x0.size() != problem.dim) {
    throw ConfigurationError("x0 has dimension " + std::to_string(x0.size()) +
                             ", problem expects " +
                             std::to_string(problem.dim));
  }
}

void finish(SolveReport& report, SolveStatus status, const Vector& x,
            double f, double grad_norm) {
  report.status = status;
  report.x_final = x;
  report.f_final = f;
  report.grad_norm_final = grad_norm;
}

}  // namespace

void SolverParams::validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw ConfigurationError(std::string("SolverParams: ") + what);
  };
  require(eps_g > 0.0, "eps_g must be positive");
  require(eps_H > 0.0, "eps_H must be positive");
  require(gamma1 > 0.0 && gamma1 < 1.0, "gamma1 must lie in (0,1)");
  require(gamma2 >= 1.0, "gamma2 must be >= 1");
  require(psi > 1.0 / gamma2 && psi <= 1.0, "psi must lie in (1/gamma2, 1]");
  require(eta > 0.0 && eta < 1.0, "eta must lie in (0,1)");
  require(zeta > 0.0 && zeta < 1.0, "zeta must lie in (0,1)");
  require(xi >= 0.0 && xi < 1.0, "xi must lie in [0,1)");
  require(delta0 > 0.0, "delta0 must be positive");
  require(delta_max >= delta0, "delta_max must be >= delta0");
  require(!M || *M >= 0.0, "M must be nonnegative");
  require(!reg_multiplier || *reg_multiplier >= 0.0,
          "reg_multiplier must be nonnegative");
  require(curvature_threshold_coeff >= 0.0,
          "curvature_threshold_coeff must be nonnegative");
  require(max_iters >= 0, "max_iters must be nonnegative");
}

std::string_view to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::SecondOrderStationary: return "SecondOrderStationary";
    case SolveStatus::IterLimit: return "IterLimit";
    case SolveStatus::HvpLimit: return "HvpLimit";
    case SolveStatus::SubproblemFailure: return "SubproblemFailure";
  }
  return "?";
}

std::string_view to_string(StepKind kind) {
  switch (kind) {
    case StepKind::Cg: return "cg";
    case StepKind::Meo: return "meo";
    case StepKind::CachedMeo: return "cached_meo";
    case StepKind::Exact: return "exact";
  }
  return "?";
}

double model_decrease(const Vector& g, const LinearOperator& hvp,
                      const Vector& s) {
  return -g.dot(s) - 0.5 * s.dot(hvp(s));
}

double model_decrease(const Vector& g, const Matrix& H, const Vector& s) {
  return -g.dot(s) - 0.5 * s.dot(H * s);
}

double rho(double f_old, double f_new, double model_dec) {
  if (!(model_dec > kDegenerateDecrease)) {
    throw DegenerateModelDecrease("predicted model decrease is not positive");
  }
  return (f_old - f_new) / model_dec;
}

RadiusUpdate update_radius(double delta, double step_norm, double rho_val,
                           const SolverParams& params) {
  if (!(step_norm > 0.0) || step_norm > delta * (1.0 + 1e-12)) {
    throw PreconditionViolation("update_radius: need 0 < |s| <= delta");
  }
  if (rho_val >= params.eta) {
    if (step_norm >= params.psi * delta) {
      return {std::min(params.gamma2 * delta, params.delta_max), true};
    }
    return {delta, true};
  }
  return {params.gamma1 * step_norm, false};
}

SolveReport solve_exact(const Problem& problem, const Vector& x0,
                        const SolverParams& params) {
  params.validate();
  check_start(problem, x0);
  if (!problem.has_dense_hessian()) {
    throw ConfigurationError("solve_exact needs a dense Hessian oracle");
  }
  const double reg = params.reg_multiplier.value_or(1.0) * params.eps_H;

  SolveReport report;
  const Evaluator eval(problem, report.counters);
  Vector x = x0;
  double f = eval.value(x);
  Vector g = eval.gradient(x);
  Matrix H = eval.dense_hessian(x);
  double delta = params.delta0;

  for (int k = 0; k < params.max_iters; ++k) {
    const double g_norm = g.norm();
    if (g_norm <= params.eps_g) {
      const double lambda = dense_min_eig(H).lambda;
      report.min_eig_info = MinEigInfo{lambda, MinEigInfo::Source::dense};
      if (lambda >= -params.eps_H) {
        finish(report, SolveStatus::SecondOrderStationary, x, f, g_norm);
        return report;
      }
    }

    IterationRecord rec;
    rec.k = k;
    rec.f = f;
    rec.grad_norm = g_norm;
    rec.delta = delta;
    rec.kind = StepKind::Exact;

    Vector s;
    double pred = 0.0;
    double f_trial = 0.0;
    double ratio = 0.0;
    try {
      s = solve_trs_exact(g, H, reg, delta).step;
      pred = model_decrease(g, H, s);
      f_trial = eval.value(x + s);
      ratio = rho(f, f_trial, pred);
    } catch (const std::exception& e) {
      report.message = e.what();
      finish(report, SolveStatus::SubproblemFailure, x, f, g_norm);
      return report;
    }
    const double step_norm = s.norm();
    const RadiusUpdate upd = update_radius(delta, step_norm, ratio, params);

    rec.step_norm = step_norm;
    rec.rho = ratio;
    rec.accepted = upd.accepted;
    rec.predicted_decrease = pred;
    rec.actual_decrease = f - f_trial;
    if (upd.accepted) {
      x += s;
      f = f_trial;
      g = eval.gradient(x);
      H = eval.dense_hessian(x);
      ++report.successful_count;
    } else {
      ++report.unsuccessful_count;
    }
    rec.counters_snapshot = report.counters;
    report.history.push_back(rec);
    delta = upd.delta_next;
  }
  finish(report, SolveStatus::IterLimit, x, f, g.norm());
  return report;
}

SolveReport solve_newton_cg(const Problem& problem, const Vector& x0,
                            const SolverParams& params) {
  params.validate();
  check_start(problem, x0);
  const Eigen::Index n = problem.dim;
  const double eps_H = params.eps_H;
  const std::uint64_t max_hvp =
      params.max_hvp.value_or(10000ull * static_cast<std::uint64_t>(n));

  SolveReport report;
  EvalCounters& counters = report.counters;
  const Evaluator eval(problem, counters);

  std::optional<double> M = params.M;
  if (params.cap_cg && !M) {
    M = estimate_norm_bound(eval.bind(x0, HvpChannel::other), n, 30,
                            params.seed);
  }
  report.M_used = M;
  report.setup_hvp = counters.total_hvp();

  CgConfig cg_config;
  cg_config.eps = eps_H;
  cg_config.zeta = params.zeta;
  cg_config.cap_cg = params.cap_cg;
  cg_config.M = M;
  cg_config.reg_multiplier = params.reg_multiplier.value_or(2.0);
  cg_config.curvature_threshold = params.curvature_threshold_coeff * eps_H;

  Vector x = x0;
  double f = eval.value(x);
  Vector g = eval.gradient(x);
  double delta = params.delta0;
  std::optional<Vector> cached_direction;

  for (int k = 0; k < params.max_iters; ++k) {
    const double g_norm = g.norm();
    const std::uint64_t hvp_before = counters.total_hvp();
    IterationRecord rec;
    rec.k = k;
    rec.f = f;
    rec.grad_norm = g_norm;
    rec.delta = delta;

    auto out_of_products = [&] {
      if (counters.total_hvp() <= max_hvp) return false;
      report.final_hvp = counters.total_hvp() - hvp_before;
      report.final_cg_iters = rec.cg_iters;
      report.final_lanczos_iters = rec.lanczos_iters;
      finish(report, SolveStatus::HvpLimit, x, f, g_norm);
      return true;
    };

    CgResult cg;
    if (g_norm != 0.0) {
      cg_config.delta = delta;
      cg = capped_cg(g, eval.bind(x, HvpChannel::cg), cg_config);
    } else {
      cg.step = Vector::Zero(n);
      cg.outcome = CgOutcome::IntRes;
    }
    rec.cg_outcome = cg.outcome;
    rec.cg_iters = cg.iters;
    if (out_of_products()) return report;

    const bool boundary = cg.outcome == CgOutcome::BndNeg ||
                          cg.outcome == CgOutcome::BndNorm;
    const bool interior_descent =
        g_norm > params.eps_g &&
        (cg.outcome == CgOutcome::IntRes ||
         (cg.outcome == CgOutcome::IntMax && !params.cap_cg));

    Vector s;
    if (boundary || interior_descent) {
      s = std::move(cg.step);
      rec.kind = StepKind::Cg;
    } else if (cached_direction) {
      const double sign = g.dot(*cached_direction) >= 0.0 ? -1.0 : 1.0;
      s = sign * delta * *cached_direction;
      rec.kind = StepKind::CachedMeo;
      rec.used_cached_direction = true;
    } else {
      MeoConfig meo_config;
      meo_config.eps = eps_H;
      meo_config.delta = delta;
      meo_config.xi = params.xi;
      meo_config.M = M;
      meo_config.seed = meo_seed(params.seed, k);
      const MeoResult res =
          meo(g, eval.bind(x, HvpChannel::meo), meo_config);
      ++report.meo_calls;
      rec.meo_called = true;
      if (const auto* cert = std::get_if<Certificate>(&res)) {
        report.min_eig_info =
            MinEigInfo{cert->min_eig_estimate, MinEigInfo::Source::lanczos};
        report.final_hvp = counters.total_hvp() - hvp_before;
        report.final_cg_iters = rec.cg_iters;
        report.final_lanczos_iters = cert->lanczos_iters;
        finish(report, SolveStatus::SecondOrderStationary, x, f, g_norm);
        return report;
      }
      const auto& nc = std::get<NegCurvStep>(res);
      rec.lanczos_iters = nc.lanczos_iters;
      rec.kind = StepKind::Meo;
      s = nc.step;
      cached_direction = nc.direction;
      if (out_of_products()) return report;
    }

    double pred = 0.0;
    double f_trial = 0.0;
    double ratio = 0.0;
    try {
      pred = model_decrease(g, eval.bind(x, HvpChannel::other), s);
      f_trial = eval.value(x + s);
      ratio = rho(f, f_trial, pred);
    } catch (const DegenerateModelDecrease& e) {
      report.message = e.what();
      report.final_hvp = counters.total_hvp() - hvp_before;
      report.final_cg_iters = rec.cg_iters;
      report.final_lanczos_iters = rec.lanczos_iters;
      finish(report, SolveStatus::SubproblemFailure, x, f, g_norm);
      return report;
    }
    const double step_norm = s.norm();
    const RadiusUpdate upd = update_radius(delta, step_norm, ratio, params);

    rec.step_norm = step_norm;
    rec.rho = ratio;
    rec.accepted = upd.accepted;
    rec.predicted_decrease = pred;
    rec.actual_decrease = f - f_trial;
    if (upd.accepted) {
      x += s;
      f = f_trial;
      g = eval.gradient(x);
      cached_direction.reset();
      ++report.successful_count;
    } else {
      ++report.unsuccessful_count;
    }
    rec.hvps = counters.total_hvp() - hvp_before;
    rec.counters_snapshot = counters;
    report.history.push_back(std::move(rec));
    delta = upd.delta_next;
  }
  finish(report, SolveStatus::IterLimit, x, f, g.norm());
  return report;
}

SuccessBudget iteration_budget(double f0, double f_low,
                               const SolverParams& params, double L_H) {
  if (f0 < f_low) {
    throw PreconditionViolation("iteration_budget: need f0 >= f_low");
  }
  if (!(L_H > 0.0)) {
    throw PreconditionViolation("iteration_budget: need L_H > 0");
  }
  const double one_minus_eta = 1.0 - params.eta;
  const double c_s =
      8.0 * (f0 - f_low) / params.eta *
      std::max({1.0 / (params.delta0 * params.delta0),
                4.0 * L_H * L_H /
                    (9.0 * params.gamma1 * params.gamma1 * one_minus_eta *
                     one_minus_eta),
                7.0 + 2.0 * L_H});
  const double eps_g = params.eps_g;
  const double eps_H = params.eps_H;
  const double scale = std::max({1.0 / eps_H, eps_H / (eps_g * eps_g),
                                 1.0 / (eps_H * eps_H * eps_H)});
  return {std::floor(c_s * scale) + 1.0, c_s};
}

}  // namespace trn

#include "trn/cg_subproblem.hpp"

#include <algorithm>
#include <cmath>

#include "trn/errors.hpp"

namespace trn {

std::string_view to_string(CgOutcome outcome) {
  switch (outcome) {
    case CgOutcome::BndNeg: return "BND_NEG";
    case CgOutcome::BndNorm: return "BND_NORM";
    case CgOutcome::IntRes: return "INT_RES";
    case CgOutcome::IntMax: return "INT_MAX";
  }
  return "?";
}

void CgConfig::validate() const {
  if (!(eps > 0.0)) throw ConfigurationError("CG: eps must be positive");
  if (!(delta > 0.0)) throw ConfigurationError("CG: delta must be positive");
  if (!(zeta > 0.0 && zeta < 1.0)) {
    throw ConfigurationError("CG: zeta must lie in (0,1)");
  }
  if (!(reg_multiplier >= 0.0)) {
    throw ConfigurationError("CG: reg_multiplier must be nonnegative");
  }
  if (cap_cg && !(M && *M >= 0.0)) {
    throw ConfigurationError("CG: cap_cg requires a nonnegative bound M");
  }
  if (n_bar && *n_bar < 1) throw ConfigurationError("CG: n_bar must be >= 1");
}

int default_iteration_limit(Eigen::Index n) {
  // ceil(1.2 n) in integer arithmetic
  const Eigen::Index scaled = (12 * n + 9) / 10;
  return static_cast<int>(std::min(n + 2, scaled));
}

namespace {

int cap_with_limit(double M, double eps, double zeta, int n_bar) {
  const double kappa = (M + 2.0 * eps) / eps;
  const double j_bound =
      0.5 * std::sqrt(kappa) * std::log(4.0 * std::pow(kappa, 1.5) / zeta);
  const double j_ceil = std::ceil(j_bound);
  if (!(j_ceil < static_cast<double>(n_bar))) return std::max(n_bar, 1);
  return std::max(static_cast<int>(j_ceil), 1);
}

}  // namespace

int cap_limit(double M, double eps, double zeta, Eigen::Index n) {
  return cap_with_limit(M, eps, zeta, default_iteration_limit(n));
}

double boundary_sigma(const Vector& y, const Vector& p, double delta) {
  const double yy = y.squaredNorm();
  if (std::sqrt(yy) > delta * (1.0 + 1e-14)) {
    throw PreconditionViolation("boundary_sigma: y lies outside the region");
  }
  const double pp = p.squaredNorm();
  if (!(pp > 0.0)) {
    throw PreconditionViolation("boundary_sigma: p must be nonzero");
  }
  const double yp = y.dot(p);
  const double c = std::min(yy - delta * delta, 0.0);
  const double root = std::sqrt(yp * yp - pp * c);
  // Roots multiply to c / pp; avoid subtracting nearly equal numbers.
  if (yp <= 0.0) return (root - yp) / pp;
  return -c / (yp + root);
}

CgResult capped_cg(const Vector& g, const LinearOperator& hvp,
                   const CgConfig& config) {
  config.validate();
  const double g_norm = g.norm();
  if (!(g_norm > 0.0)) {
    throw PreconditionViolation("capped_cg: g must be nonzero");
  }
  const Eigen::Index n = g.size();
  const double shift = config.reg_multiplier * config.eps;
  const double c_thr = config.threshold();

  CgResult result;
  const int n_bar = config.n_bar.value_or(default_iteration_limit(n));
  result.kmax_used =
      config.cap_cg ? cap_with_limit(*config.M, config.eps, config.zeta, n_bar)
                    : n_bar;

  Vector y = Vector::Zero(n);
  Vector r = g;
  Vector p = -g;
  double rr = r.squaredNorm();
  if (config.track_model_values) result.model_values.push_back(0.0);

  auto finish = [&](Vector step, CgOutcome outcome, int iters) {
    result.step = std::move(step);
    result.outcome = outcome;
    result.iters = iters;
    result.final_residual_norm = std::sqrt(rr);
    return result;
  };

  for (int j = 0; j < result.kmax_used; ++j) {
    Vector bp = hvp(p);
    bp += shift * p;
    const double curvature = p.dot(bp);
    const double pp = p.squaredNorm();
    if (!std::isfinite(curvature)) {
      throw NonFiniteEvaluation("capped_cg: non-finite curvature", y, p);
    }
    if (curvature <= c_thr * pp) {
      const double sigma = boundary_sigma(y, p, config.delta);
      if (config.track_model_values) {
        result.model_values.push_back(result.model_values.back() + sigma * r.dot(p) +
                                      0.5 * sigma * sigma * curvature);
      }
      return finish(y + sigma * p, CgOutcome::BndNeg, j + 1);
    }

    const double alpha = rr / curvature;
    Vector y_next = y + alpha * p;
    if (y_next.norm() >= config.delta) {
      const double sigma = boundary_sigma(y, p, config.delta);
      if (config.track_model_values) {
        result.model_values.push_back(result.model_values.back() + sigma * r.dot(p) +
                                      0.5 * sigma * sigma * curvature);
      }
      return finish(y + sigma * p, CgOutcome::BndNorm, j + 1);
    }

    r += alpha * bp;
    const double rr_next = r.squaredNorm();
    if (!std::isfinite(rr_next)) {
      throw NonFiniteEvaluation("capped_cg: non-finite residual", y_next, p);
    }
    y = std::move(y_next);
    const double r_norm = std::sqrt(rr_next);
    if (config.track_model_values) {
      result.model_values.push_back(0.5 * (g.dot(y) + y.dot(r)));
    }
    const double target =
        0.5 * config.zeta * std::min(g_norm, config.eps * y.norm());
    if (r_norm == 0.0 || r_norm <= target) {
      rr = rr_next;
      return finish(y, CgOutcome::IntRes, j + 1);
    }

    const double beta = rr_next / rr;
    rr = rr_next;
    p = -r + beta * p;
  }
  return finish(y, CgOutcome::IntMax, result.kmax_used);
}

}  // namespace trn

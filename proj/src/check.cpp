#include <cmath>
#include <cstdio>
#include <ostream>
#include <random>
#include <string>

#include "trn/cg_subproblem.hpp"
#include "trn/exact_subproblem.hpp"
#include "trn/harness.hpp"
#include "trn/meo.hpp"

namespace trn {
namespace {

Matrix random_symmetric(Eigen::Index n, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss;
  Matrix a(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) a(i, j) = gauss(rng);
  }
  return (a + a.transpose()) / 2.0;
}

Vector random_vector(Eigen::Index n, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss;
  Vector v(n);
  for (auto& x : v) x = gauss(rng);
  return v;
}

class Reporter {
public:
  explicit Reporter(std::ostream& out) : out_(out) {}

  void line(bool ok, const std::string& what) {
    out_ << (ok ? "ok    " : "FAIL  ") << what << "\n";
    if (!ok) ++failures_;
  }
  int failures() const { return failures_; }

private:
  std::ostream& out_;
  int failures_ = 0;
};

std::string fmt(const char* f, double a, double b) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a, b);
  return buf;
}

}  // namespace

std::vector<ProblemSpec> builtin_check_specs() {
  std::vector<ProblemSpec> specs;
  for (Family family : all_families()) {
    ProblemSpec spec;
    spec.family = family;
    spec.n = 10;
    if (family == Family::indefinite_quadratic) spec.negative_count = 2;
    if (family == Family::hard_case_quadratic) spec.orthogonality_offset = 1e-3;
    specs.push_back(spec);
  }
  return specs;
}

std::vector<Vector> random_points(const ProblemSpec& spec, int count,
                                  std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const Vector x0 = spec.start();
  std::vector<Vector> points;
  for (int i = 0; i < count; ++i) {
    points.push_back(x0 + 0.5 * random_vector(spec.n, rng));
  }
  return points;
}

int run_checks(std::ostream& out) {
  Reporter report(out);

  for (const ProblemSpec& spec : builtin_check_specs()) {
    const Problem problem = make_problem(spec);
    std::vector<Vector> points{spec.start()};
    for (auto& x : random_points(spec, 5, 11)) points.push_back(std::move(x));
    DerivativeReport worst;
    bool ok = true;
    for (const Vector& x : points) {
      const DerivativeReport r = check_derivatives(problem, x);
      ok = ok && r.ok();
      worst.gradient_rel_error = std::max(worst.gradient_rel_error, r.gradient_rel_error);
      worst.hvp_rel_error = std::max(worst.hvp_rel_error, r.hvp_rel_error);
    }
    report.line(ok, "derivatives " + spec.name() +
                        fmt(" (grad rel %.2e, hvp rel %.2e)",
                            worst.gradient_rel_error, worst.hvp_rel_error));
  }

  std::mt19937_64 rng(2024);

  {
    int bad = 0;
    for (int t = 0; t < 50; ++t) {
      const Eigen::Index n = 2 + t % 20;
      const Matrix H = random_symmetric(n, rng);
      const Vector g = random_vector(n, rng);
      CgConfig cfg;
      cfg.eps = 0.1;
      cfg.delta = 0.5 + (t % 5);
      cfg.track_model_values = true;
      const CgResult r = capped_cg(g, [&](const Vector& v) -> Vector { return H * v; }, cfg);
      const double norm = r.step.norm();
      bool ok = norm <= cfg.delta * (1 + 1e-10);
      if (r.outcome == CgOutcome::BndNeg || r.outcome == CgOutcome::BndNorm) {
        ok = ok && std::abs(norm - cfg.delta) <= 1e-10 * cfg.delta;
      }
      for (std::size_t j = 1; j < r.model_values.size(); ++j) {
        ok = ok && r.model_values[j] <= r.model_values[j - 1] +
                                             1e-12 * std::abs(r.model_values[j - 1]);
      }
      if (!ok) ++bad;
    }
    report.line(bad == 0, "capped CG: feasibility and monotone model on 50 instances");
  }

  {
    int bad = 0;
    for (int t = 0; t < 20; ++t) {
      const Eigen::Index n = 5 + t;
      Vector d = Vector::LinSpaced(n, -1.0, 1.0);
      const Vector g = random_vector(n, rng);
      MeoConfig cfg;
      cfg.eps = 0.1;
      cfg.delta = 1.0;
      cfg.seed = static_cast<std::uint64_t>(t);
      const MeoResult r = meo(g, [&](const Vector& v) -> Vector { return d.cwiseProduct(v); }, cfg);
      const auto* step = std::get_if<NegCurvStep>(&r);
      if (!step || step->rayleigh > -cfg.eps / 2 || g.dot(step->step) > 0.0) ++bad;
    }
    report.line(bad == 0, "MEO: negative curvature found on 20 indefinite spectra");
  }

  {
    int bad = 0;
    for (int t = 0; t < 50; ++t) {
      const Eigen::Index n = 2 + t % 10;
      const Matrix H = random_symmetric(n, rng);
      Vector g = random_vector(n, rng);
      if (t % 5 == 0) {
        const MinEigenpair mp = dense_min_eig(H);
        g -= g.dot(mp.vector) * mp.vector;
      }
      const double delta = 0.1 + 0.2 * (t % 7);
      const TrsExactSolution sol = solve_trs_exact(g, H, 0.0, delta);
      const KktResiduals k = kkt_residuals(sol, g, H, 0.0, delta);
      if (k.stationarity > 1e-8 * (1 + g.norm()) || k.complementarity > 1e-8 ||
          k.curvature_margin < -1e-8) {
        ++bad;
      }
    }
    report.line(bad == 0, "exact subproblem: KKT residuals on 50 instances");
  }

  out << (report.failures() == 0 ? "all checks passed" : "checks failed: ")
      << (report.failures() == 0 ? "" : std::to_string(report.failures())) << "\n";
  return report.failures();
}

}  // namespace trn

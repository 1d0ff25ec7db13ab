#include "trn/operator.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "trn/errors.hpp"

namespace trn {
namespace {

bool all_finite(const Vector& v) { return v.allFinite(); }

constexpr double kAbsoluteRegime = 1e-8;

void accumulate_error(const Vector& reference, const Vector& approx,
                      double& rel_error, double& abs_error) {
  const double ref_norm = reference.norm();
  const double diff = (reference - approx).norm();
  if (ref_norm < kAbsoluteRegime) {
    abs_error = std::max(abs_error, diff);
  } else {
    rel_error = std::max(rel_error, diff / ref_norm);
  }
}

}  // namespace

double Evaluator::value(const Vector& x) const {
  ++counters_.f_evals;
  const double f = problem_.value(x);
  if (!std::isfinite(f)) {
    throw NonFiniteEvaluation("objective value is not finite", x);
  }
  return f;
}

Vector Evaluator::gradient(const Vector& x) const {
  ++counters_.g_evals;
  Vector g = problem_.gradient(x);
  if (!all_finite(g)) {
    throw NonFiniteEvaluation("gradient is not finite", x);
  }
  return g;
}

Vector Evaluator::hvp(const Vector& x, const Vector& v,
                      HvpChannel channel) const {
  switch (channel) {
    case HvpChannel::cg: ++counters_.hvp_cg; break;
    case HvpChannel::meo: ++counters_.hvp_meo; break;
    case HvpChannel::other: ++counters_.hvp_other; break;
  }
  Vector hv = problem_.hvp(x, v);
  if (!all_finite(hv)) {
    throw NonFiniteEvaluation("Hessian-vector product is not finite", x, v);
  }
  return hv;
}

Matrix Evaluator::dense_hessian(const Vector& x) const {
  if (!problem_.has_dense_hessian()) {
    throw ConfigurationError("problem '" + problem_.name +
                             "' has no dense Hessian oracle");
  }
  Matrix h = problem_.dense_hessian(x);
  if (!h.allFinite()) {
    throw NonFiniteEvaluation("dense Hessian is not finite", x);
  }
  return h;
}

LinearOperator Evaluator::bind(const Vector& x, HvpChannel channel) const {
  return [this, x, channel](const Vector& v) { return hvp(x, v, channel); };
}

Vector counted_hvp(const Problem& problem, EvalCounters& counters,
                   const Vector& x, const Vector& v, HvpChannel channel) {
  return Evaluator(problem, counters).hvp(x, v, channel);
}

bool DerivativeReport::ok(double rel_tol, double abs_tol) const {
  return gradient_rel_error <= rel_tol && gradient_abs_error <= abs_tol &&
         hvp_rel_error <= rel_tol && hvp_abs_error <= abs_tol;
}

DerivativeReport check_derivatives(const Problem& problem, const Vector& x,
                                   double h, std::uint64_t probe_seed) {
  if (!(h > 0.0)) {
    throw PreconditionViolation("finite-difference step must be positive");
  }
  EvalCounters scratch;
  const Evaluator eval(problem, scratch);
  const Eigen::Index n = problem.dim;
  const double step = h * (1.0 + x.lpNorm<Eigen::Infinity>());

  DerivativeReport report;

  const Vector g = eval.gradient(x);
  Vector fd_grad(n);
  Vector xp = x;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double xi = x[i];
    xp[i] = xi + step;
    const double fp = eval.value(xp);
    xp[i] = xi - step;
    const double fm = eval.value(xp);
    xp[i] = xi;
    fd_grad[i] = (fp - fm) / (2.0 * step);
  }
  accumulate_error(g, fd_grad, report.gradient_rel_error,
                   report.gradient_abs_error);

  std::vector<Vector> probes;
  for (Eigen::Index i = 0; i < std::min<Eigen::Index>(n, 5); ++i) {
    probes.push_back(Vector::Unit(n, i));
  }
  std::mt19937_64 rng(probe_seed);
  std::normal_distribution<double> normal;
  for (int k = 0; k < 5; ++k) {
    Vector v(n);
    for (Eigen::Index i = 0; i < n; ++i) v[i] = normal(rng);
    probes.push_back(v / v.norm());
  }
  for (const Vector& v : probes) {
    const Vector hv = eval.hvp(x, v, HvpChannel::other);
    const Vector fd =
        (eval.gradient(x + step * v) - eval.gradient(x - step * v)) /
        (2.0 * step);
    accumulate_error(hv, fd, report.hvp_rel_error, report.hvp_abs_error);
  }
  return report;
}

}  // namespace trn

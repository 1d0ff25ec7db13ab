#include "trn/exact_subproblem.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "trn/errors.hpp"
#include "trn/meo.hpp"

namespace trn {
namespace {

constexpr int kMaxSecularIters = 200;
constexpr double kHardCaseProjection = 1e-12;
constexpr double kEigenspaceTol = 1e-10;

/// Moves `s` along the unit vector `u` (orthogonal to s up to rounding) onto
/// the sphere of radius delta, picking the sign that does not increase the
/// linear term g'(tau u); ties go to +.
Vector complete_to_boundary(const Vector& s, const Vector& u, const Vector& g,
                            double delta) {
  // |s + tau u|^2 = delta^2 solved exactly, not assuming s'u = 0.
  const double su = s.dot(u);
  const double c = std::min(s.squaredNorm() - delta * delta, 0.0);
  const double root = std::sqrt(su * su - c);
  const double tau_plus = -su + root;
  const double tau_minus = -su - root;
  const double gu = g.dot(u);
  double tau = tau_plus;
  if (gu * tau_plus > gu * tau_minus) tau = tau_minus;
  return s + tau * u;
}

}  // namespace

TrsExactSolution solve_trs_exact(const Vector& g, const Matrix& H, double reg,
                                 double delta, double tol) {
  if (!(delta > 0.0)) {
    throw PreconditionViolation("solve_trs_exact: delta must be positive");
  }
  if (!(tol > 0.0)) {
    throw PreconditionViolation("solve_trs_exact: tol must be positive");
  }
  if (!(reg >= 0.0)) {
    throw PreconditionViolation("solve_trs_exact: reg must be nonnegative");
  }
  const Eigen::Index n = g.size();
  Matrix B = 0.5 * (H + H.transpose());
  B.diagonal().array() += reg;

  Eigen::SelfAdjointEigenSolver<Matrix> es(B);
  if (es.info() != Eigen::Success) {
    throw LinearAlgebraError("solve_trs_exact: eigensolve failed");
  }
  const Vector& lambdas = es.eigenvalues();
  const Matrix& Q = es.eigenvectors();
  const double lam = lambdas[0];
  const double g_norm = g.norm();

  TrsExactSolution sol;

  if (lam > 0.0) {
    Eigen::LLT<Matrix> llt(B);
    if (llt.info() == Eigen::Success) {
      Vector s = -llt.solve(g);
      if (s.norm() <= delta) {
        sol.step = std::move(s);
        return sol;
      }
    }
  }

  // Minimum eigenspace and the projection of g onto it.
  const double eig_cut = lam + kEigenspaceTol * (1.0 + std::abs(lam));
  Eigen::Index m = 1;
  while (m < n && lambdas[m] <= eig_cut) ++m;
  const Vector coeffs = Q.transpose() * g;
  const double proj = coeffs.head(m).norm();
  const double lo_exact = std::max(0.0, -lam);

  if (proj <= kHardCaseProjection * g_norm) {
    // Minimum-norm minimizer of the shifted model with the eigenspace removed.
    Vector s = Vector::Zero(n);
    for (Eigen::Index i = m; i < n; ++i) {
      s -= coeffs[i] / (lambdas[i] + lo_exact) * Q.col(i);
    }
    if (s.norm() <= delta) {
      if (lam >= -kEigenspaceTol * (1.0 + std::abs(lam))) {
        sol.step = std::move(s);
        return sol;
      }
      sol.step = complete_to_boundary(s, Q.col(0), g, delta);
      sol.multiplier = lo_exact;
      sol.hard_case = true;
      sol.boundary = true;
      return sol;
    }
  }

  // Secular equation on (lo, hi]; |s(hi)| <= g_norm / (lam + hi) = delta.
  double lo = lo_exact;
  double hi = g_norm / delta + std::max(0.0, -lam);
  double mu = lam > 0.0 ? 0.0 : lo + 1e-6 * (hi - lo);
  Matrix shifted = B;

  for (int iter = 1; iter <= kMaxSecularIters; ++iter) {
    sol.newton_iters = iter;
    shifted = B;
    shifted.diagonal().array() += mu;
    Eigen::LLT<Matrix> llt(shifted);
    if (llt.info() != Eigen::Success) {
      lo = std::max(lo, mu);
      mu = 0.5 * (lo + hi);
      continue;
    }
    Vector s = -llt.solve(g);
    const double s_norm = s.norm();
    if (std::abs(s_norm - delta) <= tol * delta) {
      if (s_norm > delta) s *= delta / s_norm;
      sol.step = std::move(s);
      sol.multiplier = mu;
      sol.boundary = true;
      return sol;
    }
    if (s_norm > delta) {
      lo = std::max(lo, mu);
    } else {
      hi = std::min(hi, mu);
    }
    if (hi - lo <= 1e-15 * (1.0 + std::abs(hi))) {
      // Nearly hard case: mu has converged to the pole. Take the step at the
      // right end of the bracket and finish along the minimum eigenvector.
      Vector s_hi = Vector::Zero(n);
      for (Eigen::Index i = 0; i < n; ++i) {
        const double denom = lambdas[i] + hi;
        if (denom > 0.0) s_hi -= coeffs[i] / denom * Q.col(i);
      }
      sol.step = s_hi.norm() < delta
                     ? complete_to_boundary(s_hi, Q.col(0), g, delta)
                     : Vector(delta / s_hi.norm() * s_hi);
      sol.multiplier = hi;
      sol.hard_case = true;
      sol.boundary = true;
      return sol;
    }
    const Vector w = llt.matrixL().solve(s);
    double next =
        mu + (s_norm / w.norm()) * (s_norm / w.norm()) * (s_norm - delta) / delta;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    mu = next;
  }
  throw MaxSubproblemIterations(
      "solve_trs_exact: secular iteration did not converge");
}

KktResiduals kkt_residuals(const TrsExactSolution& sol, const Vector& g,
                           const Matrix& H, double reg, double delta) {
  Matrix shifted = 0.5 * (H + H.transpose());
  shifted.diagonal().array() += reg + sol.multiplier;
  KktResiduals out;
  out.stationarity = (shifted * sol.step + g).norm();
  out.complementarity = std::abs(sol.multiplier * (delta - sol.step.norm()));
  out.curvature_margin = dense_min_eig(shifted).lambda;
  return out;
}

}  // namespace trn

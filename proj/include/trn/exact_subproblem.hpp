#pragma once

#include "trn/operator.hpp"

namespace trn {

struct TrsExactSolution {
  Vector step;
  double multiplier = 0.0;  ///< Lagrange multiplier mu >= 0
  bool hard_case = false;
  int newton_iters = 0;     ///< secular-equation iterations
  bool boundary = false;
};

/// Global minimizer of g's + 1/2 s'(H + reg I)s subject to |s| <= delta.
///
/// Interior case: B = H + reg I positive definite and |B^{-1} g| <= delta
/// (or B positive semidefinite with g in its range and the minimum-norm
/// solution inside). Otherwise mu > max{0, -lambda_min(B)} is found by
/// safeguarded Newton on 1/delta - 1/|s(mu)|, s(mu) = -(B + mu I)^{-1} g,
/// with a Cholesky factorization per trial mu. In the hard case (g has no
/// component along the minimum eigenspace and |s(-lambda_min)| < delta) the
/// step is completed along a minimum eigenvector to reach the boundary.
///
/// Throws MaxSubproblemIterations after 200 secular iterations.
TrsExactSolution solve_trs_exact(const Vector& g, const Matrix& H, double reg,
                                 double delta, double tol = 1e-10);

struct KktResiduals {
  double stationarity = 0.0;      ///< |(H + reg I + mu I)s + g|
  double complementarity = 0.0;   ///< |mu (delta - |s|)|
  double curvature_margin = 0.0;  ///< lambda_min(H + reg I + mu I)
};

KktResiduals kkt_residuals(const TrsExactSolution& sol, const Vector& g,
                           const Matrix& H, double reg, double delta);

}  // namespace trn

#pragma once

#include <cstdint>
#include <optional>
#include <variant>

#include "trn/operator.hpp"

namespace trn {

struct MeoConfig {
  double eps = 0.0;
  double delta = 0.0;
  double xi = 0.01;  ///< tolerated failure probability of a Certificate
  std::optional<double> M;  ///< bound on |H|; without it the budget is n
  std::uint64_t seed = 0;
  double adaptive_tol = 1e-5;
  std::optional<int> max_iters;  ///< defaults to meo_iteration_budget

  void validate() const;
};

/// Direction of sufficient negative curvature, scaled to the boundary.
struct NegCurvStep {
  Vector step;       ///< s = +-delta v with g's <= 0
  Vector direction;  ///< unit v
  double rayleigh = 0.0;  ///< v'Hv <= -eps/2
  int lanczos_iters = 0;
};

/// Indication that H >= -eps I; wrong with probability at most xi.
struct Certificate {
  int lanczos_iters = 0;
  double min_eig_estimate = 0.0;
};

using MeoResult = std::variant<NegCurvStep, Certificate>;

struct LanczosResult {
  double lambda = 0.0;
  Vector vector;  ///< unit Ritz vector
  int iters = 0;  ///< products issued
};

/// Randomized Lanczos with full reorthogonalization, started from a
/// normalized Gaussian vector. Stops when lambda_{l-t} - lambda_l <=
/// adaptive_tol with t = min{l, n, 10}, at l = min{max_iters, n}, or on
/// breakdown (next Lanczos residual <= 1e-12). lambda_0 is +inf, so the
/// adaptive test first compares two genuine estimates at l = 11.
LanczosResult lanczos_min_eig(const LinearOperator& hvp, Eigen::Index n,
                              int max_iters, std::uint64_t seed,
                              double adaptive_tol = 1e-5);

/// min{n, 1 + ceil(C eps^{-1/2})} with C = ln(2.75 n / xi^2) sqrt(M) / 2.
int meo_iteration_budget(Eigen::Index n, double eps, double xi, double M);

/// Minimum eigenvalue oracle built on lanczos_min_eig. One extra product
/// recomputes the Rayleigh quotient of the returned Ritz vector, and the
/// negative-curvature branch is taken when it is <= -eps/2.
MeoResult meo(const Vector& g, const LinearOperator& hvp,
              const MeoConfig& config);

struct MinEigenpair {
  double lambda = 0.0;
  Vector vector;
};

/// Exact minimum eigenpair of (H + H')/2.
MinEigenpair dense_min_eig(const Matrix& H);

/// 1.1 * max |Ritz value| after `iters` Lanczos steps; a heuristic |H| bound.
double estimate_norm_bound(const LinearOperator& hvp, Eigen::Index n,
                           int iters = 30, std::uint64_t seed = 0);

}  // namespace trn

#pragma once

#include <optional>
#include <string_view>
#include <vector>

#include "trn/operator.hpp"

namespace trn {

/// Why truncated CG stopped.
///  - BndNeg:  insufficient curvature along p_j, step moved to the boundary.
///  - BndNorm: the next iterate left the trust region, step clipped to it.
///  - IntRes:  interior iterate meeting the residual test.
///  - IntMax:  interior iterate after k_max iterations.
enum class CgOutcome { BndNeg, BndNorm, IntRes, IntMax };

std::string_view to_string(CgOutcome outcome);

struct CgConfig {
  double eps = 0.0;    ///< curvature / regularization tolerance
  double delta = 0.0;  ///< trust-region radius
  double zeta = 0.25;  ///< residual accuracy, in (0,1)
  bool cap_cg = false;
  std::optional<double> M;  ///< bound on |H|; required when cap_cg is set
  /// Operator is H + reg_multiplier * eps * I.
  double reg_multiplier = 2.0;
  /// Curvature test is p'(H + reg eps I)p <= threshold |p|^2; defaults to eps.
  std::optional<double> curvature_threshold;
  /// Replaces the default iteration limit min{n+2, ceil(1.2 n)}.
  std::optional<int> n_bar;
  /// Record the regularized model value at every CG iterate.
  bool track_model_values = false;

  void validate() const;
  double threshold() const { return curvature_threshold.value_or(eps); }
};

struct CgResult {
  Vector step;
  CgOutcome outcome = CgOutcome::IntRes;
  int iters = 0;
  double final_residual_norm = 0.0;
  int kmax_used = 0;
  /// g'y_j + 1/2 y_j'(H + reg eps I)y_j for j = 0..iters, when tracked.
  std::vector<double> model_values;
};

/// min{n+2, ceil(1.2 n)}.
int default_iteration_limit(Eigen::Index n);

/// min{n_bar, ceil(J(M, eps, zeta))} with kappa = (M + 2 eps) / eps and
/// J = 1/2 sqrt(kappa) ln(4 kappa^{3/2} / zeta). Never less than 1.
int cap_limit(double M, double eps, double zeta, Eigen::Index n);

/// Largest sigma >= 0 with |y + sigma p| = delta. Requires |y| <= delta.
double boundary_sigma(const Vector& y, const Vector& p, double delta);

/// Truncated CG for min g's + 1/2 s'(H + reg eps I)s s.t. |s| <= delta,
/// started from y0 = 0. `hvp` is called exactly once per iteration.
CgResult capped_cg(const Vector& g, const LinearOperator& hvp,
                   const CgConfig& config);

}  // namespace trn

#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "trn/operator.hpp"

namespace trn {

enum class Family {
  rosenbrock_extended,
  rosenbrock_chained,
  quartic_saddle,
  indefinite_quadratic,
  hard_case_quadratic,
  convex_quadratic_conditioned
};

std::string_view to_string(Family family);
std::optional<Family> family_from_string(std::string_view name);
const std::vector<Family>& all_families();

struct ProblemSpec {
  Family family = Family::rosenbrock_extended;
  Eigen::Index n = 2;
  /// lambda_max / lambda_min of the positive spectrum (quadratic families).
  double condition = 1e4;
  /// Number of negative eigenvalues (indefinite_quadratic).
  int negative_count = 1;
  /// Magnitude of the negative eigenvalue(s) (indefinite and hard-case).
  double curvature_gap = 1.0;
  /// Hard case: linear term along e_2.
  double gradient_scale = 1e-8;
  /// Hard case: linear term along the minimum eigenvector e_1.
  double orthogonality_offset = 0.0;
  /// Overrides the family's standard start point.
  std::optional<Vector> x0;

  void validate() const;
  /// e.g. "rosenbrock_extended_n100"
  std::string name() const;
  Vector start() const;
};

/// Analytic oracles for `spec`. A dense Hessian oracle is attached when
/// n <= 2000.
Problem make_problem(const ProblemSpec& spec);

/// Positive spectrum of convex_quadratic_conditioned: log-spaced from 1 to
/// `condition`, endpoints exact.
Vector log_spaced_spectrum(Eigen::Index n, double condition);

}  // namespace trn

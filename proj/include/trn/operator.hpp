#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>

#include <Eigen/Core>

namespace trn {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Matrix-free symmetric operator v -> A v.
using LinearOperator = std::function<Vector(const Vector&)>;

/// Objective oracle. All callables must be pure so a Problem can be shared
/// across threads.
struct Problem {
  std::string name;
  Eigen::Index dim = 0;
  std::function<double(const Vector&)> value;
  std::function<Vector(const Vector&)> gradient;
  std::function<Vector(const Vector&, const Vector&)> hvp;
  /// Optional dense Hessian; required by the exact solver.
  std::function<Matrix(const Vector&)> dense_hessian;
  std::optional<double> known_fmin;
  std::optional<Vector> known_minimizer;

  bool has_dense_hessian() const { return static_cast<bool>(dense_hessian); }
};

enum class HvpChannel { cg, meo, other };

struct EvalCounters {
  std::uint64_t f_evals = 0;
  std::uint64_t g_evals = 0;
  std::uint64_t hvp_cg = 0;
  std::uint64_t hvp_meo = 0;
  std::uint64_t hvp_other = 0;

  std::uint64_t total_hvp() const { return hvp_cg + hvp_meo + hvp_other; }

  friend bool operator==(const EvalCounters&, const EvalCounters&) = default;
};

/// Metered access to a Problem. Every evaluation increments exactly one
/// counter and rejects non-finite output.
class Evaluator {
public:
  Evaluator(const Problem& problem, EvalCounters& counters)
      : problem_(problem), counters_(counters) {}

  const Problem& problem() const { return problem_; }
  EvalCounters& counters() const { return counters_; }

  double value(const Vector& x) const;
  Vector gradient(const Vector& x) const;
  Vector hvp(const Vector& x, const Vector& v, HvpChannel channel) const;
  Matrix dense_hessian(const Vector& x) const;

  /// Binds x and channel, giving the product oracle consumed by CG and
  /// Lanczos. The returned operator refers to this Evaluator and to x.
  LinearOperator bind(const Vector& x, HvpChannel channel) const;

private:
  const Problem& problem_;
  EvalCounters& counters_;
};

/// H(x) v through the problem oracle, charged to `channel`.
Vector counted_hvp(const Problem& problem, EvalCounters& counters,
                   const Vector& x, const Vector& v, HvpChannel channel);

/// Worst finite-difference mismatches. Relative errors are used when the
/// reference vector has norm >= 1e-8, absolute errors otherwise; a field is
/// zero when no probe fell into its regime.
struct DerivativeReport {
  double gradient_rel_error = 0.0;
  double gradient_abs_error = 0.0;
  double hvp_rel_error = 0.0;
  double hvp_abs_error = 0.0;

  bool ok(double rel_tol = 1e-5, double abs_tol = 1e-9) const;
};

/// Central-difference checks of the gradient against the value oracle and of
/// the Hessian-vector product against the gradient oracle, with step
/// h * (1 + |x|_inf). Products are probed along a few coordinate axes and a
/// few seeded random directions. Uses scratch counters.
DerivativeReport check_derivatives(const Problem& problem, const Vector& x,
                                   double h = 1e-6,
                                   std::uint64_t probe_seed = 7);

}  // namespace trn

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "trn/cg_subproblem.hpp"
#include "trn/operator.hpp"

namespace trn {

/// Tunables of both trust-region Newton methods. Defaults are the values
/// used in the published experiments.
struct SolverParams {
  double eps_g = 1e-5;
  double eps_H = 3.1622776601683794e-3;  // 10^{-5/2}
  double gamma1 = 0.5;
  double gamma2 = 2.0;
  double psi = 0.75;
  double eta = 0.1;
  double zeta = 0.25;
  double xi = 0.01;
  double delta0 = 10.0;
  double delta_max = 1e20;
  bool cap_cg = false;
  /// Bound on |H|. When cap_cg is set and this is empty, it is estimated at
  /// x0 with 30 Lanczos steps (charged to hvp_other).
  std::optional<double> M;
  /// Regularization theta in H + theta eps_H I. Empty selects the algorithm's
  /// own value: 2 for Newton-CG, 1 for the exact method.
  std::optional<double> reg_multiplier;
  /// CG curvature test threshold is this coefficient times eps_H.
  double curvature_threshold_coeff = 1.0;
  int max_iters = 10000;
  /// Run-level product budget; empty means 10^4 n.
  std::optional<std::uint64_t> max_hvp;
  std::uint64_t seed = 0;

  /// Throws ConfigurationError on any out-of-range field.
  void validate() const;
};

enum class SolveStatus {
  SecondOrderStationary,
  IterLimit,
  HvpLimit,
  SubproblemFailure
};

std::string_view to_string(SolveStatus status);

enum class StepKind { Cg, Meo, CachedMeo, Exact };

std::string_view to_string(StepKind kind);

struct IterationRecord {
  int k = 0;
  double f = 0.0;          ///< f(x_k)
  double grad_norm = 0.0;  ///< |g_k|
  double delta = 0.0;      ///< radius used by this iteration
  StepKind kind = StepKind::Cg;
  std::optional<CgOutcome> cg_outcome;
  double step_norm = 0.0;
  double rho = 0.0;
  bool accepted = false;
  bool used_cached_direction = false;
  bool meo_called = false;
  double predicted_decrease = 0.0;  ///< m(0) - m(s), unregularized model
  double actual_decrease = 0.0;     ///< f(x_k) - f(x_k + s)
  int cg_iters = 0;
  int lanczos_iters = 0;
  std::uint64_t hvps = 0;  ///< products issued during this iteration
  EvalCounters counters_snapshot;
};

struct MinEigInfo {
  enum class Source { dense, lanczos };
  double estimate = 0.0;
  Source source = Source::dense;
};

struct SolveReport {
  SolveStatus status = SolveStatus::IterLimit;
  Vector x_final;
  double f_final = 0.0;
  double grad_norm_final = 0.0;
  std::optional<MinEigInfo> min_eig_info;
  std::vector<IterationRecord> history;
  EvalCounters counters;
  int successful_count = 0;
  int unsuccessful_count = 0;
  int meo_calls = 0;
  /// Products spent before the first iteration (bound estimation).
  std::uint64_t setup_hvp = 0;
  /// Products spent in the terminating iteration, which records no step.
  std::uint64_t final_hvp = 0;
  /// CG and Lanczos iterations of that terminating iteration.
  int final_cg_iters = 0;
  int final_lanczos_iters = 0;
  std::optional<double> M_used;
  std::string message;
};

/// m(0) - m(s) = -g's - 1/2 s'Hs using one product through `hvp`.
double model_decrease(const Vector& g, const LinearOperator& hvp,
                      const Vector& s);
double model_decrease(const Vector& g, const Matrix& H, const Vector& s);

/// (f_old - f_new) / model_dec; throws DegenerateModelDecrease when
/// model_dec <= 1e-300.
double rho(double f_old, double f_new, double model_dec);

struct RadiusUpdate {
  double delta_next = 0.0;
  bool accepted = false;
};

RadiusUpdate update_radius(double delta, double step_norm, double rho_val,
                           const SolverParams& params);

/// Trust-region Newton method with exact (dense) subproblem solves.
SolveReport solve_exact(const Problem& problem, const Vector& x0,
                        const SolverParams& params);

/// Matrix-free trust-region Newton-CG method with the minimum eigenvalue
/// oracle; a negative-curvature direction found by the oracle is reused
/// across a streak of rejected steps.
SolveReport solve_newton_cg(const Problem& problem, const Vector& x0,
                            const SolverParams& params);

struct SuccessBudget {
  /// Bound on the number of successful iterations; stored as a double since
  /// it easily exceeds 2^63 for tight tolerances.
  double K_S_bar = 0.0;
  double C_S_bar = 0.0;
};

/// Worst-case bound on successful Newton-CG iterations given the descent
/// available f0 - f_low and a Hessian Lipschitz constant L_H.
SuccessBudget iteration_budget(double f0, double f_low,
                               const SolverParams& params, double L_H);

}  // namespace trn

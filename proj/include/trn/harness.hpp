#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "trn/driver.hpp"
#include "trn/problems.hpp"

namespace trn {

/// A named solver configuration from the benchmark matrix.
struct Variant {
  std::string name;
  bool exact = false;  ///< exact subproblem solver instead of Newton-CG
  SolverParams params;
};

/// tr_newton, tr_newton_noreg, tr_newton_cg_explicit,
/// tr_newton_cg_explicit_noreg, tr_newton_cg, tr_newton_cg_noreg.
const std::vector<std::string>& variant_names();
Variant variant_preset(const std::string& name);

struct RunConfig {
  std::vector<std::string> variants;
  std::vector<ProblemSpec> problems;
  std::vector<std::pair<double, double>> tolerance_pairs{
      {1e-5, 3.1622776601683794e-3}};
  std::vector<std::uint64_t> seeds{0};
  std::filesystem::path output_dir;  ///< empty: keep results in memory only
  /// Applied to every variant after the preset (e.g. "max_iters").
  nlohmann::json overrides = nlohmann::json::object();

  void validate() const;
};

RunConfig parse_run_config(const nlohmann::json& doc);
RunConfig load_run_config(const std::filesystem::path& path);

struct RunOptions {
  int jobs = 1;
  bool history = false;  ///< include per-iteration records in cell JSON
  bool timing = false;   ///< emit wall_ms; off keeps outputs byte-identical
};

struct CellResult {
  std::size_t index = 0;
  ProblemSpec problem;
  std::string variant;
  double eps_g = 0.0;
  double eps_H = 0.0;
  std::uint64_t seed = 0;
  SolverParams params;  ///< preset plus overrides, as run
  SolveReport report;
  std::string error;  ///< non-empty when the solver threw
  double wall_ms = 0.0;

  bool solved() const {
    return error.empty() &&
           report.status == SolveStatus::SecondOrderStationary;
  }
};

/// Runs every variant x problem x tolerance x seed cell. Solver failures are
/// recorded in the results; configuration and I/O errors throw. When an
/// output directory is configured, each cell's JSON is written as soon as it
/// finishes and summary.csv is written at the end.
std::vector<CellResult> run_suite(const RunConfig& config,
                                  const RunOptions& options = {});

nlohmann::ordered_json cell_to_json(const CellResult& cell,
                                    const RunOptions& options);

std::string summary_csv_header();
std::string summary_csv_row(const CellResult& cell, const RunOptions& options);

enum class ProfileMetric { iterations, g_evals, hvp_total };

ProfileMetric profile_metric_from_string(const std::string& name);
std::string_view to_string(ProfileMetric metric);

inline constexpr double kFailed = std::numeric_limits<double>::infinity();

struct ProfileTable {
  ProfileMetric metric = ProfileMetric::iterations;
  std::vector<std::string> problems;
  std::vector<std::string> variants;
  /// problems x variants; kFailed marks a failed run.
  std::vector<std::vector<double>> values;
  std::vector<double> tau_grid;
  /// variants x tau_grid; fraction of counted problems with ratio <= tau.
  std::vector<std::vector<double>> rho_curves;
  /// Problems where every variant failed; left out of the denominators.
  int excluded_problems = 0;
};

/// Dolan-More performance profile. The grid holds 1, every finite ratio not
/// above tau_max, and tau_max, so the curves are exact staircases.
ProfileTable performance_profile(const std::vector<std::vector<double>>& values,
                                 double tau_max = 10.0);

/// Builds the profile matrix from a summary CSV. Counts are floored at 1 so
/// that zero-cost runs stay comparable.
ProfileTable profile_from_csv(const std::filesystem::path& csv,
                              ProfileMetric metric, double tau_max = 10.0);

void write_profile_csv(const ProfileTable& table, std::ostream& out);

/// One small instance of every built-in family, as used by `check`.
std::vector<ProblemSpec> builtin_check_specs();

/// `count` seeded points around the start of `spec`: x0 + N(0, 0.25 I).
std::vector<Vector> random_points(const ProblemSpec& spec, int count,
                                  std::uint64_t seed);

/// Derivative checks on every built-in family plus a short sweep of the
/// subproblem invariants. Prints one line per check; returns the number of
/// failed checks.
int run_checks(std::ostream& out);

}  // namespace trn

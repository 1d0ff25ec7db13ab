// trn: run benchmark matrices, build performance profiles, self-check.
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "trn/errors.hpp"
#include "trn/harness.hpp"

namespace {

int cmd_run(const std::string& config_path, const std::string& out_dir,
            int jobs, std::optional<std::uint64_t> seed, bool history,
            bool timing) {
  trn::RunConfig config = trn::load_run_config(config_path);
  if (!out_dir.empty()) config.output_dir = out_dir;
  if (seed) config.seeds = {*seed};
  if (config.output_dir.empty()) config.output_dir = "results";

  trn::RunOptions options;
  options.jobs = jobs;
  options.history = history;
  options.timing = timing;
  const auto cells = trn::run_suite(config, options);

  int errors = 0;
  int solved = 0;
  for (const auto& cell : cells) {
    if (!cell.error.empty()) {
      ++errors;
      std::cerr << cell.problem.name() << " / " << cell.variant << ": "
                << cell.error << "\n";
    }
    if (cell.solved()) ++solved;
  }
  std::cout << cells.size() << " cells, " << solved << " solved, "
            << errors << " solver errors; results in "
            << config.output_dir.string() << "\n";
  return 0;
}

int cmd_profile(const std::string& csv, const std::string& metric,
                double tau_max, const std::string& out_path) {
  const auto table =
      trn::profile_from_csv(csv, trn::profile_metric_from_string(metric), tau_max);
  if (out_path.empty()) {
    trn::write_profile_csv(table, std::cout);
    return 0;
  }
  std::ofstream out(out_path);
  if (!out) throw trn::IoError("cannot write '" + out_path + "'");
  trn::write_profile_csv(table, out);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Trust-region Newton and Newton-CG benchmark driver"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "Run a variant x problem matrix");
  std::string config_path, out_dir;
  int jobs = 1;
  std::optional<std::uint64_t> seed;
  bool history = false, timing = false;
  run->add_option("--config", config_path, "JSON run configuration")
      ->required()
      ->check(CLI::ExistingFile);
  run->add_option("--out", out_dir, "Output directory (overrides the config)");
  run->add_option("--jobs", jobs, "Worker threads")->check(CLI::PositiveNumber);
  run->add_option("--seed", seed, "Run every cell with this single seed");
  run->add_flag("--history", history, "Store per-iteration records");
  run->add_flag("--timing", timing, "Record wall-clock time per cell");

  auto* profile = app.add_subcommand("profile", "Performance profile from summary.csv");
  std::string metric = "iters", csv, profile_out;
  double tau_max = 10.0;
  profile->add_option("--metric", metric, "iters, gevals or hvp")
      ->check(CLI::IsMember({"iters", "gevals", "hvp"}));
  profile->add_option("--tau-max", tau_max, "Largest performance ratio");
  profile->add_option("--csv", csv, "summary.csv from a run")
      ->required()
      ->check(CLI::ExistingFile);
  profile->add_option("-o,--output", profile_out, "Write the profile here");

  app.add_subcommand("check", "Derivative and subproblem self-checks");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) return cmd_run(config_path, out_dir, jobs, seed, history, timing);
    if (*profile) return cmd_profile(csv, metric, tau_max, profile_out);
    return trn::run_checks(std::cout) == 0 ? 0 : 1;
  } catch (const trn::ConfigurationError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return 2;
  } catch (const trn::PreconditionViolation& e) {
    std::cerr << "invalid input: " << e.what() << "\n";
    return 2;
  } catch (const trn::IoError& e) {
    std::cerr << "I/O error: " << e.what() << "\n";
    return 3;
  }
}

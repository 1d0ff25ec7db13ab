#include "trn/harness.hpp"

#include <atomic>
#include <chrono>
#include <cstdio>
#include <exception>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include "trn/errors.hpp"

namespace trn {
namespace {

using nlohmann::json;
using nlohmann::ordered_json;

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

template <typename T>
T get_field(const json& obj, const char* key, const char* where) {
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigurationError(std::string(where) + "." + key + ": " + e.what());
  }
}

ProblemSpec parse_problem(const json& doc) {
  if (!doc.is_object()) throw ConfigurationError("problem entry must be an object");
  ProblemSpec spec;
  const auto family_name = get_field<std::string>(doc, "family", "problem");
  const auto family = family_from_string(family_name);
  if (!family) throw ConfigurationError("unknown problem family '" + family_name + "'");
  spec.family = *family;
  spec.n = get_field<Eigen::Index>(doc, "n", "problem");
  for (const auto& [key, value] : doc.items()) {
    if (key == "family" || key == "n") continue;
    if (key == "condition") {
      spec.condition = get_field<double>(doc, "condition", "problem");
    } else if (key == "negative_count") {
      spec.negative_count = get_field<int>(doc, "negative_count", "problem");
    } else if (key == "curvature_gap") {
      spec.curvature_gap = get_field<double>(doc, "curvature_gap", "problem");
    } else if (key == "gradient_scale") {
      spec.gradient_scale = get_field<double>(doc, "gradient_scale", "problem");
    } else if (key == "orthogonality_offset") {
      spec.orthogonality_offset =
          get_field<double>(doc, "orthogonality_offset", "problem");
    } else if (key == "x0") {
      const auto x0 = get_field<std::vector<double>>(doc, "x0", "problem");
      spec.x0 = Eigen::Map<const Vector>(x0.data(),
                                         static_cast<Eigen::Index>(x0.size()));
    } else {
      throw ConfigurationError("unknown problem field '" + key + "'");
    }
  }
  spec.validate();
  return spec;
}

ordered_json problem_to_json(const ProblemSpec& spec) {
  ordered_json out;
  out["family"] = to_string(spec.family);
  out["n"] = spec.n;
  switch (spec.family) {
    case Family::indefinite_quadratic:
      out["condition"] = spec.condition;
      out["negative_count"] = spec.negative_count;
      out["curvature_gap"] = spec.curvature_gap;
      break;
    case Family::hard_case_quadratic:
      out["curvature_gap"] = spec.curvature_gap;
      out["gradient_scale"] = spec.gradient_scale;
      out["orthogonality_offset"] = spec.orthogonality_offset;
      break;
    case Family::convex_quadratic_conditioned:
      out["condition"] = spec.condition;
      break;
    default:
      break;
  }
  if (spec.x0) out["x0"] = std::vector<double>(spec.x0->begin(), spec.x0->end());
  return out;
}

void apply_overrides(SolverParams& p, const json& overrides) {
  for (const auto& [key, value] : overrides.items()) {
    try {
      if (key == "gamma1") p.gamma1 = value.get<double>();
      else if (key == "gamma2") p.gamma2 = value.get<double>();
      else if (key == "psi") p.psi = value.get<double>();
      else if (key == "eta") p.eta = value.get<double>();
      else if (key == "zeta") p.zeta = value.get<double>();
      else if (key == "xi") p.xi = value.get<double>();
      else if (key == "delta0") p.delta0 = value.get<double>();
      else if (key == "delta_max") p.delta_max = value.get<double>();
      else if (key == "M") p.M = value.get<double>();
      else if (key == "reg_multiplier") p.reg_multiplier = value.get<double>();
      else if (key == "curvature_threshold_coeff")
        p.curvature_threshold_coeff = value.get<double>();
      else if (key == "max_iters") p.max_iters = value.get<int>();
      else if (key == "max_hvp") p.max_hvp = value.get<std::uint64_t>();
      else if (key == "cap_cg") p.cap_cg = value.get<bool>();
      else throw ConfigurationError("unknown override '" + key + "'");
    } catch (const json::exception& e) {
      throw ConfigurationError("override '" + key + "': " + e.what());
    }
  }
}

ordered_json params_to_json(const SolverParams& p) {
  ordered_json out;
  out["eps_g"] = p.eps_g;
  out["eps_H"] = p.eps_H;
  out["gamma1"] = p.gamma1;
  out["gamma2"] = p.gamma2;
  out["psi"] = p.psi;
  out["eta"] = p.eta;
  out["zeta"] = p.zeta;
  out["xi"] = p.xi;
  out["delta0"] = p.delta0;
  out["delta_max"] = p.delta_max;
  out["cap_cg"] = p.cap_cg;
  out["M"] = p.M ? ordered_json(*p.M) : ordered_json(nullptr);
  out["reg_multiplier"] =
      p.reg_multiplier ? ordered_json(*p.reg_multiplier) : ordered_json(nullptr);
  out["curvature_threshold_coeff"] = p.curvature_threshold_coeff;
  out["max_iters"] = p.max_iters;
  out["max_hvp"] = p.max_hvp ? ordered_json(*p.max_hvp) : ordered_json(nullptr);
  out["seed"] = p.seed;
  return out;
}

ordered_json counters_to_json(const EvalCounters& c) {
  ordered_json out;
  out["f_evals"] = c.f_evals;
  out["g_evals"] = c.g_evals;
  out["hvp_cg"] = c.hvp_cg;
  out["hvp_meo"] = c.hvp_meo;
  out["hvp_other"] = c.hvp_other;
  out["hvp_total"] = c.total_hvp();
  return out;
}

ordered_json record_to_json(const IterationRecord& r) {
  ordered_json out;
  out["k"] = r.k;
  out["f"] = r.f;
  out["grad_norm"] = r.grad_norm;
  out["delta"] = r.delta;
  out["kind"] = to_string(r.kind);
  out["cg_outcome"] =
      r.cg_outcome ? ordered_json(to_string(*r.cg_outcome)) : ordered_json(nullptr);
  out["step_norm"] = r.step_norm;
  out["rho"] = r.rho;
  out["accepted"] = r.accepted;
  out["used_cached_direction"] = r.used_cached_direction;
  out["meo_called"] = r.meo_called;
  out["predicted_decrease"] = r.predicted_decrease;
  out["actual_decrease"] = r.actual_decrease;
  out["cg_iters"] = r.cg_iters;
  out["lanczos_iters"] = r.lanczos_iters;
  out["hvps"] = r.hvps;
  out["counters"] = counters_to_json(r.counters_snapshot);
  return out;
}

SolverParams cell_params(const Variant& variant, const RunConfig& config,
                         double eps_g, double eps_H, std::uint64_t seed) {
  SolverParams p = variant.params;
  apply_overrides(p, config.overrides);
  p.eps_g = eps_g;
  p.eps_H = eps_H;
  p.seed = seed;
  p.validate();
  return p;
}

std::string cell_file_name(const CellResult& cell) {
  char prefix[16];
  std::snprintf(prefix, sizeof prefix, "%04zu", cell.index);
  return std::string(prefix) + "_" + cell.problem.name() + "__" + cell.variant +
         ".json";
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << text;
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

}  // namespace

const std::vector<std::string>& variant_names() {
  static const std::vector<std::string> names{
      "tr_newton",    "tr_newton_noreg",    "tr_newton_cg_explicit",
      "tr_newton_cg_explicit_noreg", "tr_newton_cg", "tr_newton_cg_noreg"};
  return names;
}

Variant variant_preset(const std::string& name) {
  Variant v;
  v.name = name;
  if (name == "tr_newton") {
    // The experiments regularize the exact variant with 2 eps_H as well.
    v.exact = true;
    v.params.reg_multiplier = 2.0;
  } else if (name == "tr_newton_noreg") {
    v.exact = true;
    v.params.reg_multiplier = 0.0;
  } else if (name == "tr_newton_cg_explicit") {
    v.params.cap_cg = true;
    v.params.reg_multiplier = 2.0;
  } else if (name == "tr_newton_cg_explicit_noreg") {
    v.params.cap_cg = true;
    v.params.reg_multiplier = 0.0;
    v.params.curvature_threshold_coeff = 0.0;
  } else if (name == "tr_newton_cg") {
    v.params.reg_multiplier = 2.0;
  } else if (name == "tr_newton_cg_noreg") {
    v.params.reg_multiplier = 0.0;
    v.params.curvature_threshold_coeff = 0.0;
  } else {
    throw ConfigurationError("unknown variant '" + name + "'");
  }
  return v;
}

void RunConfig::validate() const {
  if (variants.empty()) throw ConfigurationError("run config: no variants");
  if (problems.empty()) throw ConfigurationError("run config: no problems");
  if (tolerance_pairs.empty()) {
    throw ConfigurationError("run config: no tolerance pairs");
  }
  if (seeds.empty()) throw ConfigurationError("run config: no seeds");
  for (const auto& v : variants) variant_preset(v);
  for (const auto& p : problems) p.validate();
  for (const auto& [eg, eh] : tolerance_pairs) {
    if (!(eg > 0.0 && eh > 0.0)) {
      throw ConfigurationError("run config: tolerances must be positive");
    }
  }
  SolverParams probe;
  apply_overrides(probe, overrides);
  probe.validate();
}

RunConfig parse_run_config(const json& doc) {
  if (!doc.is_object()) throw ConfigurationError("run config must be an object");
  RunConfig config;
  for (const auto& [key, value] : doc.items()) {
    if (key == "variants") {
      config.variants = get_field<std::vector<std::string>>(doc, "variants", "config");
    } else if (key == "problems") {
      if (!value.is_array()) throw ConfigurationError("config.problems must be a list");
      for (const auto& p : value) config.problems.push_back(parse_problem(p));
    } else if (key == "tolerance_pairs") {
      config.tolerance_pairs =
          get_field<std::vector<std::pair<double, double>>>(doc, key.c_str(), "config");
    } else if (key == "seeds") {
      config.seeds = get_field<std::vector<std::uint64_t>>(doc, "seeds", "config");
    } else if (key == "output_dir") {
      config.output_dir = get_field<std::string>(doc, "output_dir", "config");
    } else if (key == "overrides") {
      if (!value.is_object()) throw ConfigurationError("config.overrides must be an object");
      config.overrides = value;
    } else {
      throw ConfigurationError("unknown config field '" + key + "'");
    }
  }
  config.validate();
  return config;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config '" + path.string() + "'");
  json doc;
  try {
    in >> doc;
  } catch (const json::parse_error& e) {
    throw ConfigurationError("config '" + path.string() + "': " + e.what());
  }
  return parse_run_config(doc);
}

ordered_json cell_to_json(const CellResult& cell, const RunOptions& options) {
  const Variant variant = variant_preset(cell.variant);
  ordered_json cfg;
  cfg["problem"] = problem_to_json(cell.problem);
  cfg["problem_name"] = cell.problem.name();
  cfg["variant"] = cell.variant;
  cfg["solver"] = variant.exact ? "exact" : "newton_cg";
  cfg["eps_g"] = cell.eps_g;
  cfg["eps_H"] = cell.eps_H;
  cfg["seed"] = cell.seed;
  cfg["params"] = params_to_json(cell.params);

  const SolveReport& r = cell.report;
  ordered_json out;
  out["config"] = std::move(cfg);
  out["status"] = cell.error.empty() ? std::string(to_string(r.status)) : "Error";
  out["solved"] = cell.solved();
  if (!cell.error.empty()) out["error"] = cell.error;
  if (!r.message.empty()) out["message"] = r.message;
  out["f_final"] = r.f_final;
  out["grad_norm_final"] = r.grad_norm_final;
  if (r.min_eig_info) {
    out["min_eig"] = {
        {"estimate", r.min_eig_info->estimate},
        {"source", r.min_eig_info->source == MinEigInfo::Source::dense ? "dense"
                                                                       : "lanczos"}};
  } else {
    out["min_eig"] = nullptr;
  }
  out["iterations"] = r.history.size();
  out["successful_iterations"] = r.successful_count;
  out["unsuccessful_iterations"] = r.unsuccessful_count;
  out["meo_calls"] = r.meo_calls;
  out["counters"] = counters_to_json(r.counters);
  out["hvp_setup"] = r.setup_hvp;
  out["hvp_final"] = r.final_hvp;
  out["M_used"] = r.M_used ? ordered_json(*r.M_used) : ordered_json(nullptr);
  if (options.timing) out["wall_ms"] = cell.wall_ms;
  if (options.history) {
    ordered_json hist = ordered_json::array();
    for (const auto& rec : r.history) hist.push_back(record_to_json(rec));
    out["history"] = std::move(hist);
  }
  return out;
}

std::string summary_csv_header() {
  return "problem,n,variant,eps_g,eps_H,seed,status,iters,succ_iters,f_evals,"
         "g_evals,hvp_cg,hvp_meo,hvp_total,f_final,grad_norm_final,wall_ms";
}

std::string summary_csv_row(const CellResult& cell, const RunOptions& options) {
  const SolveReport& r = cell.report;
  std::ostringstream row;
  row << cell.problem.name() << ',' << cell.problem.n << ',' << cell.variant
      << ',' << format_double(cell.eps_g) << ',' << format_double(cell.eps_H)
      << ',' << cell.seed << ','
      << (cell.error.empty() ? std::string(to_string(r.status)) : "Error") << ','
      << r.history.size() << ',' << r.successful_count << ','
      << r.counters.f_evals << ',' << r.counters.g_evals << ','
      << r.counters.hvp_cg << ',' << r.counters.hvp_meo << ','
      << r.counters.total_hvp() << ',' << format_double(r.f_final) << ','
      << format_double(r.grad_norm_final) << ',';
  if (options.timing) row << format_double(cell.wall_ms);
  return row.str();
}

std::vector<CellResult> run_suite(const RunConfig& config,
                                  const RunOptions& options) {
  config.validate();
  if (options.jobs < 1) throw ConfigurationError("jobs must be >= 1");

  std::vector<CellResult> cells;
  for (const auto& problem : config.problems) {
    for (const auto& variant : config.variants) {
      for (const auto& [eg, eh] : config.tolerance_pairs) {
        for (const auto seed : config.seeds) {
          CellResult cell;
          cell.index = cells.size();
          cell.problem = problem;
          cell.variant = variant;
          cell.eps_g = eg;
          cell.eps_H = eh;
          cell.seed = seed;
          cells.push_back(std::move(cell));
        }
      }
    }
  }

  const bool write = !config.output_dir.empty();
  const auto cell_dir = config.output_dir / "cells";
  if (write) {
    std::error_code ec;
    std::filesystem::create_directories(cell_dir, ec);
    if (ec) {
      throw IoError("cannot create '" + cell_dir.string() + "': " + ec.message());
    }
  }

  std::mutex writer;
  std::atomic<std::size_t> next{0};
  std::exception_ptr io_failure;

  auto work = [&] {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= cells.size()) return;
      CellResult& cell = cells[i];
      const Variant variant = variant_preset(cell.variant);
      const auto start = std::chrono::steady_clock::now();
      try {
        cell.params = cell_params(variant, config, cell.eps_g, cell.eps_H, cell.seed);
        const SolverParams& params = cell.params;
        const Problem problem = make_problem(cell.problem);
        const Vector x0 = cell.problem.start();
        cell.report = variant.exact ? solve_exact(problem, x0, params)
                                    : solve_newton_cg(problem, x0, params);
      } catch (const std::exception& e) {
        cell.error = e.what();
      }
      cell.wall_ms = std::chrono::duration<double, std::milli>(
                         std::chrono::steady_clock::now() - start)
                         .count();
      if (write) {
        const std::string text = cell_to_json(cell, options).dump(2) + "\n";
        std::lock_guard lock(writer);
        try {
          write_text(cell_dir / cell_file_name(cell), text);
        } catch (...) {
          if (!io_failure) io_failure = std::current_exception();
        }
      }
    }
  };

  const int jobs = std::min<int>(options.jobs, static_cast<int>(cells.size()));
  if (jobs <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int j = 0; j < jobs; ++j) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  if (io_failure) std::rethrow_exception(io_failure);

  if (write) {
    std::string csv = summary_csv_header() + "\n";
    for (const auto& cell : cells) csv += summary_csv_row(cell, options) + "\n";
    write_text(config.output_dir / "summary.csv", csv);
  }
  return cells;
}

}  // namespace trn

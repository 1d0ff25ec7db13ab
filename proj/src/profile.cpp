#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

#include "trn/errors.hpp"
#include "trn/harness.hpp"

namespace trn {
namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace

ProfileMetric profile_metric_from_string(const std::string& name) {
  if (name == "iters") return ProfileMetric::iterations;
  if (name == "gevals") return ProfileMetric::g_evals;
  if (name == "hvp") return ProfileMetric::hvp_total;
  throw ConfigurationError("unknown profile metric '" + name +
                           "' (expected iters, gevals or hvp)");
}

std::string_view to_string(ProfileMetric metric) {
  switch (metric) {
    case ProfileMetric::iterations: return "iters";
    case ProfileMetric::g_evals: return "gevals";
    case ProfileMetric::hvp_total: return "hvp";
  }
  return "?";
}

ProfileTable performance_profile(const std::vector<std::vector<double>>& values,
                                 double tau_max) {
  if (!(tau_max >= 1.0)) throw PreconditionViolation("tau_max must be >= 1");
  ProfileTable table;
  table.values = values;
  const std::size_t n_variants = values.empty() ? 0 : values.front().size();

  std::vector<std::vector<double>> ratios;
  for (const auto& row : values) {
    if (row.size() != n_variants) {
      throw PreconditionViolation("profile rows have different lengths");
    }
    double best = kFailed;
    for (double v : row) {
      if (!(v > 0.0)) throw PreconditionViolation("profile values must be positive");
      best = std::min(best, v);
    }
    if (std::isinf(best)) {
      ++table.excluded_problems;
      continue;
    }
    std::vector<double> r;
    for (double v : row) r.push_back(v / best);
    ratios.push_back(std::move(r));
  }

  std::vector<double> grid{1.0, tau_max};
  for (const auto& r : ratios) {
    for (double t : r) {
      if (t <= tau_max) grid.push_back(t);
    }
  }
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  table.tau_grid = grid;

  table.rho_curves.assign(n_variants, std::vector<double>(grid.size(), 0.0));
  if (ratios.empty()) return table;
  const double denom = static_cast<double>(ratios.size());
  for (std::size_t s = 0; s < n_variants; ++s) {
    for (std::size_t i = 0; i < grid.size(); ++i) {
      int count = 0;
      for (const auto& r : ratios) {
        if (r[s] <= grid[i]) ++count;
      }
      table.rho_curves[s][i] = count / denom;
    }
  }
  return table;
}

ProfileTable profile_from_csv(const std::filesystem::path& csv,
                              ProfileMetric metric, double tau_max) {
  std::ifstream in(csv);
  if (!in) throw IoError("cannot read '" + csv.string() + "'");
  std::string line;
  if (!std::getline(in, line)) throw IoError("'" + csv.string() + "' is empty");
  const auto header = split_csv_line(line);
  auto column = [&](const std::string& name) {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) {
      throw ConfigurationError("summary CSV lacks column '" + name + "'");
    }
    return static_cast<std::size_t>(it - header.begin());
  };
  const std::size_t c_problem = column("problem"), c_variant = column("variant"),
                    c_eg = column("eps_g"), c_eh = column("eps_H"),
                    c_seed = column("seed"), c_status = column("status");
  const std::size_t c_metric = column(metric == ProfileMetric::iterations ? "iters"
                                      : metric == ProfileMetric::g_evals ? "g_evals"
                                                                         : "hvp_total");

  std::vector<std::string> keys, variants;
  std::map<std::string, std::size_t> key_index, variant_index;
  std::map<std::pair<std::size_t, std::size_t>, double> cells;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() < header.size()) {
      throw ConfigurationError("short row in summary CSV: " + line);
    }
    const std::string key = f[c_problem] + "|" + f[c_eg] + "|" + f[c_eh] + "|" + f[c_seed];
    if (!key_index.count(key)) {
      key_index[key] = keys.size();
      keys.push_back(key);
    }
    if (!variant_index.count(f[c_variant])) {
      variant_index[f[c_variant]] = variants.size();
      variants.push_back(f[c_variant]);
    }
    double v = kFailed;
    if (f[c_status] == "SecondOrderStationary") {
      v = std::max(1.0, std::stod(f[c_metric]));
    }
    cells[{key_index[key], variant_index[f[c_variant]]}] = v;
  }

  std::vector<std::vector<double>> values(keys.size(),
                                          std::vector<double>(variants.size(), kFailed));
  for (const auto& [pos, v] : cells) values[pos.first][pos.second] = v;
  ProfileTable table = performance_profile(values, tau_max);
  table.metric = metric;
  table.problems = keys;
  table.variants = variants;
  return table;
}

void write_profile_csv(const ProfileTable& table, std::ostream& out) {
  out << "# metric=" << to_string(table.metric)
      << " problems=" << table.values.size()
      << " excluded=" << table.excluded_problems << "\n";
  out << "tau";
  for (const auto& v : table.variants) out << ',' << v;
  out << "\n";
  char buf[32];
  for (std::size_t i = 0; i < table.tau_grid.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g", table.tau_grid[i]);
    out << buf;
    for (const auto& curve : table.rho_curves) {
      std::snprintf(buf, sizeof buf, "%.17g", curve[i]);
      out << ',' << buf;
    }
    out << "\n";
  }
}

}  // namespace trn

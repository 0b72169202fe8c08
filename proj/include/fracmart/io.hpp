#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "fracmart/bellman_dp.hpp"
#include "fracmart/bracket.hpp"
#include "fracmart/cancellation.hpp"
#include "fracmart/context.hpp"
#include "fracmart/lemmas.hpp"
#include "fracmart/martingale.hpp"
#include "fracmart/search.hpp"
#include "fracmart/supersolution.hpp"
#include "fracmart/transform.hpp"

namespace fracmart {

using json = nlohmann::json;

inline constexpr const char* kToolVersion = "0.4.0";

/// Malformed input files and configs; the CLI maps this to exit code 2.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << v;
  return os.str();
}

/// Object keys are sorted by nlohmann::json, so dump() is canonical.
inline std::string config_hash(const json& config) { return hex64(fnv1a64(config.dump())); }

inline json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

inline void write_text_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << text;
}

inline void write_json_file(const std::filesystem::path& path, const json& j) { write_text_file(path, j.dump(2) + "\n"); }

/// Report header every machine-readable output carries.
inline json report_header(const std::string& task, const json& config, std::uint64_t seed) {
  return json{{"task", task}, {"tool_version", kToolVersion}, {"config_hash", config_hash(config)}, {"seed", seed}};
}

// Non-finite doubles become null in JSON.
inline json num(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

template <class T>
T get_or(const json& j, const char* key, T fallback) {
  if (!j.contains(key) || j[key].is_null()) return fallback;
  try {
    return j[key].get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("field '") + key + "': " + e.what());
  }
}

// ---------------------------------------------------------------- instance

/// Operator file: {"m": 3, "ell": 1, "matrix": [[..],..]} for ell = 1, or
/// {"m", "ell", "coefficients": flat [j][channel][i]}. Builtins by name:
/// "cyclic-difference", "zero".
inline Operator operator_from_json(const json& j, int m_hint = 3, int ell_hint = 1) {
  try {
    if (j.is_string()) {
      const auto name = j.get<std::string>();
      if (name == "cyclic-difference") return cyclic_difference_operator(m_hint);
      if (name == "zero") return zero_operator(m_hint, ell_hint);
      throw ConfigError("unknown builtin operator '" + name + "'");
    }
    const int m = j.at("m").get<int>();
    const int ell = j.value("ell", 1);
    std::vector<double> c;
    if (j.contains("matrix")) {
      if (ell != 1) throw ConfigError("operator: 'matrix' form needs ell = 1");
      const auto rows = j.at("matrix").get<std::vector<std::vector<double>>>();
      if (static_cast<int>(rows.size()) != m) throw ConfigError("operator: matrix must have m rows");
      for (const auto& r : rows) {
        if (static_cast<int>(r.size()) != m) throw ConfigError("operator: matrix must have m columns");
        c.insert(c.end(), r.begin(), r.end());
      }
    } else {
      c = j.at("coefficients").get<std::vector<double>>();
    }
    return Operator(m, ell, std::move(c));
  } catch (const json::exception& e) {
    throw ConfigError(std::string("operator: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

inline json operator_to_json(const Operator& T) {
  json j{{"m", T.m()}, {"ell", T.ell()}};
  if (T.ell() == 1) {
    json rows = json::array();
    for (int r = 0; r < T.m(); ++r) {
      json row = json::array();
      for (int i = 0; i < T.m(); ++i) row.push_back(T.coefficient(r, 0, i));
      rows.push_back(row);
    }
    j["matrix"] = rows;
  } else {
    j["coefficients"] = std::vector<double>(T.coefficients().begin(), T.coefficients().end());
  }
  return j;
}

/// Operator given inline, by builtin name, or as a path (relative to base_dir)
/// when the string ends in ".json".
inline Operator resolve_operator(const json& spec, const std::filesystem::path& base_dir, int m, int ell) {
  if (spec.is_string()) {
    const auto s = spec.get<std::string>();
    if (s.size() > 5 && s.ends_with(".json")) {
      std::filesystem::path p(s);
      if (p.is_relative()) p = base_dir / p;
      return operator_from_json(read_json_file(p), m, ell);
    }
  }
  return operator_from_json(spec, m, ell);
}

/// Instance block: {m, ell, p, alpha?, operator, phi}. Missing fields default
/// to the m = 3 example.
struct InstanceSpec {
  int m = 3;
  int ell = 1;
  double p = 2.0;
  std::optional<double> alpha;
  json op = "cyclic-difference";
  std::string phi = "signed-square";

  static InstanceSpec from_json(const json& j) {
    InstanceSpec s;
    if (!j.is_object()) throw ConfigError("instance must be an object");
    s.m = get_or(j, "m", 3);
    s.ell = get_or(j, "ell", 1);
    s.p = get_or(j, "p", 2.0);
    if (j.contains("alpha") && !j["alpha"].is_null()) s.alpha = get_or(j, "alpha", 0.5);
    if (j.contains("operator")) s.op = j["operator"];
    s.phi = get_or<std::string>(j, "phi", "signed-square");
    return s;
  }

  json to_json() const {
    json j{{"m", m}, {"ell", ell}, {"p", p}, {"operator", op}, {"phi", phi}};
    j["alpha"] = alpha ? json(*alpha) : json(nullptr);
    return j;
  }

  InequalityContext context(const std::filesystem::path& base_dir = ".") const {
    Operator T = resolve_operator(op, base_dir, m, ell);
    if (T.m() != m || T.ell() != ell)
      throw ConfigError("instance: operator acts on m = " + std::to_string(T.m()) + ", ell = " + std::to_string(T.ell()) +
                        " but the instance declares m = " + std::to_string(m) + ", ell = " + std::to_string(ell));
    try {
      PhiFunction f = builtin_phi(phi, p, ell);
      return alpha ? InequalityContext(std::move(T), std::move(f), *alpha) : InequalityContext(std::move(T), std::move(f));
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("instance: ") + e.what());
    }
  }
};

// ---------------------------------------------------------------- martingales

inline Martingale martingale_from_json(const json& j) {
  try {
    const int m = j.at("m").get<int>();
    const int depth = j.at("depth").get<int>();
    const int dim = j.value("dim", 1);
    return Martingale(m, depth, dim, j.at("leaves").get<std::vector<double>>());
  } catch (const json::exception& e) {
    throw ConfigError(std::string("martingale: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

inline json martingale_to_json(const Martingale& F) {
  json j{{"m", F.m()}, {"depth", F.depth()},
         {"leaves", std::vector<double>(F.leaves().begin(), F.leaves().end())}};
  if (F.dim() != 1) j["dim"] = F.dim();
  return j;
}

// ---------------------------------------------------------------- reports

inline json to_json(const WeakCancellationReport& r) {
  return json{{"canceling", r.canceling}, {"max_residual", r.max_residual}, {"residuals", r.residuals}, {"images", r.images}};
}

inline json to_json(const PhiCancellationReport& r) {
  return json{{"canceling", r.canceling}, {"max_abs_sum", r.max_abs_sum}, {"sums", r.sums}};
}

inline json to_json(const ScanReport& r) {
  return json{{"lemma", r.lemma}, {"p", r.p}, {"constant", num(r.constant)}, {"samples", r.samples},
              {"seed", r.seed}, {"extremal_point", r.extremal_point}};
}

inline json to_json(const ValidationReport& r) {
  return json{{"samples", r.samples}, {"violations", r.violations}, {"threshold", num(r.threshold)},
              {"worst_ratio", num(r.worst_ratio)}, {"worst_point", r.worst_point}};
}

inline json to_json(const PsiNonnegReport& r) {
  return json{{"samples", r.samples}, {"violations", r.violations}, {"min_value", r.min_value},
              {"max_rel_error", r.max_rel_error}};
}

inline json to_json(const SupersolutionParams& p) {
  return json{{"C1", p.C1}, {"C2", p.C2}, {"branch", branch_name(p.branch)}};
}

inline SupersolutionParams params_from_json(const json& j, double p) {
  SupersolutionParams s;
  try {
    s.C1 = j.at("C1").get<double>();
    s.C2 = j.at("C2").get<double>();
    s.branch = j.contains("branch") ? parse_branch(j["branch"].get<std::string>()) : default_branch(p);
    s.validate(p);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("supersolution parameters: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return s;
}

inline json to_json(const SplitConfiguration& s) { return json{{"y", s.y}, {"x", s.xs}, {"z", s.zs}}; }

inline json to_json(const BoundaryReport& r) {
  return json{{"samples", r.samples}, {"violations", r.violations}, {"min_margin", num(r.min_margin)}};
}

inline json to_json(const VerifyReport& r, std::size_t keep_worst = 10) {
  json worst = json::array();
  for (std::size_t k = 0; k < r.worst.size() && k < keep_worst; ++k) {
    const auto& w = r.worst[k];
    worst.push_back({{"index", w.index}, {"stratum", stratum_name(w.stratum)}, {"gap", w.gap},
                     {"tolerance", w.tolerance}, {"normalized", w.normalized}, {"split", to_json(w.split)}});
  }
  return json{{"pass", r.pass},
              {"verdict", r.pass ? "no violation found in " + std::to_string(r.samples) + " samples" : "violation found"},
              {"cancellation_ok", r.cancellation_ok},
              {"message", r.message},
              {"samples", r.samples},
              {"violations", r.violations},
              {"min_gap", num(r.min_gap)},
              {"min_normalized_gap", num(r.min_normalized_gap)},
              {"boundary", to_json(r.boundary)},
              {"worst", worst}};
}

inline json to_json(const FitResult& r) {
  json j{{"success", r.success}, {"message", r.message}, {"candidates_tried", r.candidates_tried},
         {"max_C1_tried", r.max_C1_tried}, {"max_C2_tried", r.max_C2_tried}, {"train_seed", r.train_seed},
         {"validation_seed", r.validation_seed}};
  j["params"] = r.success ? to_json(r.params) : json(nullptr);
  if (r.validation) j["validation"] = to_json(*r.validation, 3);
  return j;
}

inline json to_json(const SupermartingaleReport& r) {
  return json{{"pass", r.pass},
              {"atoms_checked", r.atoms_checked},
              {"violations", r.violations},
              {"min_decrement", num(r.min_decrement)},
              {"max_component_mismatch", r.max_component_mismatch},
              {"start_value", r.start_value},
              {"phi_value", r.phi_value},
              {"endgame_holds", r.endgame_holds},
              {"process_means", r.process_means}};
}

inline json to_json(const SearchState& s) {
  json restarts = json::array();
  for (const auto& r : s.restarts)
    restarts.push_back({{"restart", r.restart}, {"seed", r.seed}, {"best_ratio", r.best_ratio}, {"accepted", r.accepted},
                        {"depth", r.best.depth()}});
  return json{{"best_ratio", s.best_ratio},
              {"phi_mean", s.phi_mean},
              {"l1", s.l1},
              {"best_restart", s.best_restart},
              {"depth_max", s.config.depth_max},
              {"steps", s.config.steps},
              {"screen", s.config.screen},
              {"schedule", {{"t_start", s.config.t_start}, {"t_end", s.config.t_end}, {"cooling", "geometric"}}},
              {"witness", martingale_to_json(s.witness)},
              {"restarts", restarts}};
}

inline json to_json(const DpIterationStats& s) {
  return json{{"iteration", s.iteration}, {"improved", s.improved}, {"set_cells", s.set_cells},
              {"max_increase", s.max_increase}, {"origin_value", num(s.origin_value)}};
}

inline json to_json(const GridGeometry& g) { return json{{"nx", g.nx}, {"ny", g.ny}, {"ymax", g.ymax}}; }

inline json to_json(const BracketReport& r) {
  json bad = json::array();
  for (const auto& c : r.violations) bad.push_back({{"x", c.x}, {"y", c.y}, {"dp", c.dp}, {"G", c.G}});
  return json{{"pass", r.pass},
              {"cells_checked", r.cells_checked},
              {"sandwich_violations", r.sandwich_violations},
              {"max_normalized_excess", num(r.max_normalized_excess)},
              {"violating_cells", bad},
              {"boundary_cells", r.boundary_cells},
              {"boundary_violations", r.boundary_violations},
              {"z0_max_deviation", r.z0_max_deviation},
              {"lower_search", r.lower_search},
              {"lower_dp", r.lower_dp},
              {"upper", num(r.upper)},
              {"ordered", r.ordered}};
}

// ---------------------------------------------------------------- CSV

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

/// Columns x,y,value,flag; unset cells have an empty value.
inline void write_slice_csv(std::ostream& os, const GridSlice& s) {
  const auto& g = s.geometry;
  os << "x,y,value,flag\n";
  for (int a = 0; a < g.nx; ++a)
    for (int b = 0; b < g.ny; ++b) {
      const std::size_t c = g.index(a, b);
      os << format_double(g.x(a)) << ',' << format_double(g.y(b)) << ',';
      if (s.set(c)) os << format_double(s.values[c]);
      os << ',' << flag_name(s.flags[c]) << '\n';
    }
}

inline GridSlice read_slice_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line != "x,y,value,flag") throw ConfigError("slice csv: expected header x,y,value,flag");
  struct Row {
    double x, y, v;
    CellFlag f;
  };
  std::vector<Row> rows;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) f.push_back(cell);
    if (f.size() == 3 && line.back() == ',') f.push_back("");
    if (f.size() != 4) throw ConfigError("slice csv: bad row '" + line + "'");
    try {
      const CellFlag flag = parse_flag(f[3]);
      rows.push_back({std::stod(f[0]), std::stod(f[1]), flag == CellFlag::Unset ? 0.0 : std::stod(f[2]), flag});
    } catch (const std::exception& e) {
      throw ConfigError("slice csv: bad row '" + line + "': " + e.what());
    }
  }
  if (rows.empty()) throw ConfigError("slice csv: no rows");
  // Rows are x-major; ny is the length of the first x run.
  GridGeometry g;
  int ny = 0;
  while (ny < static_cast<int>(rows.size()) && rows[ny].x == rows[0].x) ++ny;
  if (ny == 0 || rows.size() % ny != 0) throw ConfigError("slice csv: rows do not form a grid");
  g.ny = ny;
  g.nx = static_cast<int>(rows.size() / ny);
  g.ymax = rows[ny - 1].y;
  try {
    g.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("slice csv: ") + e.what());
  }
  GridSlice s(g);
  for (int a = 0; a < g.nx; ++a)
    for (int b = 0; b < g.ny; ++b) {
      const Row& r = rows[g.index(a, b)];
      if (std::abs(r.x - g.x(a)) > 1e-12 || std::abs(r.y - g.y(b)) > 1e-12 * g.ymax)
        throw ConfigError("slice csv: node mismatch at row " + std::to_string(g.index(a, b) + 2));
      s.values[g.index(a, b)] = r.v;
      s.flags[g.index(a, b)] = r.f;
    }
  return s;
}

/// index,stratum,gap,normalized,y,x1..xm,z1..zm (scalar y).
inline void write_worst_csv(std::ostream& os, const std::vector<SplitRecord>& worst, int m) {
  os << "index,stratum,gap,normalized,y";
  for (int j = 1; j <= m; ++j) os << ",x" << j;
  for (int j = 1; j <= m; ++j) os << ",z" << j;
  os << '\n';
  for (const auto& w : worst) {
    os << w.index << ',' << stratum_name(w.stratum) << ',' << format_double(w.gap) << ',' << format_double(w.normalized)
       << ',' << format_double(w.split.y.empty() ? 0.0 : w.split.y[0]);
    for (double v : w.split.xs) os << ',' << format_double(v);
    for (double v : w.split.zs) os << ',' << format_double(v);
    os << '\n';
  }
}

}  // namespace fracmart

#pragma once

// The fracmart command-line tool. run_cli() is the whole program; main() only
// forwards argv, so tests can drive it with string vectors.

#include <CLI11.hpp>

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "fracmart/fracmart.hpp"

namespace fracmart::cli {

namespace fs = std::filesystem;

inline constexpr int kExitPass = 0;
inline constexpr int kExitFail = 1;
inline constexpr int kExitUsage = 2;

inline const char* kSchemaHelp = R"(Files
  run.json     {"instance": {...}, "seed": u64, "threads": n, "task": {...}, "output": {"report": path, ...}}
               Command-line flags override the matching config fields.
  instance     {"m": 3, "ell": 1, "p": 2, "alpha": null|(p-1)/p, "operator": T, "phi": name}
               T is a builtin name ("cyclic-difference", "zero"), a path ending in .json
               (relative to the config file), or an inline operator object.
  operator     {"m": m, "ell": l, "coefficients": [j][channel][i] flattened}
               or, for ell = 1, {"m": m, "matrix": [[T_ji]]}; (T x)_j = sum_i T_ji x_i.
  martingale   {"m": m, "depth": N, "leaves": [...]} with leaves in J-order.
  phi          builtin names signed-square, square, abs-p, signed-power, zero; a leading '-'
               negates. A phi file is {"name": ..., "p": ...}.
  fit.json     report of fit-constants: params {C1, C2, branch}, params_negated, upper_constant, instance.
  witness.json report of search: witness (a martingale), best_ratio, instance.
  slice.csv    x,y,value,flag with flag in {certified, heuristic, unset}; rows ordered x-major.

Every JSON report carries task, tool_version, config_hash, seed, config, instance and pass.
config_hash is FNV-1a 64 over the canonical dump of {command, instance, seed, task}; threads
and output paths are left out because they do not change results.

Exit codes: 0 pass, 1 mathematical failure (a violation was found), 2 usage or config error.
)";

// ---------------------------------------------------------------- run config

struct CommonOptions {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> threads;
  std::string out;
  std::optional<int> m;
  std::optional<double> p;
  std::optional<double> alpha;
  std::string op;
  std::string phi;
};

inline void add_common(CLI::App* sub, CommonOptions& c, bool instance = true) {
  sub->add_option("--config", c.config, "run.json with instance, seed, threads and task blocks");
  sub->add_option("--seed", c.seed, "64-bit seed (default 1)");
  sub->add_option("--threads", c.threads, "worker threads (results do not depend on it)");
  if (instance) {
    sub->add_option("--m", c.m, "branching factor");
    sub->add_option("--p", c.p, "exponent p");
    sub->add_option("--alpha", c.alpha, "transform order, (p-1)/p when omitted");
    sub->add_option("--operator", c.op, "operator: builtin name or .json file");
    sub->add_option("--phi", c.phi, "integrand: builtin name or .json file");
  }
}

struct Run {
  std::string command;
  json instance;  // raw block from config and flags
  json task = json::object();
  fs::path base_dir = ".";
  std::uint64_t seed = 1;
  unsigned threads = 1;
  json output = json::object();

  InstanceSpec spec() const { return InstanceSpec::from_json(instance); }
  InequalityContext context() const { return spec().context(base_dir); }
  Operator op() const {
    const auto s = spec();
    return resolve_operator(s.op, base_dir, s.m, s.ell);
  }

  // Instance with the operator written out, so reports do not depend on file names.
  json resolved_instance() const {
    json j = spec().to_json();
    j["operator"] = operator_to_json(op());
    return j;
  }

  json hashed() const {
    return json{{"command", command}, {"instance", resolved_instance()}, {"seed", seed}, {"task", task}};
  }
};

inline Run load_run(const std::string& command, const CommonOptions& c) {
  Run r;
  r.command = command;
  json cfg = json::object();
  if (!c.config.empty()) {
    cfg = read_json_file(c.config);
    if (!cfg.is_object()) throw ConfigError(c.config + ": run config must be an object");
    r.base_dir = fs::path(c.config).parent_path();
    if (r.base_dir.empty()) r.base_dir = ".";
  }
  r.instance = cfg.value("instance", json::object());
  if (!r.instance.is_object()) throw ConfigError("instance must be an object");
  if (c.m) r.instance["m"] = *c.m;
  if (c.p) r.instance["p"] = *c.p;
  if (c.alpha) r.instance["alpha"] = *c.alpha;
  if (!c.op.empty()) r.instance["operator"] = c.op;
  if (!c.phi.empty()) {
    if (c.phi.ends_with(".json")) {
      fs::path path(c.phi);
      const json f = read_json_file(path.is_relative() && !c.config.empty() ? r.base_dir / path : path);
      r.instance["phi"] = get_or<std::string>(f, "name", "signed-square");
      if (f.contains("p")) r.instance["p"] = f["p"];
    } else {
      r.instance["phi"] = c.phi;
    }
  }
  r.task = cfg.value("task", json::object());
  if (!r.task.is_object()) throw ConfigError("task must be an object");
  r.seed = c.seed ? *c.seed : get_or<std::uint64_t>(cfg, "seed", 1);
  r.threads = c.threads ? *c.threads : get_or<unsigned>(cfg, "threads", 1);
  if (r.threads == 0) r.threads = default_threads();
  r.output = cfg.value("output", json::object());
  if (!c.out.empty()) r.output["report"] = c.out;
  return r;
}

template <class T>
void set_task(Run& r, const char* key, const std::optional<T>& v) {
  if (v) r.task[key] = *v;
}

inline void set_task(Run& r, const char* key, const std::string& v) {
  if (!v.empty()) r.task[key] = v;
}

inline fs::path output_path(const Run& r, const char* key) {
  if (!r.output.contains(key) || r.output[key].is_null()) return {};
  return fs::path(r.output[key].get<std::string>());
}

/// Writes the report (to output.report or `out`) and a one-line summary to `err`.
inline int emit(const Run& r, json body, bool pass, const std::string& summary, std::ostream& out, std::ostream& err) {
  json rep = report_header(r.command, r.hashed(), r.seed);
  rep["config"] = r.hashed();
  rep["instance"] = r.resolved_instance();
  for (auto it = body.begin(); it != body.end(); ++it) rep[it.key()] = it.value();
  rep["pass"] = pass;
  const auto path = output_path(r, "report");
  if (path.empty()) {
    out << rep.dump(2) << "\n";
  } else {
    write_json_file(path, rep);
  }
  err << r.command << ": " << (pass ? "PASS" : "FAIL") << "  " << summary << "\n";
  return pass ? kExitPass : kExitFail;
}

inline std::string fmt(double v) {
  std::ostringstream s;
  s.precision(6);
  s << v;
  return s.str();
}

/// Instance block stored in fit.json or witness.json.
inline json stored_instance(const json& report, const std::string& what) {
  if (!report.is_object() || !report.contains("instance")) throw ConfigError(what + ": no instance block");
  return InstanceSpec::from_json(report["instance"]).to_json();
}

inline SupersolutionParams params_for_sign(const json& fit, bool negated, double p) {
  const char* key = negated ? "params_negated" : "params";
  if (!fit.contains(key) || fit[key].is_null()) throw ConfigError(std::string("constants file has no ") + key);
  return params_from_json(fit[key], p);
}

inline bool parse_sign(const std::string& s) {
  if (s == "plus" || s.empty()) return false;
  if (s == "minus") return true;
  throw ConfigError("sign must be plus or minus, got '" + s + "'");
}

inline InequalityContext signed_context(const InequalityContext& ctx, bool negated) {
  return negated ? ctx.with_phi(ctx.phi().negated()) : ctx;
}

// ---------------------------------------------------------------- subcommands

inline int cmd_check_cancellation(Run& r, std::optional<double> tol, std::ostream& out, std::ostream& err) {
  set_task(r, "tol", tol);
  const double t = get_or(r.task, "tol", kDefaultCancellationTolerance);
  if (t < 0.0) throw ConfigError("tol must be >= 0");
  const auto s = r.spec();
  const auto T = r.op();
  PhiFunction phi = [&] {
    try {
      return builtin_phi(s.phi, s.p, s.ell);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
  }();
  json body = cancellation_task(T, phi, t);
  const bool pass = body["pass"].get<bool>();
  return emit(r, body, pass,
              std::string("weakly canceling: ") + (body["weakly_canceling"].get<bool>() ? "yes" : "no") +
                  ", phi canceling: " + (body["phi_canceling"].get<bool>() ? "yes" : "no"),
              out, err);
}

inline int cmd_transform(Run& r, const std::string& mart, std::ostream& out, std::ostream& err) {
  if (mart.empty()) throw ConfigError("transform: --martingale is required");
  r.task["martingale"] = mart;
  const Martingale F = martingale_from_json(read_json_file(mart));
  if (!r.instance.contains("m")) r.instance["m"] = F.m();
  const auto s = r.spec();
  if (s.m != F.m()) throw ConfigError("transform: martingale has m = " + std::to_string(F.m()));
  const auto T = r.op();
  const double alpha = s.alpha ? *s.alpha : homogeneous_alpha(s.p);
  const auto tr = fractional_transform(F, T, alpha);
  json body{{"alpha", alpha}, {"ell", tr.ell}, {"depth", tr.depth}, {"leaf_values", tr.leaf_values},
            {"levels", transform_levels(F, T, alpha)}, {"expected_abs", expected_abs(F)},
            {"l1_norm", l1_norm(F).sup_norm}};
  if (r.instance.contains("phi")) {
    try {
      const auto phi = builtin_phi(s.phi, s.p, s.ell);
      const auto rr = phi_ratio(F, T, alpha, phi);
      body["phi_mean"] = rr.phi_value;
      body["ratio"] = rr.ratio;
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
  }
  return emit(r, body, true, std::to_string(F.leaf_count()) + " leaves transformed", out, err);
}

struct ScanOptions {
  std::vector<std::string> lemmas;
  std::optional<std::size_t> samples;
  std::optional<std::size_t> validation_samples;
  std::optional<double> eps;
};

inline int cmd_scan(Run& r, const ScanOptions& o, std::ostream& out, std::ostream& err) {
  if (!o.lemmas.empty()) r.task["lemmas"] = o.lemmas;
  set_task(r, "samples", o.samples);
  set_task(r, "validation_samples", o.validation_samples);
  set_task(r, "eps", o.eps);
  const auto s = r.spec();
  json body = lemma_suite(r.op(), s.p, r.task, r.seed, r.threads);
  std::string summary;
  for (auto it = body["lemmas"].begin(); it != body["lemmas"].end(); ++it) {
    const auto& v = it.value();
    summary += it.key() + "=" + (v["pass"].get<bool>() ? "ok" : "FAIL");
    if (v.contains("scan") && v["scan"]["constant"].is_number())
      summary += "(" + fmt(v["scan"]["constant"].get<double>()) + ")";
    summary += " ";
  }
  return emit(r, body, body["pass"].get<bool>(), summary, out, err);
}

struct VerifyOptions {
  std::optional<double> C1;
  std::optional<double> C2;
  std::string branch;
  std::string constants;
  std::string sign;
  std::optional<std::size_t> samples;
  std::optional<int> trials;
  std::string worst_csv;
};

inline int cmd_verify(Run& r, const VerifyOptions& o, std::ostream& out, std::ostream& err) {
  set_task(r, "C1", o.C1);
  set_task(r, "C2", o.C2);
  set_task(r, "branch", o.branch);
  set_task(r, "sign", o.sign);
  set_task(r, "samples", o.samples);
  set_task(r, "supermartingale_trials", o.trials);
  if (!o.worst_csv.empty()) r.output["worst_csv"] = o.worst_csv;
  const bool negated = parse_sign(get_or<std::string>(r.task, "sign", "plus"));
  std::optional<json> fit;
  if (!o.constants.empty()) {
    fit = read_json_file(o.constants);
    if (!r.instance.contains("m") && !r.instance.contains("phi")) r.instance = stored_instance(*fit, o.constants);
    if (stored_instance(*fit, o.constants) != r.resolved_instance())
      throw ConfigError("verify-supersolution: constants were fitted for a different instance");
  }
  const auto ctx = signed_context(r.context(), negated);
  SupersolutionParams params;
  if (r.task.contains("C1") || r.task.contains("C2")) {
    params = params_from_json(r.task, ctx.p());
  } else if (fit) {
    params = params_for_sign(*fit, negated, ctx.p());
    r.task["C1"] = params.C1;
    r.task["C2"] = params.C2;
    r.task["branch"] = branch_name(params.branch);
  } else {
    throw ConfigError("verify-supersolution: give --C1/--C2, task.C1/C2 or --constants fit.json");
  }
  std::vector<SplitRecord> worst;
  json v = verify_task(ctx, params, r.task, r.seed, r.threads, &worst);
  json body{{"sign", negated ? "minus" : "plus"}, {"verify", v}};
  bool pass = v["pass"].get<bool>();
  const int trials = get_or(r.task, "supermartingale_trials", 1000);
  if (trials > 0) {
    json t = r.task;
    t["trials"] = trials;
    const auto sm = supermartingale_suite(ctx, params, t, derive_seed(r.seed, 11));
    pass = pass && sm["pass"].get<bool>();
    body["supermartingale"] = sm;
  }
  if (auto path = output_path(r, "worst_csv"); !path.empty()) {
    std::ostringstream csv;
    write_worst_csv(csv, worst, ctx.m());
    write_text_file(path, csv.str());
  }
  return emit(r, body, pass,
              "C1=" + fmt(params.C1) + " C2=" + fmt(params.C2) + " violations=" + std::to_string(v["violations"].get<std::size_t>()) +
                  " min normalized gap=" + (v["min_normalized_gap"].is_null() ? "n/a" : fmt(v["min_normalized_gap"].get<double>())),
              out, err);
}

struct FitOptions {
  std::optional<std::size_t> train;
  std::optional<std::size_t> validation;
  bool one_sided = false;
};

inline int cmd_fit(Run& r, const FitOptions& o, std::ostream& out, std::ostream& err) {
  set_task(r, "train_samples", o.train);
  set_task(r, "validation_samples", o.validation);
  if (o.one_sided) r.task["two_sided"] = false;
  const auto ctx = r.context();
  json body = fit_task(ctx, r.task, r.seed, r.threads);
  const bool ok = body["success"].get<bool>();
  std::string summary = ok ? "C=" + fmt(body["upper_constant"].get<double>()) : body["plus"]["message"].get<std::string>();
  if (ok && body.contains("params"))
    summary += " (C1=" + fmt(body["params"]["C1"].get<double>()) + ", C2=" + fmt(body["params"]["C2"].get<double>()) + ")";
  return emit(r, body, ok, summary, out, err);
}

struct DpOptions {
  std::string grid;
  std::optional<double> ymax;
  std::optional<int> iters;
  std::string mode;
  std::string sign;
  std::optional<std::size_t> random_splits;
  std::string constants;
  std::string slice_out;
  std::string report;
};

inline int cmd_dp(Run& r, const DpOptions& o, std::ostream& out, std::ostream& err) {
  if (!o.grid.empty()) {
    int nx = 0, ny = 0;
    char comma = 0;
    std::istringstream in(o.grid);
    if (!(in >> nx >> comma >> ny) || comma != ',' || !in.eof())
      throw ConfigError("--grid expects nx,ny, got '" + o.grid + "'");
    r.task["nx"] = nx;
    r.task["ny"] = ny;
  }
  set_task(r, "ymax", o.ymax);
  set_task(r, "iters", o.iters);
  set_task(r, "mode", o.mode);
  set_task(r, "sign", o.sign);
  set_task(r, "random_splits", o.random_splits);
  if (!o.slice_out.empty()) r.output["slice"] = o.slice_out;
  if (!o.report.empty()) r.output["report"] = o.report;
  const bool negated = parse_sign(get_or<std::string>(r.task, "sign", "plus"));
  const auto ctx = signed_context(r.context(), negated);
  auto cfg = dp_config_from(r.task, r.seed, r.threads);
  if (!o.constants.empty()) {
    const json fit = read_json_file(o.constants);
    cfg.surrogate = params_for_sign(fit, negated, ctx.p());
    r.task["surrogate"] = to_json(*cfg.surrogate);
  } else if (r.task.contains("surrogate")) {
    cfg.surrogate = params_from_json(r.task["surrogate"], ctx.p());
  }
  if (cfg.mode == DpMode::Heuristic && !cfg.surrogate)
    throw ConfigError("bellman-dp: heuristic mode needs --constants fit.json for the off-grid surrogate");
  DpResult res = [&] {
    try {
      return dp_run(ctx, cfg);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
  }();
  json body = dp_summary(ctx, res);
  body["sign"] = negated ? "minus" : "plus";
  if (auto path = output_path(r, "slice"); !path.empty()) {
    std::ostringstream csv;
    write_slice_csv(csv, res.final_slice());
    write_text_file(path, csv.str());
    body["slice"] = path.string();
  }
  const bool pass = body["monotone"].get<bool>() && body["witness_max_rel_error"].get<double>() <= 1e-9;
  const auto& last = res.tail.back();
  return emit(r, body, pass,
              "origin value " + fmt(last.origin_value) + " after " + std::to_string(cfg.iters) + " iterations, " +
                  std::to_string(body["set_cells"].get<std::size_t>()) + " cells set",
              out, err);
}

struct SearchOptions {
  std::optional<int> depth_max;
  std::optional<int> restarts;
  std::optional<int> steps;
  bool no_hand_start = false;
};

inline int cmd_search(Run& r, const SearchOptions& o, std::ostream& out, std::ostream& err) {
  set_task(r, "depth_max", o.depth_max);
  set_task(r, "restarts", o.restarts);
  set_task(r, "steps", o.steps);
  if (o.no_hand_start) r.task["hand_start"] = false;
  const auto ctx = r.context();
  const auto cfg = search_config_from(r.task, r.seed, r.threads, ctx.m());
  const SearchState st = [&] {
    try {
      return adversarial_search(ctx, cfg);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
  }();
  json body{{"search", to_json(st)}, {"best_ratio", st.best_ratio}, {"witness", martingale_to_json(st.witness)}};
  return emit(r, body, std::isfinite(st.best_ratio),
              "best ratio " + fmt(st.best_ratio) + " at depth " + std::to_string(st.witness.depth()), out, err);
}

struct BracketOptions {
  std::string dp;
  std::string witness;
  std::string constants;
  std::string sign;
};

inline int cmd_bracket(Run& r, const BracketOptions& o, bool instance_given, std::ostream& out, std::ostream& err) {
  if (o.dp.empty() || o.witness.empty() || o.constants.empty())
    throw ConfigError("bracket: --dp, --witness and --constants are required");
  r.task["dp"] = o.dp;
  r.task["witness"] = o.witness;
  r.task["constants"] = o.constants;
  set_task(r, "sign", o.sign);
  const bool negated = parse_sign(get_or<std::string>(r.task, "sign", "plus"));
  const json fit = read_json_file(o.constants);
  const json wit = read_json_file(o.witness);
  const json fi = stored_instance(fit, o.constants);
  const json wi = stored_instance(wit, o.witness);
  if (fi != wi) throw ConfigError("bracket: witness and constants come from different instances");
  if (instance_given) {
    if (r.resolved_instance() != fi) throw ConfigError("bracket: files do not match the configured instance");
  } else {
    r.instance = fi;
  }
  const auto ctx = signed_context(r.context(), negated);
  std::ifstream csv(o.dp);
  if (!csv) throw ConfigError("cannot open " + o.dp);
  const GridSlice slice = read_slice_csv(csv);
  SearchState st;
  if (!wit.contains("witness")) throw ConfigError(o.witness + ": no witness martingale");
  st.witness = martingale_from_json(wit["witness"]);
  st.best_restart = 0;
  const auto e = evaluate_ratio(ctx, st.witness);
  if (!e) throw ConfigError(o.witness + ": witness has E|F| = 0");
  st.best_ratio = e->ratio;
  st.phi_mean = e->phi_mean;
  st.l1 = e->l1;
  const auto params = params_for_sign(fit, negated, ctx.p());
  std::optional<double> upper;
  if (fit.contains("upper_constant") && fit["upper_constant"].is_number()) upper = fit["upper_constant"].get<double>();
  BracketReport rep = [&] {
    try {
      return bracket_report(ctx, slice, st, params, upper);
    } catch (const std::invalid_argument& e2) {
      throw ConfigError(e2.what());
    }
  }();
  json body{{"sign", negated ? "minus" : "plus"}, {"bracket", to_json(rep)}};
  return emit(r, body, rep.pass,
              "lower " + fmt(std::max(rep.lower_search, rep.lower_dp)) + " <= C <= " + fmt(rep.upper) + ", " +
                  std::to_string(rep.sandwich_violations) + " cells above G",
              out, err);
}

/// Example pipeline at reduced sizes: cancellation, fit, verify, search, dp, bracket.
inline int cmd_demo(Run& r, std::ostream& out, std::ostream& err) {
  const auto ctx = r.context();
  json body;
  const json canc = cancellation_task(ctx.op(), ctx.phi(), 0.0);
  body["cancellation"] = canc;
  json ft = r.task.value("fit", json{{"train_samples", 20000}, {"validation_samples", 20000}});
  const json fit = fit_task(ctx, ft, derive_seed(r.seed, 1), r.threads);
  body["fit"] = fit;
  bool pass = canc["pass"].get<bool>() && fit["success"].get<bool>();
  if (pass) {
    const auto params = params_from_json(fit["params"], ctx.p());
    json vt = r.task.value("verify", json{{"samples", 20000}});
    body["verify"] = verify_task(ctx, params, vt, derive_seed(r.seed, 2), r.threads);
    json st = r.task.value("search", json{{"restarts", 8}, {"steps", 4000}});
    const auto search = adversarial_search(ctx, search_config_from(st, derive_seed(r.seed, 3), r.threads, ctx.m()));
    body["search"] = to_json(search);
    json dt = r.task.value("dp", json{{"nx", 21}, {"ny", 41}, {"ymax", 6.0}, {"iters", 4}});
    const auto dp = dp_run(ctx, dp_config_from(dt, derive_seed(r.seed, 4), r.threads));
    body["dp"] = dp_summary(ctx, dp);
    const double upper = fit["upper_constant"].get<double>();
    const auto br = bracket_report(ctx, dp.final_slice(), search, params, upper);
    body["bracket"] = to_json(br);
    pass = pass && body["verify"]["pass"].get<bool>() && br.pass;
    err << "demo: " << fmt(std::max(br.lower_search, br.lower_dp)) << " <= C(phi) <= " << fmt(upper)
        << "  (search " << fmt(br.lower_search) << ", dp " << fmt(br.lower_dp) << ", supersolution C1="
        << fmt(params.C1) << " C2=" << fmt(params.C2) << ")\n";
  }
  return emit(r, body, pass, pass ? "pipeline complete" : "pipeline stopped early", out, err);
}

// ---------------------------------------------------------------- entry point

inline int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"fracmart: martingale models of Phi-inequalities for fractional transforms", "fracmart"};
  app.footer(kSchemaHelp);
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kToolVersion));

  CommonOptions common;
  std::optional<double> tol;
  std::string mart;
  ScanOptions scan;
  VerifyOptions ver;
  FitOptions fit;
  DpOptions dp;
  SearchOptions se;
  BracketOptions br;

  auto* c_canc = app.add_subcommand("check-cancellation", "weak and Phi cancellation of an operator");
  add_common(c_canc, common);
  c_canc->add_option("--tol", tol, "absolute tolerance (default 1e-10; 0 for exact)");
  c_canc->footer(R"(Report: weakly_canceling, phi_canceling, residuals {weak: |(T D_j)_j|, phi: sum_{i!=j} Phi((T D_j)_i)}.
Exit 1 if either condition fails.)");

  auto* c_tr = app.add_subcommand("transform", "fractional transform of a martingale");
  add_common(c_tr, common);
  c_tr->add_option("--martingale", mart, "martingale .json")->required();
  c_tr->footer("Report: leaf_values ([leaf][channel]), levels, expected_abs, l1_norm; phi_mean and ratio with --phi.");

  auto* c_scan = app.add_subcommand("scan-constants", "scan and validate the lemma constants");
  add_common(c_scan, common);
  c_scan->add_option("--lemma", scan.lemmas, "psi, theta, epsilon, slavin, psi-local, i2, mp-lipschitz (repeatable)");
  c_scan->add_option("--samples", scan.samples, "scan samples (default 1e6)");
  c_scan->add_option("--validation-samples", scan.validation_samples, "fresh validation samples (default = samples)");
  c_scan->add_option("--eps", scan.eps, "epsilon for the epsilon lemma (default 0.5)");
  c_scan->footer(R"(Task block: {lemmas: [...], samples, validation_samples, eps}.
Report: lemmas.<name>.{scan: {lemma, p, constant, samples, seed, extremal_point}, validation, pass}.
Lemma k uses seeds derive(seed, 2k) for the scan and derive(seed, 2k+1) for validation.)");

  auto* c_ver = app.add_subcommand("verify-supersolution", "falsification test of the main inequality");
  add_common(c_ver, common);
  c_ver->add_option("--C1", ver.C1, "constant of the correction term");
  c_ver->add_option("--C2", ver.C2, "constant of the z^p term");
  c_ver->add_option("--branch", ver.branch, "min or sum (default min for p <= 2)");
  c_ver->add_option("--constants", ver.constants, "fit.json to take C1, C2 from");
  c_ver->add_option("--sign", ver.sign, "plus (Phi) or minus (-Phi)");
  c_ver->add_option("--samples", ver.samples, "stratified splits (default 1e5)");
  c_ver->add_option("--supermartingale-trials", ver.trials, "random trees for the process check (default 1000, 0 skips)");
  c_ver->add_option("--worst-csv", ver.worst_csv, "CSV of the worst splits");
  c_ver->add_option("--out", common.out, "report path (default stdout)");
  c_ver->footer(R"(Task block: {C1, C2, branch, sign, samples, keep_worst, require_cancellation, supermartingale_trials}.
Worst CSV: index,stratum,gap,normalized,y,x1..xm,z1..zm.)");

  auto* c_fit = app.add_subcommand("fit-constants", "smallest grid constants passing the main inequality");
  add_common(c_fit, common);
  c_fit->add_option("--train-samples", fit.train, "training splits (default 1e5)");
  c_fit->add_option("--validation-samples", fit.validation, "fresh validation splits (default 1e5)");
  c_fit->add_flag("--one-sided", fit.one_sided, "fit Phi only");
  c_fit->add_option("--out", common.out, "fit.json path (default stdout)");
  c_fit->footer(R"(Task block: {train_samples, validation_samples, c1_min_exp, c1_max_exp, c2_min_exp, c2_max_exp,
require_cancellation, two_sided}. C1 runs over 2^k, C2 over m^{p-1}(1 + C1) 2^j (2^j when C1 = 0).)");

  auto* c_dp = app.add_subcommand("bellman-dp", "value iteration of the main inequality on the z = 1 slice");
  add_common(c_dp, common);
  c_dp->add_option("--grid", dp.grid, "nx,ny (odd, default 41,81)");
  c_dp->add_option("--ymax", dp.ymax, "y range [-Y, Y] (default 8)");
  c_dp->add_option("--iters", dp.iters, "iterations (default 6)");
  c_dp->add_option("--mode", dp.mode, "certified or heuristic");
  c_dp->add_option("--sign", dp.sign, "plus (Phi) or minus (-Phi)");
  c_dp->add_option("--random-splits", dp.random_splits, "heuristic splits per cell and iteration (default 400)");
  c_dp->add_option("--constants", dp.constants, "fit.json, the surrogate beyond the grid in heuristic mode");
  c_dp->add_option("--out", dp.slice_out, "slice CSV path");
  c_dp->add_option("--report", dp.report, "report path (default stdout)");
  c_dp->footer("Task block: {nx, ny, ymax, iters, mode, sign, random_splits, surrogate: {C1, C2}}.");

  auto* c_se = app.add_subcommand("search", "adversarial search for a large ratio");
  add_common(c_se, common);
  c_se->add_option("--depth-max", se.depth_max, "maximal depth (default 4)");
  c_se->add_option("--restarts", se.restarts, "annealing restarts (default 16)");
  c_se->add_option("--steps", se.steps, "steps per restart (default 20000)");
  c_se->add_flag("--no-hand-start", se.no_hand_start, "do not seed restart 0 with leaves (1,-1,0)");
  c_se->add_option("--out", common.out, "witness.json path (default stdout)");
  c_se->footer("Task block: {depth_max, restarts, steps, t_start, t_end, refine_probability, screen, hand_start}.");

  auto* c_br = app.add_subcommand("bracket", "check the dp slice, witness and constants against each other");
  add_common(c_br, common);
  c_br->add_option("--dp", br.dp, "slice CSV from bellman-dp")->required();
  c_br->add_option("--witness", br.witness, "witness.json from search")->required();
  c_br->add_option("--constants", br.constants, "fit.json from fit-constants")->required();
  c_br->add_option("--sign", br.sign, "sign the slice was computed for");
  c_br->add_option("--out", common.out, "report path (default stdout)");
  c_br->footer("Fails (exit 1) if a certified dp value exceeds G, or the bounds are out of order.");

  auto* c_demo = app.add_subcommand("demo", "the example pipeline end to end");
  add_common(c_demo, common);
  c_demo->add_option("--out", common.out, "report path (default stdout)");
  c_demo->footer("Task block: {fit: {...}, verify: {...}, search: {...}, dp: {...}} with the blocks above.");

  for (auto* s : {c_canc, c_tr, c_scan})
    if (s != nullptr) s->add_option("--out", common.out, "report path (default stdout)");

  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      app.exit(e, out, err);
      return kExitPass;
    }
    err << "fracmart: " << e.what() << "\n";
    err << "run 'fracmart --help' for usage\n";
    return kExitUsage;
  }

  CLI::App* sub = app.get_subcommands().front();
  try {
    Run r = load_run(sub->get_name(), common);
    const bool instance_given = !common.config.empty() || common.m || common.p || !common.op.empty() || !common.phi.empty();
    if (sub == c_canc) return cmd_check_cancellation(r, tol, out, err);
    if (sub == c_tr) return cmd_transform(r, mart, out, err);
    if (sub == c_scan) return cmd_scan(r, scan, out, err);
    if (sub == c_ver) return cmd_verify(r, ver, out, err);
    if (sub == c_fit) return cmd_fit(r, fit, out, err);
    if (sub == c_dp) return cmd_dp(r, dp, out, err);
    if (sub == c_se) return cmd_search(r, se, out, err);
    if (sub == c_br) return cmd_bracket(r, br, instance_given, out, err);
    if (sub == c_demo) return cmd_demo(r, out, err);
  } catch (const ConfigError& e) {
    err << "fracmart " << sub->get_name() << ": " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    err << "fracmart " << sub->get_name() << ": " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}

}  // namespace fracmart::cli

#pragma once

// Task runners shared by the command-line tool and the acceptance suite. Each
// takes the instance, a task block (missing fields take the defaults listed in
// the tool's help) and a seed, and returns the JSON report body.

#include <cmath>
#include <algorithm>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "fracmart/bellman_dp.hpp"
#include "fracmart/bracket.hpp"
#include "fracmart/cancellation.hpp"
#include "fracmart/context.hpp"
#include "fracmart/io.hpp"
#include "fracmart/lemmas.hpp"
#include "fracmart/sampling.hpp"
#include "fracmart/search.hpp"
#include "fracmart/special_functions.hpp"
#include "fracmart/supersolution.hpp"
#include "fracmart/transform.hpp"

namespace fracmart {

// ---------------------------------------------------------------- cancellation

inline json cancellation_task(const Operator& T, const PhiFunction& phi, double tol) {
  const auto wc = check_weak_cancellation(T, tol);
  const auto pc = check_phi_cancellation(T, phi, tol);
  return json{{"tolerance", tol},
              {"weakly_canceling", wc.canceling},
              {"phi_canceling", pc.canceling},
              {"residuals", json{{"weak", wc.residuals}, {"phi", pc.sums}}},
              {"weak", to_json(wc)},
              {"phi", to_json(pc)},
              {"phi_name", phi.name()},
              {"pass", wc.canceling && pc.canceling}};
}

/// Ratio of iterated delta refinements per depth, plus the smallest increment.
inline json necessity_probe(const InequalityContext& ctx, int max_depth) {
  const auto r = delta_refinement_ratios(ctx.op(), ctx.phi(), ctx.alpha(), max_depth);
  double min_inc = std::numeric_limits<double>::infinity();
  double prev = 0.0;
  for (double v : r) {
    min_inc = std::min(min_inc, v - prev);
    prev = v;
  }
  return json{{"ratios", r}, {"min_increment", num(min_inc)}};
}

// ---------------------------------------------------------------- lemma suite

/// Lemma names: psi, theta, epsilon, slavin, psi-local, i2, mp-lipschitz.
inline json lemma_suite(const Operator& T, double p, const json& task, std::uint64_t seed, unsigned threads) {
  const auto lemmas = get_or<std::vector<std::string>>(task, "lemmas", {"psi", "theta", "epsilon", "slavin"});
  const auto samples = get_or<std::size_t>(task, "samples", 1000000);
  const auto vsamples = get_or<std::size_t>(task, "validation_samples", samples);
  const double eps = get_or(task, "eps", 0.5);
  const int m = T.m();
  json out = json::object();
  bool all = true;
  std::uint64_t k = 0;
  for (const auto& name : lemmas) {
    const std::uint64_t s_scan = derive_seed(seed, 2 * k);
    const std::uint64_t s_val = derive_seed(seed, 2 * k + 1);
    ++k;
    json r;
    bool pass = false;
    if (name == "psi") {
      const auto rep = check_psi_nonnegative(m, p, samples, s_scan, threads);
      bool unit_zero = true;
      for (int j = 0; j < m; ++j) {
        std::vector<double> e(m, 0.0);
        e[j] = 1.0;
        unit_zero = unit_zero && psi(e, p) == 0.0;
      }
      r = {{"nonnegativity", to_json(rep)}, {"unit_vectors_exact_zero", unit_zero}};
      pass = rep.violations == 0 && unit_zero;
    } else if (name == "theta") {
      if (p > 2.0) {
        r = {{"skipped", "needs p <= 2"}};
        pass = true;
      } else {
        const auto sc = theta_lemma_constant(p, samples, s_scan, threads);
        const auto va = validate_theta_lemma(p, sc.constant, vsamples, s_val, threads);
        r = {{"scan", to_json(sc)}, {"validation", to_json(va)}};
        pass = va.violations == 0;
      }
    } else if (name == "epsilon") {
      const auto sc = epsilon_constant(p, eps, samples, s_scan, threads);
      const auto va = validate_epsilon_lemma(p, eps, sc.constant, vsamples, s_val, threads);
      r = {{"eps", eps}, {"scan", to_json(sc)}, {"validation", to_json(va)}};
      pass = va.violations == 0;
    } else if (name == "slavin") {
      const auto sc = slavin_constant(samples, s_scan, threads);
      const auto va = validate_slavin(vsamples, s_val, threads);
      r = {{"constant", 2.0}, {"scan", to_json(sc)}, {"validation", to_json(va)}};
      pass = va.violations == 0 && sc.constant <= 2.0 * (1.0 + 1e-12);
    } else if (name == "psi-local") {
      const auto sc = psi_local_constant(m, p, samples, s_scan, 0.1, threads);
      const double c = sc.constant * (1.0 - 1e-6);
      const auto va = validate_psi_local(m, p, c, vsamples, s_val, 0.1, threads);
      r = {{"scan", to_json(sc)}, {"validated_constant", c}, {"validation", to_json(va)}};
      pass = va.violations == 0;
    } else if (name == "i2") {
      const auto sc = i2_constant(T, p, samples, s_scan, false, threads);
      const auto va = validate_i2(T, p, sc.constant, vsamples, s_val, false, threads);
      r = {{"scan", to_json(sc)}, {"validation", to_json(va)}};
      pass = va.violations == 0;
    } else if (name == "mp-lipschitz") {
      const auto sc = mp_lipschitz_constant(p, samples, s_scan, 2.0, threads);
      r = {{"scan", to_json(sc)}, {"analytic_bound", std::pow(2.0, p - 1.0)}};
      pass = sc.constant <= std::pow(2.0, p - 1.0) * (1.0 + 1e-12);
    } else {
      throw ConfigError("scan-constants: unknown lemma '" + name + "'");
    }
    r["pass"] = pass;
    all = all && pass;
    out[name] = r;
  }
  return json{{"p", p}, {"m", m}, {"samples", samples}, {"validation_samples", vsamples}, {"lemmas", out}, {"pass", all}};
}

// ---------------------------------------------------------------- supersolution

inline FitConfig fit_config_from(const json& task, std::uint64_t seed, unsigned threads) {
  FitConfig c;
  c.train_samples = get_or<std::size_t>(task, "train_samples", 100000);
  c.validation_samples = get_or<std::size_t>(task, "validation_samples", 100000);
  c.c1_min_exp = get_or(task, "c1_min_exp", -4);
  c.c1_max_exp = get_or(task, "c1_max_exp", 20);
  c.c2_min_exp = get_or(task, "c2_min_exp", -8);
  c.c2_max_exp = get_or(task, "c2_max_exp", 24);
  c.require_cancellation = get_or(task, "require_cancellation", true);
  c.seed = seed;
  c.threads = threads;
  return c;
}

/// Fits Φ and -Φ. `params` in the report belong to Φ, `params_negated` to -Φ.
inline json fit_task(const InequalityContext& ctx, const json& task, std::uint64_t seed, unsigned threads) {
  const auto cfg = fit_config_from(task, seed, threads);
  const bool two_sided = get_or(task, "two_sided", true);
  json j;
  if (two_sided) {
    const auto t = fit_two_sided(ctx, cfg);
    j = {{"two_sided", true}, {"plus", to_json(t.plus)}, {"minus", to_json(t.minus)}, {"success", t.success},
         {"upper_constant", num(t.upper_constant)}};
    j["params"] = t.plus.success ? to_json(t.plus.params) : json(nullptr);
    j["params_negated"] = t.minus.success ? to_json(t.minus.params) : json(nullptr);
  } else {
    const auto f = fit_constants(ctx, cfg);
    j = {{"two_sided", false}, {"plus", to_json(f)}, {"success", f.success}};
    j["params"] = f.success ? to_json(f.params) : json(nullptr);
    j["upper_constant"] = f.success ? num(Supersolution(ctx, f.params).upper_constant()) : json(nullptr);
  }
  return j;
}

inline json verify_task(const InequalityContext& ctx, const SupersolutionParams& params, const json& task,
                        std::uint64_t seed, unsigned threads, std::vector<SplitRecord>* worst_out = nullptr) {
  VerifyConfig c;
  c.samples = get_or<std::size_t>(task, "samples", 100000);
  c.require_cancellation = get_or(task, "require_cancellation", true);
  c.keep_worst = get_or<std::size_t>(task, "keep_worst", 100);
  c.seed = seed;
  c.threads = threads;
  const auto r = verify_supersolution(Supersolution(ctx, params), c);
  if (worst_out) *worst_out = r.worst;
  json j = to_json(r, get_or<std::size_t>(task, "report_worst", 10));
  j["params"] = to_json(params);
  return j;
}

/// Supermartingale property of the process on random trees of depth <= depth_max.
inline json supermartingale_suite(const InequalityContext& ctx, const SupersolutionParams& params, const json& task,
                                  std::uint64_t seed) {
  const int trials = get_or(task, "trials", 1000);
  const int depth_max = get_or(task, "depth_max", 3);
  const Supersolution G(ctx, params);
  Rng rng(seed);
  int failures = 0;
  int endgame_failures = 0;
  std::size_t atoms = 0;
  double min_norm_dec = std::numeric_limits<double>::infinity();
  double mismatch = 0.0;
  for (int t = 0; t < trials; ++t) {
    const auto F = random_martingale(ctx.m(), 1 + rng.index(depth_max), rng);
    const double y0 = rng.bernoulli(0.5) ? 0.0 : rng.normal();
    const auto r = supermartingale_check(G, F, y0);
    atoms += r.atoms_checked;
    if (!r.pass) ++failures;
    if (!r.endgame_holds) ++endgame_failures;
    const double scale = std::abs(r.start_value) + 1e-300;
    min_norm_dec = std::min(min_norm_dec, r.min_decrement / scale);
    mismatch = std::max(mismatch, r.max_component_mismatch);
  }
  return json{{"trials", trials},         {"depth_max", depth_max},
              {"atoms_checked", atoms},   {"failures", failures},
              {"endgame_failures", endgame_failures},
              {"min_normalized_decrement", num(min_norm_dec)},
              {"max_component_mismatch", mismatch},
              {"pass", failures == 0}};
}

/// |EΦ(𝕋_α F)| <= C (E|F_∞|)^p on random simple martingales.
inline json sandwich_task(const InequalityContext& ctx, double C, const json& task, std::uint64_t seed) {
  const int trials = get_or(task, "trials", 10000);
  const int depth_max = get_or(task, "depth_max", 4);
  Rng rng(seed);
  int violations = 0;
  double max_ratio = 0.0;
  for (int t = 0; t < trials; ++t) {
    const auto F = random_martingale(ctx.m(), 1 + rng.index(depth_max), rng);
    const auto e = evaluate_ratio(ctx, F);
    if (!e) continue;
    max_ratio = std::max(max_ratio, e->ratio);
    if (e->ratio > C * (1.0 + 1e-12)) ++violations;
  }
  return json{{"trials", trials}, {"depth_max", depth_max}, {"constant", num(C)}, {"max_ratio", max_ratio},
              {"violations", violations}, {"pass", violations == 0 && std::isfinite(C)}};
}

// ---------------------------------------------------------------- dp and search

inline DpConfig dp_config_from(const json& task, std::uint64_t seed, unsigned threads) {
  DpConfig c;
  c.geometry.nx = get_or(task, "nx", 41);
  c.geometry.ny = get_or(task, "ny", 81);
  c.geometry.ymax = get_or(task, "ymax", 8.0);
  c.iters = get_or(task, "iters", 6);
  c.mode = parse_dp_mode(get_or<std::string>(task, "mode", "certified"));
  c.random_splits = get_or<std::size_t>(task, "random_splits", 400);
  c.seed = seed;
  c.threads = threads;
  try {
    c.geometry.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return c;
}

/// Runs the dp and summarizes it. Witnesses of `witness_checks` evenly spaced
/// certified cells are rebuilt and re-evaluated through the transform.
inline json dp_summary(const InequalityContext& ctx, const DpResult& r, int witness_checks = 25) {
  const auto& g = r.config.geometry;
  const auto& fin = r.final_slice();
  json tail = json::array();
  for (const auto& s : r.tail) tail.push_back(to_json(s));
  bool monotone = true;
  for (std::size_t it = 1; it < r.history.size(); ++it)
    for (std::size_t c = 0; c < g.cells(); ++c) {
      if (!r.history[it - 1].set(c)) continue;
      if (!r.history[it].set(c) || r.history[it].values[c] < r.history[it - 1].values[c]) monotone = false;
    }
  std::size_t certified = 0;
  for (auto f : fin.flags) certified += f == CellFlag::Certified;
  double max_err = 0.0;
  int checked = 0;
  if (certified > 0 && witness_checks > 0) {
    const std::size_t stride = std::max<std::size_t>(1, g.cells() / static_cast<std::size_t>(witness_checks));
    for (std::size_t c = 0; c < g.cells(); c += stride) {
      if (fin.flags[c] != CellFlag::Certified) continue;
      const auto F = materialize_witness(r, c, static_cast<int>(r.history.size()) - 1);
      const double y = g.y(static_cast<int>(c % g.ny));
      const double v = phi_functional(F, ctx.op(), ctx.alpha(), ctx.phi(), y);
      max_err = std::max(max_err, std::abs(v - fin.values[c]) / (1.0 + std::abs(v)));
      ++checked;
    }
  }
  double lower = -std::numeric_limits<double>::infinity();
  for (int a = 0; a < g.nx; ++a) {
    const auto c = g.index(a, g.ny / 2);
    if (fin.set(c)) lower = std::max(lower, fin.values[c]);
  }
  return json{{"geometry", to_json(g)},
              {"iters", r.config.iters},
              {"mode", dp_mode_name(r.config.mode)},
              {"phi", ctx.phi().name()},
              {"tail", tail},
              {"monotone", monotone},
              {"set_cells", fin.set_count()},
              {"certified_cells", certified},
              {"witness_checks", checked},
              {"witness_max_rel_error", max_err},
              {"max_x_value_at_y0", num(lower)}};
}

inline SearchConfig search_config_from(const json& task, std::uint64_t seed, unsigned threads, int m = 3) {
  SearchConfig c;
  c.depth_max = get_or(task, "depth_max", 4);
  c.restarts = get_or(task, "restarts", 16);
  c.steps = get_or(task, "steps", 20000);
  c.t_start = get_or(task, "t_start", 0.05);
  c.t_end = get_or(task, "t_end", 1e-4);
  c.refine_probability = get_or(task, "refine_probability", 0.1);
  c.screen = get_or(task, "screen", 256);
  c.seed = seed;
  c.threads = threads;
  try {
    c.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  if (get_or(task, "hand_start", true)) c = with_hand_start(c, m);
  return c;
}

}  // namespace fracmart

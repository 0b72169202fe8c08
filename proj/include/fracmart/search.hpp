#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

#include "fracmart/context.hpp"
#include "fracmart/martingale.hpp"
#include "fracmart/parallel.hpp"
#include "fracmart/rng.hpp"
#include "fracmart/sampling.hpp"
#include "fracmart/transform.hpp"

namespace fracmart {

struct SearchConfig {
  int depth_max = 4;
  int restarts = 16;
  int steps = 20000;           // annealing steps per restart
  double t_start = 0.05;      // temperature on the ratio scale
  double t_end = 1e-4;
  double refine_probability = 0.1;
  int screen = 256;  // random draws screened for the start of an unseeded restart
  std::uint64_t seed = 1;
  unsigned threads = 1;
  std::vector<Martingale> starts;  // optional extra starting points, used by the first restarts

  void validate() const {
    if (depth_max < 1) throw std::invalid_argument("search: depth_max must be >= 1");
    if (restarts < 1) throw std::invalid_argument("search: restarts must be >= 1");
    if (steps < 0) throw std::invalid_argument("search: steps must be >= 0");
    if (screen < 1) throw std::invalid_argument("search: screen must be >= 1");
    if (!(t_start > 0.0) || !(t_end > 0.0) || t_end > t_start)
      throw std::invalid_argument("search: need 0 < t_end <= t_start");
  }
};

/// |EΦ(𝕋_α[F])| / (E|F_∞|)^p, or nullopt for E|F_∞| = 0.
struct RatioEvaluation {
  double ratio = 0.0;
  double phi_mean = 0.0;
  double l1 = 0.0;
};

inline std::optional<RatioEvaluation> evaluate_ratio(const InequalityContext& ctx, const Martingale& F) {
  const double l1 = expected_abs(F);
  if (!(l1 > 0.0)) return std::nullopt;
  RatioEvaluation e;
  e.l1 = l1;
  e.phi_mean = phi_functional(F, ctx.op(), ctx.alpha(), ctx.phi());
  e.ratio = std::abs(e.phi_mean) / std::pow(l1, ctx.p());
  return e;
}

struct RestartOutcome {
  int restart = 0;
  std::uint64_t seed = 0;
  double best_ratio = 0.0;
  Martingale best = Martingale::constant(2, 0.0);
  std::size_t accepted = 0;
};

struct SearchState {
  SearchConfig config;
  double best_ratio = 0.0;
  double phi_mean = 0.0;   // signed EΦ of the witness
  double l1 = 0.0;         // E|F_∞| of the witness
  int best_restart = -1;
  Martingale witness = Martingale::constant(2, 0.0);
  std::vector<RestartOutcome> restarts;
};

/// The depth-1 split (1, -1, 0) of the example, ratio 1/2 there.
inline Martingale hand_witness(int m = 3) {
  std::vector<double> v(m, 0.0);
  v[0] = 1.0;
  v[1] = -1.0;
  return Martingale::scalar(m, 1, std::move(v));
}

namespace detail {

inline Martingale normalized_l1(const Martingale& F) {
  const double l1 = expected_abs(F);
  return l1 > 0.0 ? F.scaled(1.0 / l1) : F;
}

inline Martingale perturb_leaf(const Martingale& F, double sigma, Rng& rng) {
  std::vector<double> v(F.leaves().begin(), F.leaves().end());
  v[static_cast<std::size_t>(rng.index(static_cast<int>(v.size())))] += sigma * rng.normal();
  return Martingale::scalar(F.m(), F.depth(), std::move(v));
}

// Splits one leaf into m children with a zero-sum perturbation; the rest of
// the tree is refined by constants.
inline Martingale refine_leaf(const Martingale& F, double sigma, Rng& rng) {
  const Martingale R = refine_constant(F);
  std::vector<double> v(R.leaves().begin(), R.leaves().end());
  const std::size_t m = static_cast<std::size_t>(F.m());
  const std::size_t atom = static_cast<std::size_t>(rng.index(static_cast<int>(F.leaf_count())));
  std::vector<double> d(m);
  double mean = 0.0;
  for (auto& x : d) mean += (x = sigma * rng.normal());
  mean /= static_cast<double>(m);
  for (std::size_t j = 0; j < m; ++j) v[atom * m + j] += d[j] - mean;
  return Martingale::scalar(F.m(), R.depth(), std::move(v));
}

inline RestartOutcome anneal(const InequalityContext& ctx, const SearchConfig& cfg, int restart) {
  RestartOutcome out;
  out.restart = restart;
  out.seed = derive_seed(cfg.seed, static_cast<std::uint64_t>(restart));
  Rng rng(out.seed);
  const int m = ctx.m();
  Martingale cur = Martingale::constant(m, 0.0);
  if (restart < static_cast<int>(cfg.starts.size())) {
    cur = cfg.starts[static_cast<std::size_t>(restart)];
    if (cur.m() != m || cur.dim() != 1) throw std::invalid_argument("search: starting martingale does not match instance");
    if (cur.depth() > cfg.depth_max) throw std::invalid_argument("search: starting martingale is deeper than depth_max");
  }
  auto score = [&](const Martingale& F) {
    const auto e = evaluate_ratio(ctx, F);
    return e ? e->ratio : -1.0;
  };
  if (restart >= static_cast<int>(cfg.starts.size())) {
    // Sparse configurations are hard to reach by local moves, so start from
    // the best of a batch of draws from all sampler families.
    double best = -2.0;
    for (int k = 0; k < cfg.screen; ++k) {
      Martingale F = random_martingale(m, 1 + rng.index(cfg.depth_max), rng);
      const double sc = score(F);
      if (sc > best) {
        best = sc;
        cur = std::move(F);
      }
    }
  }
  cur = normalized_l1(cur);
  double cur_score = score(cur);
  out.best = cur;
  out.best_ratio = std::max(0.0, cur_score);
  const double cool = cfg.steps > 1 ? std::pow(cfg.t_end / cfg.t_start, 1.0 / (cfg.steps - 1)) : 1.0;
  double temp = cfg.t_start;
  for (int s = 0; s < cfg.steps; ++s, temp *= cool) {
    // Proposal width shrinks with the temperature; leaves are on the E|F| = 1 scale.
    const double sigma = 0.02 + 0.5 * std::sqrt(temp / cfg.t_start);
    Martingale prop = (cur.depth() < cfg.depth_max && rng.bernoulli(cfg.refine_probability))
                          ? refine_leaf(cur, sigma, rng)
                          : perturb_leaf(cur, sigma * std::sqrt(static_cast<double>(cur.leaf_count())), rng);
    prop = normalized_l1(prop);
    const double ps = score(prop);
    if (ps < 0.0) continue;
    const double delta = ps - cur_score;
    if (delta >= 0.0 || rng.uniform() < std::exp(delta / temp)) {
      cur = std::move(prop);
      cur_score = ps;
      ++out.accepted;
      if (cur_score > out.best_ratio) {
        out.best_ratio = cur_score;
        out.best = cur;
      }
    }
  }
  return out;
}

}  // namespace detail

/// Simulated annealing over simple martingales of depth <= depth_max. Every
/// reported ratio comes from an exact evaluation of a stored martingale, so
/// the result is a lower bound for the sharp constant.
inline SearchState adversarial_search(const InequalityContext& ctx, const SearchConfig& cfg) {
  cfg.validate();
  if (ctx.ell() != 1) throw std::invalid_argument("search: scalar Φ required");
  SearchState st;
  st.config = cfg;
  st.restarts.resize(static_cast<std::size_t>(cfg.restarts));
  parallel_for(st.restarts.size(), cfg.threads,
               [&](std::size_t r) { st.restarts[r] = detail::anneal(ctx, cfg, static_cast<int>(r)); });
  for (const auto& r : st.restarts) {
    if (st.best_restart < 0 || r.best_ratio > st.best_ratio) {
      st.best_ratio = r.best_ratio;
      st.best_restart = r.restart;
      st.witness = r.best;
    }
  }
  const auto e = evaluate_ratio(ctx, st.witness);
  if (e) {
    st.best_ratio = e->ratio;
    st.phi_mean = e->phi_mean;
    st.l1 = e->l1;
  }
  return st;
}

/// Seeds the first restart with the hand witness and any extra starts.
inline SearchConfig with_hand_start(SearchConfig cfg, int m = 3) {
  cfg.starts.insert(cfg.starts.begin(), hand_witness(m));
  return cfg;
}

}  // namespace fracmart

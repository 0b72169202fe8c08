#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "fracmart/cancellation.hpp"
#include "fracmart/context.hpp"
#include "fracmart/martingale.hpp"
#include "fracmart/parallel.hpp"
#include "fracmart/rng.hpp"
#include "fracmart/sampling.hpp"
#include "fracmart/special_functions.hpp"
#include "fracmart/transform.hpp"

namespace fracmart {

/// Point of Ω = {|x| <= z}.
struct BellmanPoint {
  double x = 0.0;
  std::vector<double> y;
  double z = 0.0;

  BellmanPoint(double x_, std::vector<double> y_, double z_) : x(x_), y(std::move(y_)), z(z_) {
    if (!(std::abs(x) <= z)) throw std::domain_error("BellmanPoint: |x| > z, point outside Ω");
  }
  BellmanPoint(double x_, double y_, double z_) : BellmanPoint(x_, std::vector<double>{y_}, z_) {}
};

/// Min: ℳ_p correction, valid for p <= 2. Sum: |y|^{p-1}z + |y|z^{p-1}, for p >= 2.
enum class Branch { Min, Sum };

inline const char* branch_name(Branch b) { return b == Branch::Min ? "min" : "sum"; }

inline Branch parse_branch(const std::string& s) {
  if (s == "min") return Branch::Min;
  if (s == "sum") return Branch::Sum;
  throw std::invalid_argument("unknown branch '" + s + "' (expected min or sum)");
}

/// p = 2 admits both formulas; the min form is the default there.
inline Branch default_branch(double p) { return p <= 2.0 ? Branch::Min : Branch::Sum; }

struct SupersolutionParams {
  double C1 = 0.0;
  double C2 = 0.0;
  Branch branch = Branch::Min;

  void validate(double p) const {
    if (!(C1 >= 0.0) || !(C2 >= 0.0) || !std::isfinite(C1) || !std::isfinite(C2))
      throw std::invalid_argument("SupersolutionParams: C1, C2 must be finite and >= 0");
    if (branch == Branch::Min && p > 2.0) throw std::invalid_argument("SupersolutionParams: min branch needs p <= 2");
    if (branch == Branch::Sum && p < 2.0) throw std::invalid_argument("SupersolutionParams: sum branch needs p >= 2");
  }
};

/// G(x,y,z) = Φ(y) + C1·corr(y,z) + C2·z^p. G does not depend on x.
class Supersolution {
 public:
  Supersolution(InequalityContext ctx, SupersolutionParams params) : ctx_(std::move(ctx)), params_(params) {
    params_.validate(ctx_.p());
  }

  const InequalityContext& context() const { return ctx_; }
  const SupersolutionParams& params() const { return params_; }

  double correction(double y_norm, double z) const {
    const double p = ctx_.p();
    if (params_.branch == Branch::Min) return m_p(y_norm, z, p);
    const double a = std::abs(y_norm);
    if (a == 0.0 || z == 0.0) return 0.0;
    return std::pow(a, p - 1.0) * z + a * std::pow(z, p - 1.0);
  }

  double operator()(double x, std::span<const double> y, double z) const {
    if (!(std::abs(x) <= z)) throw std::domain_error("G: point outside Ω (|x| > z)");
    return unchecked(y, z);
  }
  double operator()(double x, double y, double z) const { return (*this)(x, std::span<const double>(&y, 1), z); }
  double operator()(const BellmanPoint& P) const { return (*this)(P.x, P.y, P.z); }

  double unchecked(std::span<const double> y, double z) const {
    return ctx_.phi()(y) + params_.C1 * correction(euclidean_norm(y), z) + params_.C2 * std::pow(z, ctx_.p());
  }
  double unchecked(double y, double z) const { return unchecked(std::span<const double>(&y, 1), z); }

  /// G(x, 0, z)/z^p = Φ(0) + κ C1 + C2, with κ = corr(0, 1) (zero for both branches).
  double upper_constant() const {
    const std::vector<double> zero(ctx_.ell(), 0.0);
    return ctx_.phi()(zero) + params_.C1 * correction(0.0, 1.0) + params_.C2;
  }

 private:
  InequalityContext ctx_;
  SupersolutionParams params_;
};

/// The gap of the main inequality split into the parts that multiply 1, C1 and
/// C2. The z^p part equals m^{-p}Ψ(z⃗) and is evaluated through Ψ.
struct GapComponents {
  double phi = 0.0;         // Φ(y) - m^{-p} Σ Φ(child y_j)
  double corr = 0.0;        // corr(y,z) - m^{-p} Σ corr(child y_j, z_j)
  double zp = 0.0;          // m^{-p} Ψ(z⃗) >= 0
  double phi_scale = 0.0;   // |Φ(y)| + m^{-p} Σ |Φ(child y_j)|
  double corr_scale = 0.0;  // corr(y,z) + m^{-p} Σ corr(child y_j, z_j)

  double gap(double C1, double C2) const { return phi + C1 * corr + C2 * zp; }
  /// Rounding guard: relative to the Φ and correction magnitudes. The C2 part
  /// is evaluated without cancellation and deliberately not included.
  double tolerance(double C1, double rel = 1e-9) const { return rel * (phi_scale + C1 * corr_scale); }
  bool passes(double C1, double C2, double rel = 1e-9) const { return gap(C1, C2) >= -tolerance(C1, rel); }
};

/// Child offsets m^α y + (T[x⃗])_j, layout [j][channel].
inline std::vector<double> child_offsets(const InequalityContext& ctx, const SplitConfiguration& s) {
  const int m = ctx.m();
  const int ell = ctx.ell();
  std::vector<double> tx(static_cast<std::size_t>(m) * ell);
  ctx.op().apply_deviation_into(s.xs, tx);
  const double g = ctx.y_growth();
  for (int j = 0; j < m; ++j)
    for (int c = 0; c < ell; ++c) tx[static_cast<std::size_t>(j) * ell + c] += g * s.y[c];
  return tx;
}

inline GapComponents gap_components(const Supersolution& G, const SplitConfiguration& s) {
  const auto& ctx = G.context();
  const int m = ctx.m();
  const std::size_t ell = static_cast<std::size_t>(ctx.ell());
  if (s.m() != m || s.y.size() != ell) throw std::invalid_argument("gap_components: split does not match instance");
  s.validate();
  const double p = ctx.p();
  const double w = std::pow(static_cast<double>(m), -p);
  const auto cy = child_offsets(ctx, s);
  const double z = s.z();
  GapComponents g;
  const double phi_parent = ctx.phi()(s.y);
  const double corr_parent = G.correction(euclidean_norm(s.y), z);
  double phi_children = 0.0;
  double phi_abs = 0.0;
  double corr_children = 0.0;
  for (int j = 0; j < m; ++j) {
    std::span<const double> yj(cy.data() + j * ell, ell);
    const double f = ctx.phi()(yj);
    phi_children += f;
    phi_abs += std::abs(f);
    corr_children += G.correction(euclidean_norm(yj), s.zs[j]);
  }
  g.phi = phi_parent - w * phi_children;
  g.corr = corr_parent - w * corr_children;
  g.zp = w * psi(s.zs, p);
  g.phi_scale = std::abs(phi_parent) + w * phi_abs;
  g.corr_scale = corr_parent + w * corr_children;
  return g;
}

/// G(x,y,z) - m^{-p} Σ G(x_j, m^α y + (T[x⃗])_j, z_j), evaluated from components.
inline double main_inequality_gap(const Supersolution& G, const SplitConfiguration& s) {
  return gap_components(G, s).gap(G.params().C1, G.params().C2);
}

/// Same quantity by direct substitution into G; used to cross-check the
/// component form.
inline double main_inequality_gap_direct(const Supersolution& G, const SplitConfiguration& s) {
  const auto& ctx = G.context();
  const int m = ctx.m();
  const std::size_t ell = static_cast<std::size_t>(ctx.ell());
  s.validate();
  const auto cy = child_offsets(ctx, s);
  double rhs = 0.0;
  for (int j = 0; j < m; ++j) rhs += G(s.xs[j], std::span<const double>(cy.data() + j * ell, ell), s.zs[j]);
  return G(s.x(), s.y, s.z()) - std::pow(static_cast<double>(m), -ctx.p()) * rhs;
}

// ---------------------------------------------------------------- boundary

struct BoundaryReport {
  std::size_t samples = 0;
  std::size_t violations = 0;
  double min_margin = std::numeric_limits<double>::infinity();  // G(x,y,|x|) - Φ(y)
};

/// Checks G(x, y, |x|) >= Φ(y) on the given (x, y) pairs (ell = 1).
inline BoundaryReport check_boundary(const Supersolution& G, std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size()) throw std::invalid_argument("check_boundary: size mismatch");
  BoundaryReport r;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double phi = G.context().phi()(ys[i]);
    const double margin = G(xs[i], ys[i], std::abs(xs[i])) - phi;
    ++r.samples;
    if (margin < -1e-12 * std::max(1.0, std::abs(phi))) ++r.violations;
    r.min_margin = std::min(r.min_margin, margin);
  }
  return r;
}

inline BoundaryReport check_boundary_sampled(const Supersolution& G, std::size_t samples, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> xs(samples);
  std::vector<double> ys(samples);
  for (std::size_t i = 0; i < samples; ++i) {
    xs[i] = rng.bernoulli(0.1) ? 0.0 : rng.sign() * rng.log_uniform(1e-3, 1e3);
    ys[i] = rng.bernoulli(0.1) ? 0.0 : rng.sign() * rng.log_uniform(1e-3, 1e3);
  }
  return check_boundary(G, xs, ys);
}

// ---------------------------------------------------------------- verification

struct SplitRecord {
  std::size_t index = 0;
  SplitStratum stratum = SplitStratum::Bulk;
  double gap = 0.0;
  double tolerance = 0.0;
  double normalized = 0.0;  // gap over the total magnitude of all terms
  SplitConfiguration split;
};

struct VerifyConfig {
  std::size_t samples = 100000;
  std::uint64_t seed = 1;
  unsigned threads = 1;
  bool require_cancellation = true;
  std::size_t keep_worst = 100;
  double rel_tol = 1e-9;
};

struct VerifyReport {
  bool pass = false;
  bool cancellation_ok = false;
  std::string message;
  std::size_t samples = 0;
  std::size_t violations = 0;
  double min_gap = std::numeric_limits<double>::infinity();  // raw gap, smallest
  double min_normalized_gap = std::numeric_limits<double>::infinity();
  BoundaryReport boundary;
  std::vector<SplitRecord> worst;  // ascending normalized gap
};

namespace detail {
inline double normalized_gap(const GapComponents& g, double C1, double C2) {
  const double scale = g.phi_scale + C1 * g.corr_scale + C2 * g.zp;
  const double gap = g.gap(C1, C2);
  return scale > 0.0 ? gap / scale : 0.0;
}

inline bool cancellation_prechecks(const InequalityContext& ctx, std::string& message) {
  const auto wc = check_weak_cancellation(ctx.op());
  const auto pc = check_phi_cancellation(ctx.op(), ctx.phi());
  if (!wc.canceling) message += "operator is not weakly canceling (max residual " + std::to_string(wc.max_residual) + "); ";
  if (!pc.canceling) message += "Φ is not T-canceling (max |sum| " + std::to_string(pc.max_abs_sum) + "); ";
  return wc.canceling && pc.canceling;
}
}  // namespace detail

/// Monte-Carlo falsification of the main inequality on stratified splits plus
/// the boundary condition. PASS means no violation was found in the sample.
inline VerifyReport verify_supersolution(const Supersolution& G, const VerifyConfig& cfg) {
  const auto& ctx = G.context();
  VerifyReport r;
  r.cancellation_ok = detail::cancellation_prechecks(ctx, r.message);
  if (!r.cancellation_ok && cfg.require_cancellation) {
    r.message = "cancellation precheck failed: " + r.message;
    return r;
  }
  const double C1 = G.params().C1;
  const double C2 = G.params().C2;
  const SplitSampler sampler(ctx.op(), ctx.alpha(), cfg.seed);
  const std::size_t shards = (cfg.samples + kShardSize - 1) / kShardSize;
  struct Part {
    std::size_t violations = 0;
    double min_gap = std::numeric_limits<double>::infinity();
    std::vector<SplitRecord> worst;
  };
  std::vector<Part> parts(shards);
  const std::size_t keep = cfg.keep_worst;
  auto by_norm = [](const SplitRecord& a, const SplitRecord& b) {
    return a.normalized < b.normalized || (a.normalized == b.normalized && a.index < b.index);
  };
  parallel_for(shards, cfg.threads, [&](std::size_t sh) {
    Part& part = parts[sh];
    const std::size_t end = std::min(cfg.samples, (sh + 1) * kShardSize);
    for (std::size_t i = sh * kShardSize; i < end; ++i) {
      SplitConfiguration s = sampler(i);
      const GapComponents g = gap_components(G, s);
      const double gap = g.gap(C1, C2);
      const double tol = g.tolerance(C1, cfg.rel_tol);
      if (gap < -tol) ++part.violations;
      part.min_gap = std::min(part.min_gap, gap);
      SplitRecord rec{i, SplitSampler::stratum_of(i), gap, tol, detail::normalized_gap(g, C1, C2), {}};
      if (keep == 0) continue;
      if (part.worst.size() < keep || by_norm(rec, part.worst.back())) {
        rec.split = std::move(s);
        part.worst.insert(std::upper_bound(part.worst.begin(), part.worst.end(), rec, by_norm), std::move(rec));
        if (part.worst.size() > keep) part.worst.pop_back();
      }
    }
  });
  r.samples = cfg.samples;
  for (auto& part : parts) {
    r.violations += part.violations;
    r.min_gap = std::min(r.min_gap, part.min_gap);
    for (auto& rec : part.worst) r.worst.push_back(std::move(rec));
  }
  std::sort(r.worst.begin(), r.worst.end(), by_norm);
  if (r.worst.size() > keep) r.worst.resize(keep);
  if (!r.worst.empty()) r.min_normalized_gap = r.worst.front().normalized;
  r.boundary = check_boundary_sampled(G, std::max<std::size_t>(1000, cfg.samples / 10), derive_seed(cfg.seed, 7));
  r.pass = r.violations == 0 && r.boundary.violations == 0;
  if (r.pass) {
    r.message = "no violation found in " + std::to_string(cfg.samples) + " splits";
  } else {
    r.message += std::to_string(r.violations) + " violating splits, " + std::to_string(r.boundary.violations) +
                 " boundary violations";
  }
  return r;
}

// ---------------------------------------------------------------- fitting

struct FitConfig {
  std::size_t train_samples = 100000;
  std::size_t validation_samples = 100000;
  std::uint64_t seed = 1;
  unsigned threads = 1;
  int c1_min_exp = -4;
  int c1_max_exp = 20;
  int c2_min_exp = -8;
  int c2_max_exp = 24;
  bool require_cancellation = true;
  double rel_tol = 1e-9;
};

struct FitResult {
  bool success = false;
  std::string message;
  SupersolutionParams params;
  std::size_t candidates_tried = 0;
  double max_C1_tried = 0.0;
  double max_C2_tried = 0.0;
  std::uint64_t train_seed = 0;
  std::uint64_t validation_seed = 0;
  std::optional<VerifyReport> validation;
};

/// C2 values probed for a given C1: 0, then 2^j C1^q for q in {1, p-1, p}.
/// With C1 = 0 the families collapse, so plain powers 2^j are used instead.
inline std::vector<double> c2_grid(double C1, double p, int jmin, int jmax) {
  std::vector<double> g{0.0};
  if (C1 == 0.0) {
    for (int j = jmin; j <= jmax; ++j) g.push_back(std::ldexp(1.0, j));
  } else {
    for (double q : {1.0, p - 1.0, p})
      for (int j = jmin; j <= jmax; ++j) g.push_back(std::ldexp(1.0, j) * std::pow(C1, q));
  }
  std::sort(g.begin(), g.end());
  g.erase(std::unique(g.begin(), g.end()), g.end());
  return g;
}

inline std::vector<double> c1_grid(int kmin, int kmax) {
  std::vector<double> g{0.0};
  for (int k = kmin; k <= kmax; ++k) g.push_back(std::ldexp(1.0, k));
  return g;
}

/// Lexicographically smallest (C1, C2) on the grid that passes the training
/// sample and an independent validation sample.
///
/// The gap is affine in (C1, C2) with a nonnegative C2 coefficient, so for
/// each C1 the training sample is summarized by the least admissible C2.
inline FitResult fit_constants(const InequalityContext& ctx, const FitConfig& cfg) {
  FitResult res;
  res.params.branch = default_branch(ctx.p());
  std::string msg;
  if (!detail::cancellation_prechecks(ctx, msg) && cfg.require_cancellation) {
    res.message = "cancellation precheck failed: " + msg;
    return res;
  }
  res.train_seed = derive_seed(cfg.seed, 0);
  res.validation_seed = derive_seed(cfg.seed, 1);
  const Supersolution probe(ctx, {1.0, 1.0, res.params.branch});
  const SplitSampler sampler(ctx.op(), ctx.alpha(), res.train_seed);
  std::vector<GapComponents> comps(cfg.train_samples);
  parallel_for((cfg.train_samples + kShardSize - 1) / kShardSize, cfg.threads, [&](std::size_t sh) {
    const std::size_t end = std::min(cfg.train_samples, (sh + 1) * kShardSize);
    for (std::size_t i = sh * kShardSize; i < end; ++i) comps[i] = gap_components(probe, sampler(i));
  });
  const double p = ctx.p();
  for (double C1 : c1_grid(cfg.c1_min_exp, cfg.c1_max_exp)) {
    // Least C2 satisfying every training constraint, or infeasible.
    double need = 0.0;
    bool feasible = true;
    for (const auto& g : comps) {
      const double slack = g.phi + C1 * g.corr + g.tolerance(C1, cfg.rel_tol);
      if (slack >= 0.0) continue;
      if (g.zp <= 0.0) {
        feasible = false;
        break;
      }
      need = std::max(need, -slack / g.zp);
    }
    const auto grid = c2_grid(C1, p, cfg.c2_min_exp, cfg.c2_max_exp);
    res.max_C1_tried = C1;
    res.max_C2_tried = std::max(res.max_C2_tried, grid.back());
    if (!feasible) {
      res.candidates_tried += grid.size();
      continue;
    }
    auto it = std::lower_bound(grid.begin(), grid.end(), need);
    res.candidates_tried += static_cast<std::size_t>(it - grid.begin());
    for (; it != grid.end(); ++it) {
      ++res.candidates_tried;
      // The training constraints are monotone in C2; recheck exactly at the grid value.
      bool ok = true;
      for (const auto& g : comps)
        if (!g.passes(C1, *it, cfg.rel_tol)) {
          ok = false;
          break;
        }
      if (!ok) continue;
      const Supersolution G(ctx, {C1, *it, res.params.branch});
      VerifyConfig vc;
      vc.samples = cfg.validation_samples;
      vc.seed = res.validation_seed;
      vc.threads = cfg.threads;
      vc.require_cancellation = false;
      vc.keep_worst = 10;
      vc.rel_tol = cfg.rel_tol;
      auto rep = verify_supersolution(G, vc);
      if (rep.pass) {
        res.success = true;
        res.params.C1 = C1;
        res.params.C2 = *it;
        res.validation = std::move(rep);
        res.message = "fitted on " + std::to_string(cfg.train_samples) + " training and " +
                      std::to_string(cfg.validation_samples) + " validation splits";
        return res;
      }
    }
  }
  res.message = "no passing (C1, C2) on the grid; largest tried C1 = " + std::to_string(res.max_C1_tried) +
                ", C2 = " + std::to_string(res.max_C2_tried);
  return res;
}

// ---------------------------------------------------------------- process checks

struct SupermartingaleReport {
  bool pass = false;
  std::size_t atoms_checked = 0;
  std::size_t violations = 0;
  double min_decrement = std::numeric_limits<double>::infinity();  // X_n - E(X_{n+1}|F_n), worst atom
  double max_component_mismatch = 0.0;  // direct vs component decrement, relative
  double start_value = 0.0;             // G(F_0, y0, E|F_∞|)
  double phi_value = 0.0;               // EΦ(y0 + 𝕋_α[F])
  bool endgame_holds = false;
  std::vector<double> process_means;    // E X_n per level
};

/// The process X_n = m^{-(p-1)n} G(F_n, m^{αn}(y0 + (𝕋_α F)_n), E(|F_∞| | F_n))
/// on every atom, with the conditional decrements checked split by split.
inline SupermartingaleReport supermartingale_check(const Supersolution& G, const Martingale& F, double y0 = 0.0) {
  const auto& ctx = G.context();
  if (ctx.ell() != 1) throw std::invalid_argument("supermartingale_check: scalar Φ required");
  const int m = ctx.m();
  const int N = F.depth();
  const double p = ctx.p();
  const double growth = ctx.y_growth();
  const auto levels = all_node_values(F);
  const auto tr = transform_levels(F, ctx.op(), ctx.alpha());
  std::vector<std::vector<double>> za(N + 1);
  for (int n = 0; n <= N; ++n) za[n] = conditional_abs(F, n);
  auto yscaled = [&](int n, std::size_t a) { return std::pow(growth, n) * (y0 + tr[n][a]); };
  auto X = [&](int n, std::size_t a) {
    return std::pow(static_cast<double>(m), -(p - 1.0) * n) * G.unchecked(yscaled(n, a), za[n][a]);
  };
  SupermartingaleReport r;
  for (int n = 0; n <= N; ++n) {
    double s = 0.0;
    for (std::size_t a = 0; a < levels[n].size(); ++a) s += X(n, a);
    r.process_means.push_back(s / static_cast<double>(levels[n].size()));
  }
  const double C1 = G.params().C1;
  const double C2 = G.params().C2;
  for (int n = 0; n < N; ++n) {
    const double weight = std::pow(static_cast<double>(m), -(p - 1.0) * n);
    for (std::size_t a = 0; a < levels[n].size(); ++a) {
      SplitConfiguration s;
      s.y = {yscaled(n, a)};
      s.xs.resize(m);
      s.zs.resize(m);
      double child_mean = 0.0;
      for (int j = 0; j < m; ++j) {
        const std::size_t c = a * m + j;
        s.xs[j] = levels[n + 1][c];
        s.zs[j] = std::max(za[n + 1][c], std::abs(s.xs[j]));  // |F_{n+1}| <= E(|F_∞| | F_{n+1}) up to rounding
        child_mean += X(n + 1, c);
      }
      child_mean /= m;
      const GapComponents g = gap_components(G, s);
      const double dec = weight * g.gap(C1, C2);
      const double direct = X(n, a) - child_mean;
      const double total = std::abs(X(n, a)) + std::abs(child_mean);
      ++r.atoms_checked;
      if (g.gap(C1, C2) < -g.tolerance(C1)) ++r.violations;
      r.min_decrement = std::min(r.min_decrement, dec);
      if (total > 0.0) r.max_component_mismatch = std::max(r.max_component_mismatch, std::abs(dec - direct) / total);
    }
  }
  r.start_value = G.unchecked(y0, expected_abs(F));
  r.phi_value = phi_functional(F, ctx.op(), ctx.alpha(), ctx.phi(), y0);
  r.endgame_holds = r.phi_value <= r.start_value + 1e-9 * (std::abs(r.start_value) + std::abs(r.phi_value));
  r.pass = r.violations == 0 && r.endgame_holds;
  return r;
}

struct ChainBound {
  double lhs = 0.0;  // EΦ(𝕋_α[F])
  double rhs = 0.0;  // G(F_0, 0, E|F_∞|)
  bool holds = false;
};

inline ChainBound bellman_chain_bound(const Supersolution& G, const Martingale& F) {
  const auto& ctx = G.context();
  ChainBound b;
  b.lhs = phi_functional(F, ctx.op(), ctx.alpha(), ctx.phi());
  const std::vector<double> zero(ctx.ell(), 0.0);
  b.rhs = G.unchecked(zero, expected_abs(F));
  b.holds = b.lhs <= b.rhs + 1e-9 * (std::abs(b.lhs) + std::abs(b.rhs));
  return b;
}

/// Fits Φ and -Φ and combines them into the two-sided constant
/// |EΦ(𝕋_α F)| <= C (E|F_∞|)^p.
struct TwoSidedFit {
  FitResult plus;
  FitResult minus;
  bool success = false;
  double upper_constant = std::numeric_limits<double>::infinity();
};

inline TwoSidedFit fit_two_sided(const InequalityContext& ctx, const FitConfig& cfg) {
  TwoSidedFit t;
  t.plus = fit_constants(ctx, cfg);
  t.minus = fit_constants(ctx.with_phi(ctx.phi().negated()), cfg);
  t.success = t.plus.success && t.minus.success;
  if (t.success) {
    const double a = Supersolution(ctx, t.plus.params).upper_constant();
    const double b = Supersolution(ctx.with_phi(ctx.phi().negated()), t.minus.params).upper_constant();
    t.upper_constant = std::max(a, b);
  }
  return t;
}

}  // namespace fracmart

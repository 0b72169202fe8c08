#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "fracmart/context.hpp"
#include "fracmart/martingale.hpp"
#include "fracmart/parallel.hpp"
#include "fracmart/rng.hpp"
#include "fracmart/supersolution.hpp"
#include "fracmart/transform.hpp"

namespace fracmart {

// Lower bounds for B on the slice z = 1 of Ω, m = 3 and scalar Φ only.
// Children of a split are renormalized by homogeneity, B(x,y,z) = z^p B(x/z, y/z, 1),
// and z_j = 0 children sit on the exact line B(0, y, 0) = Φ(y).

enum class CellFlag : std::uint8_t { Unset = 0, Certified = 1, Heuristic = 2 };

inline const char* flag_name(CellFlag f) {
  switch (f) {
    case CellFlag::Unset:
      return "unset";
    case CellFlag::Certified:
      return "certified";
    case CellFlag::Heuristic:
      return "heuristic";
  }
  return "?";
}

inline CellFlag parse_flag(const std::string& s) {
  if (s == "unset") return CellFlag::Unset;
  if (s == "certified") return CellFlag::Certified;
  if (s == "heuristic") return CellFlag::Heuristic;
  throw std::invalid_argument("unknown cell flag '" + s + "'");
}

enum class DpMode { Certified, Heuristic };

inline DpMode parse_dp_mode(const std::string& s) {
  if (s == "certified") return DpMode::Certified;
  if (s == "heuristic") return DpMode::Heuristic;
  throw std::invalid_argument("unknown dp mode '" + s + "' (expected certified or heuristic)");
}

inline const char* dp_mode_name(DpMode m) { return m == DpMode::Certified ? "certified" : "heuristic"; }

/// Node a of the x-grid is -1 + 2a/(nx-1), node b of the y-grid is
/// ymax(-1 + 2b/(ny-1)). Cells are stored x-major: index a*ny + b.
struct GridGeometry {
  int nx = 41;
  int ny = 81;
  double ymax = 8.0;

  void validate() const {
    if (nx < 3 || ny < 3) throw std::invalid_argument("GridGeometry: need at least 3 nodes per axis");
    if (nx % 2 == 0 || ny % 2 == 0) throw std::invalid_argument("GridGeometry: nx and ny must be odd so that (0, 0) is a node");
    if (!(ymax > 0.0) || !std::isfinite(ymax)) throw std::invalid_argument("GridGeometry: ymax must be > 0");
  }
  std::size_t cells() const { return static_cast<std::size_t>(nx) * ny; }
  double x(int a) const { return -1.0 + 2.0 * a / (nx - 1); }
  double y(int b) const { return ymax * (-1.0 + 2.0 * b / (ny - 1)); }
  std::size_t index(int a, int b) const { return static_cast<std::size_t>(a) * ny + b; }
  bool operator==(const GridGeometry&) const = default;
};

struct GridSlice {
  GridGeometry geometry;
  std::vector<double> values;  // meaningful only where flags != Unset
  std::vector<CellFlag> flags;

  explicit GridSlice(GridGeometry g = {}) : geometry(g), values(g.cells(), 0.0), flags(g.cells(), CellFlag::Unset) {}

  bool set(std::size_t c) const { return flags[c] != CellFlag::Unset; }
  std::size_t set_count() const {
    return static_cast<std::size_t>(std::count_if(flags.begin(), flags.end(), [](CellFlag f) { return f != CellFlag::Unset; }));
  }
};

/// Iteration 0: constant martingales at the boundary cells |x| = 1, value Φ(y).
inline GridSlice boundary_seed(const GridGeometry& g, const PhiFunction& phi) {
  g.validate();
  GridSlice s(g);
  for (int a : {0, g.nx - 1})
    for (int b = 0; b < g.ny; ++b) {
      s.values[g.index(a, b)] = phi(g.y(b));
      s.flags[g.index(a, b)] = CellFlag::Certified;
    }
  return s;
}

/// One admissible split of a parent cell. Child j is terminal (z_j = |x_j|,
/// constant below, value Φ(y_j)) unless j == grid_child, in which case its
/// renormalized coordinates are the grid node `node`.
struct CandidateSplit {
  enum Family : std::uint8_t { Terminal = 0, OneNode = 1, Random = 2 };
  Family family = Terminal;
  std::array<double, 3> xs{};
  std::array<double, 3> zs{};
  std::array<double, 3> ys{};  // child offsets m^α y + (T[x⃗])_j
  int grid_child = -1;
  std::size_t node = 0;
};

namespace detail {

inline void require_dp_instance(const InequalityContext& ctx) {
  if (ctx.m() != 3 || ctx.ell() != 1) throw std::invalid_argument("bellman-dp: only m = 3, ell = 1 instances are supported");
}

inline void child_offsets3(const InequalityContext& ctx, double y, CandidateSplit& s) {
  double tx[3];
  ctx.op().apply_deviation_into(std::span<const double>(s.xs.data(), 3), std::span<double>(tx, 3));
  const double g = ctx.y_growth();
  for (int j = 0; j < 3; ++j) s.ys[j] = g * y + tx[j];
}

// Inverse columns for the one-node solve, see CertifiedSplitEnumerator.
struct OneNodeSystem {
  bool ok = false;
  int k = 0;
  std::array<int, 3> sign{};
  std::size_t node = 0;
  std::array<double, 4> col_x{};   // multiplies 3x
  std::array<double, 4> col_c{};   // multiplies 3
  std::array<double, 4> col_y{};   // multiplies the T-row right-hand side
};

inline bool invert4(std::array<std::array<double, 4>, 4> A, std::array<std::array<double, 4>, 4>& inv) {
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) inv[i][j] = i == j ? 1.0 : 0.0;
  double scale = 0.0;
  for (auto& r : A)
    for (double v : r) scale = std::max(scale, std::abs(v));
  for (int c = 0; c < 4; ++c) {
    int piv = c;
    for (int r = c + 1; r < 4; ++r)
      if (std::abs(A[r][c]) > std::abs(A[piv][c])) piv = r;
    if (std::abs(A[piv][c]) <= 1e-12 * scale) return false;
    std::swap(A[c], A[piv]);
    std::swap(inv[c], inv[piv]);
    const double d = A[c][c];
    for (int j = 0; j < 4; ++j) {
      A[c][j] /= d;
      inv[c][j] /= d;
    }
    for (int r = 0; r < 4; ++r) {
      if (r == c || A[r][c] == 0.0) continue;
      const double f = A[r][c];
      for (int j = 0; j < 4; ++j) {
        A[r][j] -= f * A[c][j];
        inv[r][j] -= f * inv[c][j];
      }
    }
  }
  return true;
}

}  // namespace detail

/// Finite split families used by certified value iteration.
///
/// Terminal: all three children on the boundary z_j = |x_j|. With the sign
/// pattern fixed, x_0 runs over a grid of step half the x-grid step on [-3, 3]
/// and x_1, x_2 follow from Σx_j = 3x, Σ|x_j| = 3.
///
/// OneNode: child k lands on grid node (X_a, Y_b) with weight z_k, the other
/// two are terminal with fixed signs. For each (k, signs, a, b) the unknowns
/// (x_0, x_1, x_2, z_k) solve the linear system
///   Σ x_j = 3x,  z_k + Σ_{j≠k} s_j x_j = 3,  x_k = X_a z_k,  m^α y + (T[x⃗])_k = Y_b z_k.
class CertifiedSplitEnumerator {
 public:
  CertifiedSplitEnumerator(const InequalityContext& ctx, GridGeometry g) : ctx_(ctx), g_(g) {
    detail::require_dp_instance(ctx);
    g_.validate();
    const auto& T = ctx.op();
    for (int k = 0; k < 3; ++k) {
      double rowsum = 0.0;
      for (int i = 0; i < 3; ++i) rowsum += T.coefficient(k, 0, i);
      rowsum_[k] = rowsum;
    }
    systems_.reserve(12 * g_.cells());
    for (int k = 0; k < 3; ++k)
      for (int sp = 0; sp < 4; ++sp)
        for (int a = 0; a < g_.nx; ++a)
          for (int b = 0; b < g_.ny; ++b) {
            detail::OneNodeSystem s;
            s.k = k;
            s.node = g_.index(a, b);
            int bit = 0;
            for (int j = 0; j < 3; ++j) s.sign[j] = (j == k) ? 0 : ((sp >> bit++) & 1 ? -1 : 1);
            std::array<std::array<double, 4>, 4> A{};
            for (int j = 0; j < 3; ++j) {
              A[0][j] = 1.0;
              A[1][j] = s.sign[j];
              A[3][j] = T.coefficient(k, 0, j);
            }
            A[1][3] = 1.0;
            A[2][k] = 1.0;
            A[2][3] = -g_.x(a);
            A[3][3] = -g_.y(b);
            std::array<std::array<double, 4>, 4> inv{};
            if (!detail::invert4(A, inv)) continue;
            for (int r = 0; r < 4; ++r) {
              s.col_x[r] = inv[r][0];
              s.col_c[r] = inv[r][1];
              s.col_y[r] = inv[r][3];
            }
            s.ok = true;
            systems_.push_back(s);
          }
  }

  const GridGeometry& geometry() const { return g_; }

  /// Calls visit(const CandidateSplit&) for every admissible split of cell (a, b);
  /// one-node splits are only offered when accept_node(node) is true.
  template <class Visit, class Accept>
  void for_each(int a, int b, Visit&& visit, Accept&& accept_node) const {
    const double x = g_.x(a);
    const double y = g_.y(b);
    CandidateSplit s;
    // Terminal family.
    s.family = CandidateSplit::Terminal;
    s.grid_child = -1;
    const int nt = 6 * (g_.nx - 1) + 1;
    for (int sp = 0; sp < 8; ++sp) {
      const int s0 = (sp & 1) ? -1 : 1;
      const int s1 = (sp & 2) ? -1 : 1;
      const int s2 = (sp & 4) ? -1 : 1;
      for (int it = 0; it < nt; ++it) {
        const double t = -3.0 + 6.0 * it / (nt - 1);
        if (s0 * t < 0.0) continue;
        if (t == 0.0 && s0 < 0) continue;  // counted with s0 = +1
        const double A = 3.0 * x - t;
        const double Bv = 3.0 - std::abs(t);
        if (s1 != s2) {
          // s1 x1 + s2 x2 = Bv with x1 + x2 = A.
          const double x1 = s1 > 0 ? 0.5 * (A + Bv) : 0.5 * (A - Bv);
          const double x2 = A - x1;
          if (s1 * x1 < 0.0 || s2 * x2 < 0.0) continue;
          emit_terminal(s, y, {t, x1, x2}, visit);
        } else {
          if (std::abs(s1 * A - Bv) > 1e-12 * (1.0 + std::abs(A))) continue;
          for (double u : {0.0, 0.5, 1.0}) {
            const double x1 = u * A;
            const double x2 = A - x1;
            if (s1 * x1 < 0.0 || s2 * x2 < 0.0) continue;
            emit_terminal(s, y, {t, x1, x2}, visit);
          }
        }
      }
    }
    // One-node family.
    s.family = CandidateSplit::OneNode;
    for (const auto& sys : systems_) {
      if (!accept_node(sys.node)) continue;
      const int k = sys.k;
      const double rhs_y = -ctx_.y_growth() * y + x * rowsum_[k];
      double sol[4];
      for (int r = 0; r < 4; ++r) sol[r] = sys.col_x[r] * 3.0 * x + sys.col_c[r] * 3.0 + sys.col_y[r] * rhs_y;
      const double zk = sol[3];
      if (!(zk > 1e-12)) continue;
      bool ok = true;
      for (int j = 0; j < 3; ++j) {
        if (j == k) continue;
        if (sys.sign[j] * sol[j] < 0.0) {
          ok = false;
          break;
        }
      }
      if (!ok) continue;
      for (int j = 0; j < 3; ++j) {
        s.xs[j] = sol[j];
        s.zs[j] = (j == k) ? zk : std::abs(sol[j]);
      }
      if (!(std::abs(s.xs[k]) <= s.zs[k])) continue;
      detail::child_offsets3(ctx_, y, s);
      // Renormalized child k must sit on its node up to rounding.
      const int na = static_cast<int>(sys.node / g_.ny);
      const int nb = static_cast<int>(sys.node % g_.ny);
      const double ex = std::abs(s.xs[k] / zk - g_.x(na));
      const double ey = std::abs(s.ys[k] / zk - g_.y(nb));
      if (ex > 1e-10 || ey > 1e-10 * (1.0 + g_.ymax)) continue;
      s.grid_child = k;
      s.node = sys.node;
      visit(static_cast<const CandidateSplit&>(s));
    }
  }

 private:
  template <class Visit>
  void emit_terminal(CandidateSplit& s, double y, std::array<double, 3> xs, Visit& visit) const {
    s.xs = xs;
    for (int j = 0; j < 3; ++j) s.zs[j] = std::abs(xs[j]);
    detail::child_offsets3(ctx_, y, s);
    visit(static_cast<const CandidateSplit&>(s));
  }

  InequalityContext ctx_;
  GridGeometry g_;
  std::array<double, 3> rowsum_{};
  std::vector<detail::OneNodeSystem> systems_;
};

// ---------------------------------------------------------------- iteration

struct DpConfig {
  GridGeometry geometry;
  int iters = 6;
  DpMode mode = DpMode::Certified;
  unsigned threads = 1;
  std::uint64_t seed = 1;
  std::size_t random_splits = 400;  // heuristic mode, per cell and iteration
  std::optional<SupersolutionParams> surrogate;  // heuristic off-slice children
};

struct DpIterationStats {
  int iteration = 0;
  std::size_t improved = 0;
  std::size_t set_cells = 0;
  double max_increase = 0.0;
  double origin_value = std::numeric_limits<double>::quiet_NaN();  // cell (0, 0)
};

/// Best split per cell and iteration, for witness extraction. `valid` is false
/// where the cell kept its previous value.
struct SplitChoice {
  bool valid = false;
  CandidateSplit split;
};

struct DpResult {
  DpConfig config;
  std::vector<GridSlice> history;               // iteration 0..iters
  std::vector<std::vector<SplitChoice>> choices;  // iteration 1..iters at [it-1]
  std::vector<DpIterationStats> tail;
  const GridSlice& final_slice() const { return history.back(); }
};

namespace detail {

// Bilinear interpolation at (x, y) on the slice, nullopt if a corner is unset.
inline std::optional<double> interpolate(const GridSlice& s, double x, double y) {
  const auto& g = s.geometry;
  if (x < -1.0 || x > 1.0 || y < -g.ymax || y > g.ymax) return std::nullopt;
  const double fx = (x + 1.0) * 0.5 * (g.nx - 1);
  const double fy = (y / g.ymax + 1.0) * 0.5 * (g.ny - 1);
  const int a = std::clamp(static_cast<int>(std::floor(fx)), 0, g.nx - 2);
  const int b = std::clamp(static_cast<int>(std::floor(fy)), 0, g.ny - 2);
  const double tx = fx - a;
  const double ty = fy - b;
  const std::size_t c00 = g.index(a, b), c01 = g.index(a, b + 1), c10 = g.index(a + 1, b), c11 = g.index(a + 1, b + 1);
  auto val = [&](std::size_t c, double w) -> std::optional<double> {
    if (w == 0.0) return 0.0;
    if (!s.set(c)) return std::nullopt;
    return w * s.values[c];
  };
  double acc = 0.0;
  for (auto [c, w] : {std::pair{c00, (1 - tx) * (1 - ty)}, std::pair{c01, (1 - tx) * ty}, std::pair{c10, tx * (1 - ty)},
                      std::pair{c11, tx * ty}}) {
    const auto v = val(c, w);
    if (!v) return std::nullopt;
    acc += *v;
  }
  return acc;
}

}  // namespace detail

/// Value iteration of the main inequality on the slice. Each sweep reads the
/// previous state and writes a fresh one, cell values are maxed with their old
/// value, so the sequence is pointwise nondecreasing.
inline DpResult dp_run(const InequalityContext& ctx, const DpConfig& cfg) {
  detail::require_dp_instance(ctx);
  cfg.geometry.validate();
  if (cfg.iters < 0) throw std::invalid_argument("dp_run: iters must be >= 0");
  const auto& g = cfg.geometry;
  const CertifiedSplitEnumerator En(ctx, g);
  const double p = ctx.p();
  const double w = std::pow(3.0, -p);
  const auto& phi = ctx.phi();
  std::optional<Supersolution> surrogate;
  if (cfg.mode == DpMode::Heuristic && cfg.surrogate) surrogate.emplace(ctx, *cfg.surrogate);

  DpResult res;
  res.config = cfg;
  res.history.push_back(boundary_seed(g, phi));
  for (int it = 1; it <= cfg.iters; ++it) {
    const GridSlice& prev = res.history.back();
    GridSlice next = prev;
    std::vector<SplitChoice> choice(g.cells());
    std::vector<double> gain(g.cells(), 0.0);
    parallel_for(g.cells(), cfg.threads, [&](std::size_t c) {
      const int a = static_cast<int>(c / g.ny);
      const int b = static_cast<int>(c % g.ny);
      bool have = false;
      double best = 0.0;
      bool best_heuristic = false;
      CandidateSplit arg;
      auto offer = [&](double v, const CandidateSplit& s, bool heuristic) {
        if (!have || v > best) {
          have = true;
          best = v;
          arg = s;
          best_heuristic = heuristic;
        }
      };
      En.for_each(
          a, b,
          [&](const CandidateSplit& s) {
            double v = 0.0;
            for (int j = 0; j < 3; ++j) {
              if (j == s.grid_child) {
                v += s.zs[j] * s.zs[j] * (p == 2.0 ? 1.0 : std::pow(s.zs[j], p - 2.0)) * prev.values[s.node];
              } else {
                v += phi(s.ys[j]);
              }
            }
            offer(w * v, s, s.grid_child >= 0 && prev.flags[s.node] == CellFlag::Heuristic);
          },
          [&](std::size_t node) { return prev.set(node); });
      if (cfg.mode == DpMode::Heuristic) {
        Rng rng(derive_seed(derive_seed(cfg.seed, static_cast<std::uint64_t>(it)), c));
        const double x = g.x(a);
        const double y = g.y(b);
        CandidateSplit s;
        s.family = CandidateSplit::Random;
        for (std::size_t r = 0; r < cfg.random_splits; ++r) {
          double e[3], tot = 0.0;
          for (double& v : e) tot += (v = rng.exponential());
          for (int j = 0; j < 3; ++j) s.zs[j] = 3.0 * e[j] / tot;
          s.xs[0] = rng.uniform(-1.0, 1.0) * s.zs[0];
          s.xs[1] = rng.uniform(-1.0, 1.0) * s.zs[1];
          s.xs[2] = 3.0 * x - s.xs[0] - s.xs[1];
          if (!(std::abs(s.xs[2]) <= s.zs[2])) continue;
          detail::child_offsets3(ctx, y, s);
          double v = 0.0;
          bool ok = true;
          for (int j = 0; j < 3 && ok; ++j) {
            const double zj = s.zs[j];
            if (zj == 0.0) {
              v += phi(s.ys[j]);
              continue;
            }
            const double xr = s.xs[j] / zj;
            const double yr = s.ys[j] / zj;
            std::optional<double> u = detail::interpolate(prev, xr, yr);
            if (!u && std::abs(yr) > g.ymax && surrogate) u = surrogate->unchecked(yr, 1.0);
            if (!u) {
              ok = false;
              break;
            }
            v += std::pow(zj, p) * *u;
          }
          if (ok) offer(w * v, s, true);
        }
      }
      if (!have) return;
      if (!prev.set(c) || best > prev.values[c]) {
        gain[c] = prev.set(c) ? best - prev.values[c] : std::numeric_limits<double>::infinity();
        next.values[c] = best;
        next.flags[c] = best_heuristic ? CellFlag::Heuristic : CellFlag::Certified;
        choice[c].valid = true;
        choice[c].split = arg;
      }
    });
    DpIterationStats st;
    st.iteration = it;
    for (std::size_t c = 0; c < g.cells(); ++c) {
      if (!choice[c].valid) continue;
      ++st.improved;
      if (std::isfinite(gain[c])) st.max_increase = std::max(st.max_increase, gain[c]);
    }
    st.set_cells = next.set_count();
    const std::size_t origin = g.index(g.nx / 2, g.ny / 2);
    if (next.set(origin)) st.origin_value = next.values[origin];
    res.tail.push_back(st);
    res.choices.push_back(std::move(choice));
    res.history.push_back(std::move(next));
  }
  return res;
}

/// Martingale realizing the certified value of cell c after `iteration` sweeps:
/// root F_0 = x, E|F_∞| = 1, and EΦ(y + 𝕋_α[F]) equals the stored value.
inline Martingale materialize_witness(const DpResult& r, std::size_t c, int iteration) {
  const auto& g = r.config.geometry;
  if (iteration < 0 || iteration >= static_cast<int>(r.history.size()))
    throw std::out_of_range("materialize_witness: iteration out of range");
  const GridSlice& s = r.history[iteration];
  if (!s.set(c)) throw std::invalid_argument("materialize_witness: cell is unset");
  if (s.flags[c] != CellFlag::Certified) throw std::invalid_argument("materialize_witness: cell value is heuristic");
  for (int it = iteration; it >= 1; --it) {
    const SplitChoice& ch = r.choices[it - 1][c];
    if (!ch.valid) continue;
    std::vector<Martingale> kids;
    for (int j = 0; j < 3; ++j) {
      if (j == ch.split.grid_child) {
        kids.push_back(materialize_witness(r, ch.split.node, it - 1).scaled(ch.split.zs[j]));
      } else {
        kids.push_back(Martingale::constant(3, ch.split.xs[j]));
      }
    }
    return glue(kids);
  }
  // Seed value: constant martingale on a boundary cell.
  return Martingale::constant(3, g.x(static_cast<int>(c / g.ny)));
}

}  // namespace fracmart

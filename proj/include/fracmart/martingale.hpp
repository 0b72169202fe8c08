#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace fracmart {

inline std::size_t ipow(std::size_t base, int exponent) {
  std::size_t r = 1;
  for (int i = 0; i < exponent; ++i) r *= base;
  return r;
}

/// Simple martingale on the m-uniform filtration, stored by its terminal
/// values F_N on the m^N atoms of level N.
///
/// Atoms are numbered row-major ("J-order"): the children of atom a at level
/// n are atoms a*m + k, k = 0..m-1, at level n+1. Interior values are never
/// stored; they are recomputed as averages, so the martingale property holds
/// by construction. Each value has `dim` components (1 for real-valued).
class Martingale {
 public:
  Martingale(int m, int depth, int dim, std::vector<double> leaves)
      : m_(m), depth_(depth), dim_(dim), leaves_(std::move(leaves)) {
    if (m < 2) throw std::invalid_argument("Martingale: m must be >= 2");
    if (depth < 0) throw std::invalid_argument("Martingale: depth must be >= 0");
    if (dim < 1) throw std::invalid_argument("Martingale: dim must be >= 1");
    const std::size_t expected = ipow(static_cast<std::size_t>(m), depth) * dim;
    if (leaves_.size() != expected) {
      throw std::invalid_argument("Martingale: expected " + std::to_string(expected) + " leaf values, got " +
                                  std::to_string(leaves_.size()));
    }
    for (double v : leaves_)
      if (!std::isfinite(v)) throw std::invalid_argument("Martingale: non-finite leaf value");
  }

  static Martingale scalar(int m, int depth, std::vector<double> leaves) {
    return Martingale(m, depth, 1, std::move(leaves));
  }

  static Martingale constant(int m, double value, int depth = 0) {
    return Martingale(m, depth, 1, std::vector<double>(ipow(static_cast<std::size_t>(m), depth), value));
  }

  int m() const { return m_; }
  int depth() const { return depth_; }
  int dim() const { return dim_; }
  std::size_t leaf_count() const { return ipow(static_cast<std::size_t>(m_), depth_); }
  std::span<const double> leaves() const { return leaves_; }
  double leaf(std::size_t k) const { return leaves_[k * dim_]; }

  Martingale scaled(double lambda) const {
    std::vector<double> v = leaves_;
    for (double& x : v) x *= lambda;
    return Martingale(m_, depth_, dim_, std::move(v));
  }

  friend bool operator==(const Martingale&, const Martingale&) = default;

 private:
  int m_;
  int depth_;
  int dim_;
  std::vector<double> leaves_;
};

/// Values F_n for every level n = 0..N; level n holds m^n * dim numbers.
inline std::vector<std::vector<double>> all_node_values(const Martingale& F) {
  const int N = F.depth();
  const std::size_t m = static_cast<std::size_t>(F.m());
  const std::size_t dim = static_cast<std::size_t>(F.dim());
  std::vector<std::vector<double>> levels(N + 1);
  levels[N].assign(F.leaves().begin(), F.leaves().end());
  for (int n = N - 1; n >= 0; --n) {
    const std::size_t atoms = ipow(m, n);
    levels[n].assign(atoms * dim, 0.0);
    const auto& below = levels[n + 1];
    for (std::size_t a = 0; a < atoms; ++a) {
      for (std::size_t c = 0; c < dim; ++c) {
        double s = 0.0;
        for (std::size_t k = 0; k < m; ++k) s += below[(a * m + k) * dim + c];
        levels[n][a * dim + c] = s / static_cast<double>(m);
      }
    }
  }
  return levels;
}

/// Value of F_n on each atom of level n.
inline std::vector<double> node_values(const Martingale& F, int level) {
  if (level < 0 || level > F.depth()) {
    throw std::out_of_range("node_values: level " + std::to_string(level) + " outside [0, " +
                            std::to_string(F.depth()) + "]");
  }
  return all_node_values(F)[level];
}

/// Martingale differences f_1..f_N; element k-1 holds f_k = F_k - F_{k-1}
/// on the atoms of level k.
inline std::vector<std::vector<double>> martingale_differences(const Martingale& F) {
  const auto levels = all_node_values(F);
  const std::size_t m = static_cast<std::size_t>(F.m());
  const std::size_t dim = static_cast<std::size_t>(F.dim());
  std::vector<std::vector<double>> diffs;
  diffs.reserve(F.depth());
  for (int k = 1; k <= F.depth(); ++k) {
    std::vector<double> f(levels[k].size());
    for (std::size_t a = 0; a < levels[k].size() / dim; ++a) {
      for (std::size_t c = 0; c < dim; ++c) f[a * dim + c] = levels[k][a * dim + c] - levels[k - 1][(a / m) * dim + c];
    }
    diffs.push_back(std::move(f));
  }
  return diffs;
}

namespace detail {
inline double value_norm(std::span<const double> v) {
  if (v.size() == 1) return std::abs(v[0]);
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}
}  // namespace detail

/// Mean of |F_n| over the atoms of each level n.
inline std::vector<double> expected_abs_by_level(const Martingale& F) {
  const auto levels = all_node_values(F);
  const std::size_t dim = static_cast<std::size_t>(F.dim());
  std::vector<double> out;
  out.reserve(levels.size());
  for (const auto& lv : levels) {
    const std::size_t atoms = lv.size() / dim;
    double s = 0.0;
    for (std::size_t a = 0; a < atoms; ++a) s += detail::value_norm(std::span(lv).subspan(a * dim, dim));
    out.push_back(s / static_cast<double>(atoms));
  }
  return out;
}

/// E|F_∞|, the quantity that parametrizes the Bellman function.
inline double expected_abs(const Martingale& F) {
  const std::size_t dim = static_cast<std::size_t>(F.dim());
  const std::size_t n = F.leaf_count();
  double s = 0.0;
  for (std::size_t k = 0; k < n; ++k) s += detail::value_norm(F.leaves().subspan(k * dim, dim));
  return s / static_cast<double>(n);
}

struct L1Report {
  double sup_norm = 0.0;  // sup_n E|F_n|
  double terminal = 0.0;  // E|F_∞|
  std::vector<double> by_level;
  bool nondecreasing = true;  // E|F_n| nondecreasing in n
};

inline L1Report l1_norm(const Martingale& F) {
  L1Report r;
  r.by_level = expected_abs_by_level(F);
  r.terminal = r.by_level.back();
  r.sup_norm = *std::max_element(r.by_level.begin(), r.by_level.end());
  for (std::size_t n = 1; n < r.by_level.size(); ++n) {
    if (r.by_level[n] < r.by_level[n - 1] * (1.0 - 1e-12) - 1e-300) r.nondecreasing = false;
  }
  return r;
}

/// E(|F_∞| | F_n) on the atoms of level n.
inline std::vector<double> conditional_abs(const Martingale& F, int level) {
  if (level < 0 || level > F.depth()) throw std::out_of_range("conditional_abs: level out of range");
  const std::size_t dim = static_cast<std::size_t>(F.dim());
  const std::size_t atoms = ipow(static_cast<std::size_t>(F.m()), level);
  const std::size_t per_atom = F.leaf_count() / atoms;
  std::vector<double> out(atoms, 0.0);
  for (std::size_t a = 0; a < atoms; ++a) {
    double s = 0.0;
    for (std::size_t k = a * per_atom; k < (a + 1) * per_atom; ++k)
      s += detail::value_norm(F.leaves().subspan(k * dim, dim));
    out[a] = s / static_cast<double>(per_atom);
  }
  return out;
}

/// Martingale analog of the Riesz potential, I_α[F]_n = Σ_{k<=n} m^{-αk} f_k
/// with the convention f_0 = F_0. Element n holds level n (m^n * dim values).
inline std::vector<std::vector<double>> riesz_potential(const Martingale& F, double alpha) {
  if (!(alpha > 0.0)) throw std::invalid_argument("riesz_potential: alpha must be > 0");
  const auto levels = all_node_values(F);
  const std::size_t m = static_cast<std::size_t>(F.m());
  const std::size_t dim = static_cast<std::size_t>(F.dim());
  std::vector<std::vector<double>> out(levels.size());
  out[0] = levels[0];
  for (std::size_t k = 1; k < levels.size(); ++k) {
    const double damping = std::pow(static_cast<double>(m), -alpha * static_cast<double>(k));
    out[k].resize(levels[k].size());
    for (std::size_t a = 0; a < levels[k].size() / dim; ++a) {
      for (std::size_t c = 0; c < dim; ++c) {
        const double f = levels[k][a * dim + c] - levels[k - 1][(a / m) * dim + c];
        out[k][a * dim + c] = out[k - 1][(a / m) * dim + c] + damping * f;
      }
    }
  }
  return out;
}

/// Same martingale viewed with one more, constant, level at the bottom.
inline Martingale refine_constant(const Martingale& F) {
  const std::size_t m = static_cast<std::size_t>(F.m());
  const std::size_t dim = static_cast<std::size_t>(F.dim());
  std::vector<double> v;
  v.reserve(F.leaves().size() * m);
  for (std::size_t k = 0; k < F.leaf_count(); ++k)
    for (std::size_t r = 0; r < m; ++r)
      for (std::size_t c = 0; c < dim; ++c) v.push_back(F.leaves()[k * dim + c]);
  return Martingale(F.m(), F.depth() + 1, F.dim(), std::move(v));
}

/// Prepends a trivial root split: all m children of the new root carry a copy of F.
inline Martingale prepend_trivial_split(const Martingale& F) {
  std::vector<double> v;
  v.reserve(F.leaves().size() * F.m());
  for (int k = 0; k < F.m(); ++k) v.insert(v.end(), F.leaves().begin(), F.leaves().end());
  return Martingale(F.m(), F.depth() + 1, F.dim(), std::move(v));
}

/// Pads F with constant levels until it has the requested depth.
inline Martingale extend_to_depth(Martingale F, int depth) {
  if (depth < F.depth()) throw std::invalid_argument("extend_to_depth: target depth is smaller");
  while (F.depth() < depth) F = refine_constant(F);
  return F;
}

/// Glues m subtrees under a common root: child k develops like children[k].
/// Shallower children are padded with constant levels.
inline Martingale glue(const std::vector<Martingale>& children) {
  if (children.empty()) throw std::invalid_argument("glue: no children");
  const int m = static_cast<int>(children.size());
  int depth = 0;
  for (const auto& c : children) {
    if (c.m() != m) throw std::invalid_argument("glue: branching factor mismatch");
    if (c.dim() != children[0].dim()) throw std::invalid_argument("glue: dimension mismatch");
    depth = std::max(depth, c.depth());
  }
  std::vector<double> v;
  for (const auto& c : children) {
    const Martingale padded = extend_to_depth(c, depth);
    v.insert(v.end(), padded.leaves().begin(), padded.leaves().end());
  }
  return Martingale(m, depth + 1, children[0].dim(), std::move(v));
}

}  // namespace fracmart

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "fracmart/martingale.hpp"
#include "fracmart/operator.hpp"
#include "fracmart/rng.hpp"

namespace fracmart {

/// One split of the main inequality: the parent offset y and the children
/// (x_j, z_j) with |x_j| <= z_j. Parent x and z are the means.
struct SplitConfiguration {
  std::vector<double> y;   // ell components
  std::vector<double> xs;  // m values
  std::vector<double> zs;  // m values

  int m() const { return static_cast<int>(xs.size()); }
  double x() const {
    double s = 0.0;
    for (double v : xs) s += v;
    return s / static_cast<double>(xs.size());
  }
  double z() const {
    double s = 0.0;
    for (double v : zs) s += v;
    return s / static_cast<double>(zs.size());
  }
  std::vector<double> deviation() const {
    const double mx = x();
    std::vector<double> d(xs.size());
    for (std::size_t j = 0; j < xs.size(); ++j) d[j] = xs[j] - mx;
    return d;
  }
  void validate() const {
    if (xs.size() != zs.size() || xs.size() < 2) throw std::invalid_argument("SplitConfiguration: bad sizes");
    if (y.empty()) throw std::invalid_argument("SplitConfiguration: empty y");
    for (std::size_t j = 0; j < xs.size(); ++j) {
      if (!std::isfinite(xs[j]) || !std::isfinite(zs[j]) || !(std::abs(xs[j]) <= zs[j])) {
        throw std::domain_error("SplitConfiguration: child " + std::to_string(j) + " is not in Ω (|x_j| > z_j)");
      }
    }
  }
  SplitConfiguration scaled(double lambda) const {
    SplitConfiguration s = *this;
    for (double& v : s.y) v *= lambda;
    for (double& v : s.xs) v *= lambda;
    for (double& v : s.zs) v *= lambda;
    return s;
  }
};

enum class SplitStratum { NearDelta, Constant, Boundary, Bulk };

inline const char* stratum_name(SplitStratum s) {
  switch (s) {
    case SplitStratum::NearDelta:
      return "near-delta";
    case SplitStratum::Constant:
      return "constant";
    case SplitStratum::Boundary:
      return "boundary";
    case SplitStratum::Bulk:
      return "bulk";
  }
  return "?";
}

/// Deterministic stratified splits. Split i depends only on (seed, i), so any
/// reported split can be regenerated from its index.
///
/// Strata by i mod 10: 0-2 near-delta (a third of them exact deltas),
/// 3 constant, 4-5 boundary |x_j| = z_j, 6-9 bulk.
class SplitSampler {
 public:
  SplitSampler(const Operator& T, double alpha, std::uint64_t seed)
      : T_(T), growth_(std::pow(static_cast<double>(T.m()), alpha)), seed_(seed) {}

  static SplitStratum stratum_of(std::size_t i) {
    const std::size_t r = i % 10;
    if (r < 3) return SplitStratum::NearDelta;
    if (r == 3) return SplitStratum::Constant;
    if (r < 6) return SplitStratum::Boundary;
    return SplitStratum::Bulk;
  }

  SplitConfiguration operator()(std::size_t i) const {
    Rng rng(derive_seed(seed_, i));
    const int m = T_.m();
    const int ell = T_.ell();
    SplitConfiguration s;
    s.xs.assign(m, 0.0);
    s.zs.assign(m, 0.0);
    s.y.assign(ell, 0.0);
    const double Z = rng.log_uniform(1e-2, 1e2);  // overall size
    switch (stratum_of(i)) {
      case SplitStratum::NearDelta: {
        const int j = rng.index(m);
        const bool exact = (i / 10) % 3 == 0;
        const double eps = exact ? 0.0 : std::pow(10.0, -rng.uniform(1.0, 10.0));
        for (int k = 0; k < m; ++k) s.zs[k] = (k == j) ? m * Z : (rng.bernoulli(0.25) ? 0.0 : eps * Z * rng.uniform());
        for (int k = 0; k < m; ++k) {
          const double t = rng.bernoulli(0.5) ? rng.sign() : rng.uniform(-1.0, 1.0);
          s.xs[k] = t * s.zs[k];
        }
        break;
      }
      case SplitStratum::Constant: {
        const double x = rng.uniform(-1.0, 1.0) * Z;
        for (int k = 0; k < m; ++k) {
          s.zs[k] = Z;
          s.xs[k] = x;
        }
        break;
      }
      case SplitStratum::Boundary: {
        for (int k = 0; k < m; ++k) {
          s.zs[k] = rng.bernoulli(0.15) ? 0.0 : Z * rng.exponential();
          s.xs[k] = rng.sign() * s.zs[k];
        }
        break;
      }
      case SplitStratum::Bulk: {
        for (int k = 0; k < m; ++k) {
          s.zs[k] = rng.bernoulli(0.1) ? 0.0 : Z * rng.exponential();
          s.xs[k] = rng.uniform(-1.0, 1.0) * s.zs[k];
        }
        break;
      }
    }
    // y relative to the split size: zero, tiny, comparable or huge, or tuned
    // so that one child offset m^α y + (T[x⃗])_j sits at zero.
    const double u = rng.uniform();
    double zbar = 0.0;
    for (double v : s.zs) zbar += v;
    zbar = std::max(zbar / m, 1e-300);
    if (u < 0.1) {
      // y = 0
    } else if (u < 0.2) {
      std::vector<double> tx(static_cast<std::size_t>(m) * ell);
      T_.apply_deviation_into(s.xs, tx);
      const int j = rng.index(m);
      for (int c = 0; c < ell; ++c) s.y[c] = -tx[static_cast<std::size_t>(j) * ell + c] / growth_;
    } else {
      for (int c = 0; c < ell; ++c) s.y[c] = rng.sign() * zbar * std::pow(10.0, rng.uniform(-4.0, 4.0));
    }
    return s;
  }

 private:
  Operator T_;
  double growth_;
  std::uint64_t seed_;
};

/// Random simple martingale of the given depth. Leaves come from one of several
/// families: Gaussian, one-signed, sparse, delta-like, or a heavy-tailed mix.
inline Martingale random_martingale(int m, int depth, Rng& rng) {
  const std::size_t n = ipow(static_cast<std::size_t>(m), depth);
  std::vector<double> v(n, 0.0);
  const int family = rng.index(5);
  for (std::size_t k = 0; k < n; ++k) {
    switch (family) {
      case 0:
        v[k] = rng.normal();
        break;
      case 1:
        v[k] = rng.exponential();
        break;
      case 2:
        v[k] = rng.bernoulli(0.7) ? 0.0 : rng.normal();
        break;
      case 3:
        v[k] = 0.0;
        break;
      default:
        v[k] = rng.sign() * rng.log_uniform(1e-3, 1e3);
        break;
    }
  }
  if (family == 3) {
    const int hits = 1 + rng.index(3);
    for (int h = 0; h < hits; ++h) v[static_cast<std::size_t>(rng.index(static_cast<int>(n)))] = rng.sign() * n;
  }
  bool all_zero = true;
  for (double x : v)
    if (x != 0.0) all_zero = false;
  if (all_zero) v[0] = 1.0;
  return Martingale::scalar(m, depth, std::move(v));
}

}  // namespace fracmart

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "fracmart/martingale.hpp"
#include "fracmart/operator.hpp"
#include "fracmart/phi.hpp"

namespace fracmart {

/// Values of the fractional transform on the atoms of the final level; each
/// leaf carries `ell` components, layout [leaf][channel].
struct TransformResult {
  int m = 0;
  int depth = 0;
  int ell = 1;
  std::vector<double> leaf_values;

  std::span<const double> at(std::size_t leaf) const {
    return std::span<const double>(leaf_values).subspan(leaf * ell, ell);
  }
};

/// (𝕋_α[F])_n for n = 0..N. Level n holds m^n * ell values; level 0 is zero.
///
/// The level-(k+1) increment on the children of an atom ω of level k is
/// m^{-α(k+1)} T[x⃗], where x⃗ lists the m child deviations in J-order.
inline std::vector<std::vector<double>> transform_levels(const Martingale& F, const Operator& T, double alpha) {
  if (F.dim() != 1) throw std::invalid_argument("fractional_transform: martingale must be scalar-valued");
  if (T.m() != F.m()) {
    throw std::invalid_argument("fractional_transform: operator acts on R^" + std::to_string(T.m()) +
                                " but the martingale has m = " + std::to_string(F.m()));
  }
  if (!(alpha > 0.0)) throw std::invalid_argument("fractional_transform: alpha must be > 0");
  const auto levels = all_node_values(F);
  const std::size_t m = static_cast<std::size_t>(F.m());
  const std::size_t ell = static_cast<std::size_t>(T.ell());
  std::vector<std::vector<double>> out(levels.size());
  out[0].assign(ell, 0.0);
  std::vector<double> dev(m);
  std::vector<double> image(m * ell);
  for (std::size_t k = 0; k + 1 < levels.size(); ++k) {
    const double damping = std::pow(static_cast<double>(m), -alpha * static_cast<double>(k + 1));
    const std::size_t atoms = levels[k].size();
    out[k + 1].assign(atoms * m * ell, 0.0);
    for (std::size_t a = 0; a < atoms; ++a) {
      bool trivial = true;
      for (std::size_t j = 0; j < m; ++j) {
        dev[j] = levels[k + 1][a * m + j] - levels[k][a];
        if (dev[j] != 0.0) trivial = false;
      }
      if (trivial) {
        std::fill(image.begin(), image.end(), 0.0);
      } else {
        // Rounding in the averaged parent can leave a tiny nonzero sum.
        double s = 0.0;
        for (double d : dev) s += d;
        s /= static_cast<double>(m);
        for (double& d : dev) d -= s;
        T.apply_into(dev, image);
      }
      for (std::size_t j = 0; j < m; ++j)
        for (std::size_t c = 0; c < ell; ++c)
          out[k + 1][(a * m + j) * ell + c] = out[k][a * ell + c] + damping * image[j * ell + c];
    }
  }
  return out;
}

inline TransformResult fractional_transform(const Martingale& F, const Operator& T, double alpha) {
  auto levels = transform_levels(F, T, alpha);
  return TransformResult{F.m(), F.depth(), T.ell(), std::move(levels.back())};
}

/// 𝔼Φ(𝕋_α[F] + y), the exact average over the m^N leaves.
inline double phi_functional(const Martingale& F, const Operator& T, double alpha, const PhiFunction& phi,
                             std::span<const double> y = {}) {
  const std::size_t ell = static_cast<std::size_t>(T.ell());
  if (phi.ell() != T.ell()) throw std::invalid_argument("phi_functional: Φ and T disagree on ell");
  if (!y.empty() && y.size() != ell) throw std::invalid_argument("phi_functional: offset has wrong dimension");
  const TransformResult tr = fractional_transform(F, T, alpha);
  const std::size_t n = F.leaf_count();
  std::vector<double> buf(ell);
  double s = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t c = 0; c < ell; ++c) buf[c] = tr.leaf_values[k * ell + c] + (y.empty() ? 0.0 : y[c]);
    s += phi(std::span<const double>(buf));
  }
  return s / static_cast<double>(n);
}

inline double phi_functional(const Martingale& F, const Operator& T, double alpha, const PhiFunction& phi,
                             double y) {
  return phi_functional(F, T, alpha, phi, std::span<const double>(&y, 1));
}

struct RatioReport {
  double phi_value = 0.0;     // 𝔼Φ(𝕋_α[F])
  double expected_abs = 0.0;  // 𝔼|F_∞|
  double ratio = 0.0;         // |𝔼Φ| / (𝔼|F_∞|)^p, 0 when 𝔼|F_∞| = 0
};

inline RatioReport phi_ratio(const Martingale& F, const Operator& T, double alpha, const PhiFunction& phi) {
  RatioReport r;
  r.phi_value = phi_functional(F, T, alpha, phi);
  r.expected_abs = expected_abs(F);
  r.ratio = r.expected_abs > 0.0 ? std::abs(r.phi_value) / std::pow(r.expected_abs, phi.p()) : 0.0;
  return r;
}

}  // namespace fracmart

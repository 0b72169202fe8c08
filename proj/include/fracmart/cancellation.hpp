#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "fracmart/martingale.hpp"
#include "fracmart/operator.hpp"
#include "fracmart/phi.hpp"
#include "fracmart/transform.hpp"

namespace fracmart {

inline constexpr double kDefaultCancellationTolerance = 1e-10;

/// D_j: m-1 in slot j, -1 elsewhere. Indices are 0-based (j in [0, m)).
inline std::vector<double> delta_vector(int m, int j) {
  if (m < 2) throw std::invalid_argument("delta_vector: m must be >= 2");
  if (j < 0 || j >= m) {
    throw std::out_of_range("delta_vector: index " + std::to_string(j) + " outside [0, " + std::to_string(m) + ")");
  }
  std::vector<double> d(m, -1.0);
  d[j] = static_cast<double>(m - 1);
  return d;
}

struct WeakCancellationReport {
  bool canceling = false;
  double max_residual = 0.0;
  std::vector<double> residuals;              // |(T[D_j])_j| over channels, one per j
  std::vector<std::vector<double>> images;    // T[D_j], layout [i][channel]
};

inline WeakCancellationReport check_weak_cancellation(const Operator& T, double tol = kDefaultCancellationTolerance) {
  if (tol < 0.0) throw std::invalid_argument("check_weak_cancellation: tol must be >= 0");
  WeakCancellationReport r;
  const int m = T.m();
  const int ell = T.ell();
  for (int j = 0; j < m; ++j) {
    auto img = T.apply(delta_vector(m, j));
    double sq = 0.0;
    for (int c = 0; c < ell; ++c) sq += img[static_cast<std::size_t>(j) * ell + c] * img[static_cast<std::size_t>(j) * ell + c];
    const double res = std::sqrt(sq);
    r.residuals.push_back(res);
    r.max_residual = std::max(r.max_residual, res);
    r.images.push_back(std::move(img));
  }
  r.canceling = r.max_residual <= tol;
  return r;
}

inline bool is_weakly_canceling(const Operator& T, double tol = kDefaultCancellationTolerance) {
  return check_weak_cancellation(T, tol).canceling;
}

struct PhiCancellationReport {
  bool canceling = false;
  double max_abs_sum = 0.0;
  std::vector<double> sums;  // Σ_{i≠j} Φ((T[D_j])_i), one per j
};

inline PhiCancellationReport check_phi_cancellation(const Operator& T, const PhiFunction& phi,
                                                    double tol = kDefaultCancellationTolerance) {
  if (tol < 0.0) throw std::invalid_argument("check_phi_cancellation: tol must be >= 0");
  if (phi.ell() != T.ell()) throw std::invalid_argument("check_phi_cancellation: Φ and T disagree on ell");
  PhiCancellationReport r;
  const int m = T.m();
  const std::size_t ell = static_cast<std::size_t>(T.ell());
  for (int j = 0; j < m; ++j) {
    const auto img = T.apply(delta_vector(m, j));
    double s = 0.0;
    for (int i = 0; i < m; ++i) {
      if (i == j) continue;
      s += phi(std::span<const double>(img).subspan(i * ell, ell));
    }
    r.sums.push_back(s);
    r.max_abs_sum = std::max(r.max_abs_sum, std::abs(s));
  }
  r.canceling = r.max_abs_sum <= tol;
  return r;
}

inline bool is_phi_canceling(const Operator& T, const PhiFunction& phi, double tol = kDefaultCancellationTolerance) {
  return check_phi_cancellation(T, phi, tol).canceling;
}

/// Depth-1 martingale with F_0 = λ and deviation λ·D_j: leaf j is λm, the rest 0.
inline Martingale delta_martingale(int m, int j, double lambda = 1.0) {
  if (!(lambda > 0.0)) throw std::invalid_argument("delta_martingale: scale must be > 0");
  const auto d = delta_vector(m, j);
  std::vector<double> leaves(m);
  for (int i = 0; i < m; ++i) leaves[i] = lambda * (1.0 + d[i]);
  return Martingale::scalar(m, 1, std::move(leaves));
}

/// Self-similar refinement: the delta split is repeated on the single
/// nonzero atom `depth` times. 𝔼|F_∞| = λ at every depth.
inline Martingale iterated_delta_martingale(int m, int j, int depth, double lambda = 1.0) {
  if (depth < 1) throw std::invalid_argument("iterated_delta_martingale: depth must be >= 1");
  (void)delta_vector(m, j);
  std::vector<double> leaves(ipow(static_cast<std::size_t>(m), depth), 0.0);
  // Leaf index of the path j, j, ..., j in J-order.
  std::size_t idx = 0;
  for (int n = 0; n < depth; ++n) idx = idx * m + j;
  leaves[idx] = lambda * std::pow(static_cast<double>(m), depth);
  return Martingale::scalar(m, depth, std::move(leaves));
}

/// |𝔼Φ(𝕋_α[F])| / (𝔼|F_∞|)^p for the iterated delta martingales of depth 1..max_depth.
inline std::vector<double> delta_refinement_ratios(const Operator& T, const PhiFunction& phi, double alpha,
                                                   int max_depth, int j = 0) {
  std::vector<double> out;
  for (int k = 1; k <= max_depth; ++k) out.push_back(phi_ratio(iterated_delta_martingale(T.m(), j, k), T, alpha, phi).ratio);
  return out;
}

}  // namespace fracmart

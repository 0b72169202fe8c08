#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace fracmart {

/// Ψ(z⃗) = (Σ z_j)^p - Σ z_j^p on the nonnegative orthant.
///
/// Evaluated as S^p Σ w_j (1 - w_j^{p-1}) with w = z/S, where 1 - w_j is taken
/// as R_j/S with R_j = Σ_{i≠j} z_i. Every summand is nonnegative in floating
/// point and the near-delta regime keeps full relative accuracy.
inline double psi(std::span<const double> z, double p) {
  if (!(p > 1.0)) throw std::invalid_argument("psi: p must be > 1");
  double S = 0.0;
  for (double v : z) {
    if (v < 0.0 || !std::isfinite(v)) throw std::domain_error("psi: coordinates must be finite and nonnegative");
    S += v;
  }
  if (S == 0.0) return 0.0;
  double acc = 0.0;
  for (std::size_t j = 0; j < z.size(); ++j) {
    if (z[j] == 0.0) continue;
    double rest = 0.0;
    for (std::size_t i = 0; i < z.size(); ++i)
      if (i != j) rest += z[i];
    const double w = z[j] / S;
    const double deficit = std::min(1.0, rest / S);  // 1 - w_j
    acc += w * -std::expm1((p - 1.0) * std::log1p(-deficit));
  }
  return std::pow(S, p) * acc;
}

inline double euclidean_norm(std::span<const double> y) {
  if (y.size() == 1) return std::abs(y[0]);
  double s = 0.0;
  for (double v : y) s += v * v;
  return std::sqrt(s);
}

/// ℳ_p(y, z) = min(|y|^{p-1} z, |y| z^{p-1}) with the Euclidean norm of y.
inline double m_p(double y_norm, double z, double p) {
  if (z < 0.0) throw std::domain_error("m_p: z must be >= 0");
  const double a = std::abs(y_norm);
  if (a == 0.0 || z == 0.0) return 0.0;
  if (p == 2.0) return a * z;
  return std::min(std::pow(a, p - 1.0) * z, a * std::pow(z, p - 1.0));
}

inline double m_p(std::span<const double> y, double z, double p) { return m_p(euclidean_norm(y), z, p); }

/// θ(t) = min(|t|, |t|^{p-1}).
inline double theta(double t, double p) {
  const double a = std::abs(t);
  if (a == 0.0) return 0.0;
  return std::min(a, std::pow(a, p - 1.0));
}

namespace detail {

// g(r) = θ(r) for r >= 0; linear below 1 when p <= 2, power below 1 otherwise.
inline double theta_radial_increment(double r, double d, double p) {
  // g(r + d) - g(r) for r >= 0, r + d >= 0, without cancellation.
  const double q = p - 1.0;
  const bool linear_low = p <= 2.0;
  auto piece_linear = [](double, double dd) { return dd; };
  auto piece_power = [q](double r0, double dd) {
    if (r0 == 0.0) return std::pow(dd, q);
    return std::pow(r0, q) * std::expm1(q * std::log1p(dd / r0));
  };
  auto piece = [&](double r0, double dd, bool low) {
    return (low == linear_low) ? piece_linear(r0, dd) : piece_power(r0, dd);
  };
  const double r2 = r + d;
  const bool low1 = r <= 1.0;
  const bool low2 = r2 <= 1.0;
  if (low1 == low2) return piece(r, d, low1);
  // Crosses r = 1: split at the breakpoint. 1 - r is exact near r = 1, and
  // d - (1 - r) avoids rounding r + d first.
  const double to_one = 1.0 - r;
  return piece(r, to_one, low1) + piece(1.0, d - to_one, low2);
}

}  // namespace detail

/// θ(a+b) - θ(a), accurate also when |b| << |a|.
inline double theta_increment(double a, double b, double p) {
  const double s = a + b;
  if (a == 0.0) return theta(s, p);
  const double sa = a > 0.0 ? 1.0 : -1.0;
  const double d = sa * b;  // |a+b| - |a| before sign changes
  if (std::abs(a) + d >= 0.0) {
    const double r = std::abs(a);
    return detail::theta_radial_increment(r, std::max(d, -r), p);
  }
  return theta(s, p) - theta(a, p);
}

/// Left-hand side of the three-point estimate
/// |(x3-x2)|x3-x2| + (x1-x3)|x1-x3| + (x2-x1)|x2-x1||.
///
/// The differences d = (x3-x2, x1-x3, x2-x1) sum to zero, so two of them share
/// a sign and the sum collapses to -2σ d_i d_j for that pair. Evaluating the
/// product avoids the cancellation in the three-term sum.
inline double slavin_lhs(std::span<const double> x) {
  if (x.size() != 3) throw std::invalid_argument("slavin_lhs: expected 3 values");
  const double d[3] = {x[2] - x[1], x[0] - x[2], x[1] - x[0]};
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i < 3; ++i) {
    const double prod = d[i] * d[(i + 1) % 3];
    if (prod >= 0.0) best = std::min(best, prod);
  }
  if (std::isinf(best)) {
    // Rounding broke the sign pattern; fall back to the direct sum.
    auto sq = [](double t) { return t * std::abs(t); };
    return std::abs(sq(d[0]) + sq(d[1]) + sq(d[2]));
  }
  return 2.0 * best;
}

inline double slavin_rhs(std::span<const double> z) {
  if (z.size() != 3) throw std::invalid_argument("slavin_rhs: expected 3 values");
  return 2.0 * (z[0] * z[1] + z[0] * z[2] + z[1] * z[2]);
}

struct SlavinResult {
  double lhs = 0.0;
  double rhs = 0.0;
  bool holds = false;
};

/// Requires |x_j| <= z_j. Equality is attained (z3 = 0, x = (z1, -z2, 0)), so
/// the comparison allows a relative rounding slack of 1e-12.
inline SlavinResult slavin_check(std::span<const double> x, std::span<const double> z) {
  if (x.size() != 3 || z.size() != 3) throw std::invalid_argument("slavin_check: expected 3-vectors");
  for (int j = 0; j < 3; ++j) {
    if (!(std::abs(x[j]) <= z[j])) throw std::domain_error("slavin_check: |x_j| > z_j at j = " + std::to_string(j));
  }
  SlavinResult r{slavin_lhs(x), slavin_rhs(z), false};
  r.holds = r.lhs <= r.rhs * (1.0 + 1e-12);
  return r;
}

}  // namespace fracmart

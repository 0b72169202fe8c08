#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace fracmart {

/// Relative tolerance on Σx_i when checking that an argument lies in V.
inline constexpr double kZeroSumTolerance = 1e-9;

/// Linear map T: V -> V ⊗ R^ell, where V = {x in R^m : Σ x_i = 0}.
///
/// Coefficients are stored densely as [j][channel][i]: the channel-c part of
/// output coordinate j is Σ_i coefficient(j, c, i) * x_i. The map is only ever
/// applied to zero-sum vectors; the constructor rejects coefficient arrays
/// whose image leaves V ⊗ R^ell.
class Operator {
 public:
  Operator(int m, int ell, std::vector<double> coefficients)
      : m_(m), ell_(ell), coefficients_(std::move(coefficients)) {
    if (m < 2) throw std::invalid_argument("Operator: m must be >= 2");
    if (ell < 1) throw std::invalid_argument("Operator: ell must be >= 1");
    const std::size_t expected = static_cast<std::size_t>(m) * m * ell;
    if (coefficients_.size() != expected) {
      throw std::invalid_argument("Operator: expected " + std::to_string(expected) +
                                  " coefficients, got " + std::to_string(coefficients_.size()));
    }
    double magnitude = 0.0;
    for (double c : coefficients_) {
      if (!std::isfinite(c)) throw std::invalid_argument("Operator: non-finite coefficient");
      magnitude = std::max(magnitude, std::abs(c));
    }
    // Image of the spanning set {e_i - e_{i+1}} must have zero column sums.
    for (int c = 0; c < ell; ++c) {
      for (int i = 0; i + 1 < m; ++i) {
        double sum = 0.0;
        for (int j = 0; j < m; ++j) sum += coefficient(j, c, i) - coefficient(j, c, i + 1);
        if (std::abs(sum) > 1e-12 * std::max(1.0, magnitude)) {
          throw std::invalid_argument("Operator: image of V is not contained in V ⊗ R^ell (channel " +
                                      std::to_string(c) + ")");
        }
      }
    }
  }

  int m() const { return m_; }
  int ell() const { return ell_; }
  std::span<const double> coefficients() const { return coefficients_; }

  double coefficient(int j, int channel, int i) const {
    return coefficients_[(static_cast<std::size_t>(j) * ell_ + channel) * m_ + i];
  }

  bool is_zero() const {
    for (double c : coefficients_)
      if (c != 0.0) return false;
    return true;
  }

  /// Writes T[x] into `out` (m * ell values, layout [j][channel]).
  void apply_into(std::span<const double> x, std::span<double> out) const {
    if (static_cast<int>(x.size()) != m_) throw std::invalid_argument("Operator::apply: size mismatch");
    if (out.size() != static_cast<std::size_t>(m_) * ell_)
      throw std::invalid_argument("Operator::apply: output size mismatch");
    double sum = 0.0;
    double abs_sum = 0.0;
    for (double v : x) {
      sum += v;
      abs_sum += std::abs(v);
    }
    if (std::abs(sum) > kZeroSumTolerance * abs_sum) {
      throw std::domain_error("Operator::apply: argument does not lie in V (sum = " + std::to_string(sum) + ")");
    }
    for (int j = 0; j < m_; ++j) {
      for (int c = 0; c < ell_; ++c) {
        const double* row = &coefficients_[(static_cast<std::size_t>(j) * ell_ + c) * m_];
        double acc = 0.0;
        for (int i = 0; i < m_; ++i) acc += row[i] * x[i];
        out[static_cast<std::size_t>(j) * ell_ + c] = acc;
      }
    }
  }

  /// T[x - mean(x)] for an arbitrary x, written as Σ_i c_ji x_i - mean(x) Σ_i c_ji.
  /// When the row sums vanish (T kills constants) the mean never enters, so
  /// differences of nearly equal x_i keep their relative accuracy.
  void apply_deviation_into(std::span<const double> x, std::span<double> out) const {
    if (static_cast<int>(x.size()) != m_) throw std::invalid_argument("Operator::apply: size mismatch");
    if (out.size() != static_cast<std::size_t>(m_) * ell_)
      throw std::invalid_argument("Operator::apply: output size mismatch");
    double mean = 0.0;
    for (double v : x) mean += v;
    mean /= m_;
    for (int j = 0; j < m_; ++j) {
      for (int c = 0; c < ell_; ++c) {
        const double* row = &coefficients_[(static_cast<std::size_t>(j) * ell_ + c) * m_];
        double acc = 0.0;
        double rowsum = 0.0;
        for (int i = 0; i < m_; ++i) {
          acc += row[i] * x[i];
          rowsum += row[i];
        }
        if (rowsum != 0.0) acc -= mean * rowsum;
        out[static_cast<std::size_t>(j) * ell_ + c] = acc;
      }
    }
  }

  std::vector<double> apply(std::span<const double> x) const {
    std::vector<double> out(static_cast<std::size_t>(m_) * ell_);
    apply_into(x, out);
    return out;
  }

  friend bool operator==(const Operator&, const Operator&) = default;

 private:
  int m_;
  int ell_;
  std::vector<double> coefficients_;
};

/// T[x]_j = x_{j+2} - x_{j+1} (indices mod m). For m = 3 this is
/// T[(x, y, z)] = (z - y, x - z, y - x).
inline Operator cyclic_difference_operator(int m = 3) {
  if (m < 3) throw std::invalid_argument("cyclic_difference_operator: m must be >= 3");
  std::vector<double> c(static_cast<std::size_t>(m) * m, 0.0);
  for (int j = 0; j < m; ++j) {
    c[static_cast<std::size_t>(j) * m + (j + 2) % m] += 1.0;
    c[static_cast<std::size_t>(j) * m + (j + 1) % m] -= 1.0;
  }
  return Operator(m, 1, std::move(c));
}

inline Operator zero_operator(int m, int ell = 1) {
  return Operator(m, ell, std::vector<double>(static_cast<std::size_t>(m) * m * ell, 0.0));
}

}  // namespace fracmart

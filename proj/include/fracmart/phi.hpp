#pragma once

#include <cmath>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace fracmart {

/// Positively p-homogeneous, locally Lipschitz integrand Φ: R^ell -> R.
///
/// Built-in integrands dispatch on a tag (they sit in the innermost loops of
/// the verification and dynamic-programming code); arbitrary integrands can
/// be supplied as a callable. `lipschitz_on_ball` is a Lipschitz constant of
/// the unscaled integrand on the closed unit ball.
class PhiFunction {
 public:
  enum class Kind { Zero, SignedSquare, SignedPower, AbsPower, Custom };
  using Evaluator = std::function<double(std::span<const double>)>;

  PhiFunction(std::string name, double p, int ell, double lipschitz_on_ball, Evaluator evaluator)
      : PhiFunction(Kind::Custom, std::move(name), p, ell, lipschitz_on_ball, 1.0) {
    evaluator_ = std::move(evaluator);
    if (!evaluator_) throw std::invalid_argument("PhiFunction: empty evaluator");
  }

  double operator()(std::span<const double> y) const {
    if (static_cast<int>(y.size()) != ell_) throw std::invalid_argument("PhiFunction: dimension mismatch");
    return ell_ == 1 ? (*this)(y[0]) : scale_ * raw(y);
  }

  /// Scalar fast path; requires ell == 1.
  double operator()(double t) const {
    switch (kind_) {
      case Kind::Zero:
        return 0.0;
      case Kind::SignedSquare:
        return scale_ * t * std::abs(t);
      case Kind::SignedPower:
        return scale_ * std::copysign(std::pow(std::abs(t), p_), t);
      case Kind::AbsPower:
        return scale_ * std::pow(std::abs(t), p_);
      case Kind::Custom:
        break;
    }
    return scale_ * evaluator_(std::span<const double>(&t, 1));
  }

  double p() const { return p_; }
  int ell() const { return ell_; }
  Kind kind() const { return kind_; }
  double scale() const { return scale_; }
  const std::string& name() const { return name_; }
  double lipschitz_on_ball() const { return std::abs(scale_) * lipschitz_; }

  /// s·Φ; the name records a sign flip as a leading '-'.
  PhiFunction scaled(double s) const {
    PhiFunction r = *this;
    r.scale_ *= s;
    if (s < 0.0) r.name_ = name_.starts_with('-') ? name_.substr(1) : "-" + name_;
    return r;
  }
  PhiFunction negated() const { return scaled(-1.0); }

 private:
  friend PhiFunction builtin_phi(std::string_view name, double p, int ell);

  PhiFunction(Kind kind, std::string name, double p, int ell, double lipschitz, double scale)
      : kind_(kind), name_(std::move(name)), p_(p), ell_(ell), lipschitz_(lipschitz), scale_(scale) {
    if (!(p_ > 1.0)) throw std::invalid_argument("PhiFunction: p must be > 1");
    if (ell_ < 1) throw std::invalid_argument("PhiFunction: ell must be >= 1");
  }

  // Vector-valued evaluation of the unscaled integrand.
  double raw(std::span<const double> y) const {
    double sq = 0.0;
    for (double v : y) sq += v * v;
    const double r = std::sqrt(sq);
    switch (kind_) {
      case Kind::Zero:
        return 0.0;
      case Kind::SignedSquare:
      case Kind::SignedPower:
        // |y|^{p-1} <y, e_1>
        return r == 0.0 ? 0.0 : std::pow(r, p_ - 1.0) * y[0];
      case Kind::AbsPower:
        return std::pow(r, p_);
      case Kind::Custom:
        break;
    }
    return evaluator_(y);
  }

  Kind kind_;
  std::string name_;
  double p_;
  int ell_;
  double lipschitz_;
  double scale_;
  Evaluator evaluator_;
};

/// Built-in integrands:
///   "signed-square"  Φ(t) = t|t| (p = 2; for ell > 1, |y| y_1)
///   "square"         Φ(y) = |y|^2 (p = 2)
///   "abs-p"          Φ(y) = |y|^p
///   "signed-power"   Φ(y) = |y|^{p-1} y_1, i.e. sign(t)|t|^p on the line
///   "zero"           Φ ≡ 0
/// A leading '-' negates the integrand.
inline PhiFunction builtin_phi(std::string_view name, double p = 2.0, int ell = 1) {
  if (name.starts_with('-')) return builtin_phi(name.substr(1), p, ell).negated();
  using K = PhiFunction::Kind;
  const std::string n(name);
  if (n == "signed-square") return PhiFunction(K::SignedSquare, n, 2.0, ell, 2.0, 1.0);
  if (n == "square") return PhiFunction(K::AbsPower, n, 2.0, ell, 2.0, 1.0);
  if (n == "abs-p") return PhiFunction(K::AbsPower, n, p, ell, p, 1.0);
  if (n == "signed-power") return PhiFunction(K::SignedPower, n, p, ell, p, 1.0);
  if (n == "zero") return PhiFunction(K::Zero, n, p, ell, 0.0, 1.0);
  throw std::invalid_argument("builtin_phi: unknown integrand '" + n + "'");
}

}  // namespace fracmart

#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>

#include "fracmart/operator.hpp"
#include "fracmart/phi.hpp"

namespace fracmart {

struct ModelParams {
  int m = 3;
  int ell = 1;
  double p = 2.0;
  double alpha = 0.5;

  void validate() const {
    if (m < 2) throw std::invalid_argument("ModelParams: m must be >= 2");
    if (ell < 1) throw std::invalid_argument("ModelParams: ell must be >= 1");
    if (!(p > 1.0) || !std::isfinite(p)) throw std::invalid_argument("ModelParams: p must lie in (1, inf)");
    if (!(alpha > 0.0)) throw std::invalid_argument("ModelParams: alpha must be > 0");
  }
};

inline double homogeneous_alpha(double p) { return (p - 1.0) / p; }

/// (T, Φ, p, α) bundle for everything that uses the Φ-inequality. The
/// inequality is only scale invariant for α = (p-1)/p, so that is enforced.
class InequalityContext {
 public:
  InequalityContext(Operator T, PhiFunction phi, double alpha)
      : T_(std::move(T)), phi_(std::move(phi)), alpha_(alpha) {
    params().validate();
    if (T_.ell() != phi_.ell()) throw std::invalid_argument("InequalityContext: Φ and T disagree on ell");
    const double expected = homogeneous_alpha(phi_.p());
    if (std::abs(alpha_ - expected) > 1e-12) {
      throw std::invalid_argument("InequalityContext: alpha = " + std::to_string(alpha_) +
                                  " but (p-1)/p = " + std::to_string(expected));
    }
  }

  InequalityContext(Operator T, PhiFunction phi)
      : InequalityContext(std::move(T), phi, homogeneous_alpha(phi.p())) {}

  const Operator& op() const { return T_; }
  const PhiFunction& phi() const { return phi_; }
  double p() const { return phi_.p(); }
  double alpha() const { return alpha_; }
  int m() const { return T_.m(); }
  int ell() const { return T_.ell(); }
  ModelParams params() const { return {T_.m(), T_.ell(), phi_.p(), alpha_}; }

  /// m^α, the factor applied to y across one split.
  double y_growth() const { return std::pow(static_cast<double>(T_.m()), alpha_); }

  InequalityContext with_phi(PhiFunction phi) const { return InequalityContext(T_, std::move(phi), alpha_); }

 private:
  Operator T_;
  PhiFunction phi_;
  double alpha_;
};

/// m = 3, T[(x,y,z)] = (z-y, x-z, y-x), Φ(t) = t|t|, p = 2, α = 1/2.
inline InequalityContext example_instance() {
  return InequalityContext(cyclic_difference_operator(3), builtin_phi("signed-square"), 0.5);
}

}  // namespace fracmart

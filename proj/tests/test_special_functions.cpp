#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "fracmart/lemmas.hpp"
#include "fracmart/phi.hpp"
#include "fracmart/rng.hpp"
#include "fracmart/special_functions.hpp"

using namespace fracmart;

TEST(Psi, Values) {
  for (double p : {1.5, 2.0, 3.0}) {
    EXPECT_EQ(psi(std::vector<double>{0.0, 1.0, 0.0}, p), 0.0);
    EXPECT_EQ(psi(std::vector<double>{5.0, 0.0, 0.0}, p), 0.0);
  }
  EXPECT_NEAR(psi(std::vector<double>{1.0, 1.0, 1.0}, 2.0), 6.0, 1e-14);
  EXPECT_THROW(psi(std::vector<double>{1.0, -0.1}, 2.0), std::domain_error);
}

TEST(Psi, NonnegativeOnSeededSamples) {
  for (int m : {2, 3, 5}) {
    for (double p : {1.5, 2.0, 3.0}) {
      const auto r = check_psi_nonnegative(m, p, 200000, 1234 + m);
      EXPECT_EQ(r.violations, 0u);
      EXPECT_GE(r.min_value, 0.0);
      EXPECT_LT(r.max_rel_error, 1e-9);
    }
  }
}

TEST(Mp, Values) {
  EXPECT_DOUBLE_EQ(m_p(3.0, 2.0, 2.0), 6.0);
  EXPECT_DOUBLE_EQ(m_p(-3.0, 2.0, 2.0), 6.0);
  EXPECT_NEAR(m_p(2.0, 1.0, 1.5), std::sqrt(2.0), 1e-15);
  EXPECT_EQ(m_p(0.0, 3.0, 1.5), 0.0);
  EXPECT_EQ(m_p(2.0, 0.0, 1.5), 0.0);
  std::vector<double> y{3.0, 4.0};
  EXPECT_DOUBLE_EQ(m_p(y, 1.0, 2.0), 5.0);
}

TEST(Mp, JointHomogeneity) {
  Rng rng(2);
  for (int i = 0; i < 1000; ++i) {
    const double p = rng.uniform(1.05, 3.0);
    const double y = rng.uniform(-5, 5);
    const double z = rng.uniform(0, 5);
    for (double lam : {0.5, 3.0}) {
      const double a = m_p(lam * y, lam * z, p);
      const double b = std::pow(lam, p) * m_p(y, z, p);
      EXPECT_NEAR(a, b, 1e-12 * std::max(std::abs(b), 1e-300));
    }
  }
}

TEST(Theta, Values) {
  EXPECT_EQ(theta(-2.5, 2.0), 2.5);
  EXPECT_DOUBLE_EQ(theta(4.0, 1.5), 2.0);
  EXPECT_DOUBLE_EQ(theta(0.25, 1.5), 0.25);
}

// Both displayed normalizations reproduce ℳ_p on a grid.
TEST(Theta, MinThetaNormalization) {
  int mismatch_a = 0;
  int mismatch_b = 0;
  for (double p : {1.25, 1.5, 1.75, 2.0, 2.5, 3.0}) {
    for (int i = 1; i <= 40; ++i) {
      for (int k = 1; k <= 40; ++k) {
        const double y = 0.05 * i * i;
        const double z = 0.05 * k * k;
        const double ref = m_p(y, z, p);
        const double a = std::pow(y, p) * theta(z / y, p);
        const double b = std::pow(z, p) * theta(y / z, p);
        if (std::abs(a - ref) > 1e-12 * ref) ++mismatch_a;
        if (std::abs(b - ref) > 1e-12 * ref) ++mismatch_b;
      }
    }
  }
  EXPECT_EQ(mismatch_a, 0);
  EXPECT_EQ(mismatch_b, 0);
  // The pair p = 3/2, y = 1, z = 4.
  EXPECT_DOUBLE_EQ(m_p(1.0, 4.0, 1.5), 2.0);
  EXPECT_DOUBLE_EQ(std::pow(4.0, 1.5) * theta(0.25, 1.5), 2.0);
  EXPECT_DOUBLE_EQ(theta(4.0, 1.5), 2.0);
}

TEST(Theta, IncrementMatchesDirectDifference) {
  Rng rng(17);
  for (int i = 0; i < 100000; ++i) {
    const double p = rng.uniform(1.01, 3.0);
    const double a = rng.uniform(-3, 3);
    const double b = rng.uniform(-3, 3);
    const double direct = theta(a + b, p) - theta(a, p);
    EXPECT_NEAR(theta_increment(a, b, p), direct, 1e-12);
  }
}

TEST(ThetaLemma, ScanAndValidate) {
  const auto r2 = theta_lemma_constant(2.0, 100000, 1);
  EXPECT_NEAR(r2.constant, 1.0, 1e-12);
  for (double p : {1.25, 1.5, 1.9}) {
    const auto r = theta_lemma_constant(p, 200000, 7);
    EXPECT_TRUE(std::isfinite(r.constant));
    EXPECT_GE(r.constant, 1.0);
    const auto v = validate_theta_lemma(p, r.constant, 200000, 99);
    EXPECT_EQ(v.violations, 0u) << "p=" << p << " worst " << v.worst_ratio;
  }
  EXPECT_THROW(theta_lemma_constant(2.5, 10, 1), std::domain_error);
}

TEST(ThetaLemma, SmallIncrementsAreOneLipschitz) {
  Rng rng(3);
  for (int i = 0; i < 100000; ++i) {
    const double p = rng.uniform(1.01, 2.0);
    const double a = rng.uniform(-10, 10);
    const double b = rng.uniform(-1, 1);
    if (b == 0.0) continue;
    EXPECT_LE(theta_lemma_ratio(a, b, p), 1.0 + 1e-12);
  }
}

// Closed form: for q = p - 1 <= 1 the sup is 1 (at a = 0); for q > 1 it is f(s*)
// with s* = 1 / ((1+ε)^{1/(q-1)} - 1).
double epsilon_oracle(double p, double eps) {
  const double q = p - 1.0;
  if (q <= 1.0) return 1.0;
  const double s = 1.0 / (std::pow(1.0 + eps, 1.0 / (q - 1.0)) - 1.0);
  return std::max(1.0, std::pow(s + 1.0, q) - (1.0 + eps) * std::pow(s, q));
}

TEST(EpsilonLemma, MatchesClosedForm) {
  for (double p : {1.5, 2.0, 2.5, 3.0, 4.0}) {
    for (double eps : {0.01, 0.1, 1.0}) {
      const auto r = epsilon_constant(p, eps, 100000, 5);
      EXPECT_NEAR(r.constant, epsilon_oracle(p, eps), 1e-9 * epsilon_oracle(p, eps)) << p << " " << eps;
      const auto v = validate_epsilon_lemma(p, eps, r.constant, 100000, 6);
      EXPECT_EQ(v.violations, 0u);
    }
  }
  // p = 2: the AM-GM value 1 + 1/ε is also admissible.
  EXPECT_LE(epsilon_constant(2.0, 0.5, 10000, 1).constant, 1.0 + 1.0 / 0.5);
  EXPECT_THROW(epsilon_constant(2.0, 0.0, 10, 1), std::domain_error);
}

TEST(Slavin, Examples) {
  const std::vector<double> t{0.3, 0.3, 0.3};
  EXPECT_EQ(slavin_check(t, std::vector<double>{1, 1, 1}).lhs, 0.0);
  const auto r = slavin_check(std::vector<double>{1, -1, 0}, std::vector<double>{1, 1, 0});
  // (0-(-1))|1| + (1-0)|1| + (-1-1)|-2| = 1 + 1 - 4
  EXPECT_DOUBLE_EQ(r.lhs, 2.0);
  EXPECT_DOUBLE_EQ(r.rhs, 2.0);
  EXPECT_TRUE(r.holds);
}

TEST(Slavin, RejectsOutsideDomain) {
  EXPECT_THROW(slavin_check(std::vector<double>{2.0 / 3, -1.0 / 3, -1.0 / 3}, std::vector<double>{1, 0, 0}),
               std::domain_error);
  // The delta split: x = (1, 0, 0), z = (1, 0, 0) gives zero.
  EXPECT_EQ(slavin_check(std::vector<double>{1, 0, 0}, std::vector<double>{1, 0, 0}).lhs, 0.0);
}

TEST(Slavin, ProductFormMatchesDirectSum) {
  Rng rng(31);
  for (int i = 0; i < 100000; ++i) {
    const std::vector<double> x{rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(-2, 2)};
    auto sq = [](double t) { return t * std::abs(t); };
    const double direct = std::abs(sq(x[2] - x[1]) + sq(x[0] - x[2]) + sq(x[1] - x[0]));
    EXPECT_NEAR(slavin_lhs(x), direct, 1e-12);
  }
}

TEST(Slavin, SampledConstantTwo) {
  const auto v = validate_slavin(200000, 42);
  EXPECT_EQ(v.violations, 0u);
  EXPECT_LE(v.worst_ratio, 2.0 * (1 + 1e-12));
}

TEST(PsiLocal, ScanThenValidate) {
  for (double p : {1.5, 2.0, 3.0}) {
    const auto r = psi_local_constant(3, p, 50000, 3);
    EXPECT_GT(r.constant, 0.0);
    // First-order behaviour near e_j gives ratios close to p.
    EXPECT_LE(r.constant, p + 1e-9);
    const auto v = validate_psi_local(3, p, r.constant * (1.0 - 1e-6), 50000, 4);
    EXPECT_EQ(v.violations, 0u) << "p=" << p << " worst " << v.worst_ratio << " c " << r.constant;
  }
}

TEST(I2, ExampleOperatorTriangleForm) {
  const auto T = cyclic_difference_operator();
  // p = 2: Σ|t_j| z_j <= Ψ exactly, by |x_i - x_k| <= z_i + z_k.
  const auto k = i2_constant(T, 2.0, 200000, 8);
  EXPECT_LE(k.constant, 1.0 + 1e-12);
  EXPECT_GT(k.constant, 0.99);
  const auto tri = i2_constant(T, 2.0, 200000, 8, true);
  EXPECT_LE(tri.constant, 2.0 + 1e-12);
  EXPECT_GT(tri.constant, 1.98);
  const auto k15 = i2_constant(T, 1.5, 200000, 9);
  EXPECT_TRUE(std::isfinite(k15.constant));
  const auto v = validate_i2(T, 1.5, k15.constant * 1.5, 100000, 10);
  EXPECT_EQ(v.violations, 0u);
}

TEST(MpLipschitz, BelowGradientBound) {
  for (double p : {1.25, 1.5, 2.0}) {
    const auto r = mp_lipschitz_constant(p, 200000, 12);
    // Where z <= |y|, |∇ℳ_p|² = r^{2p-2} (1-u)^{p-2} (1 - (1-(p-1)²) u) with
    // u = sin²φ; this is maximal at u = 0, so sup |∇ℳ_p| = 2^{p-1} on the
    // half disc of radius 2 (the other region is symmetric).
    const double bound = std::pow(2.0, p - 1.0);
    EXPECT_LE(r.constant, bound * (1.0 + 1e-6));
    EXPECT_GT(r.constant, 0.5 * bound);
  }
}

TEST(BuiltinPhi, Catalogue) {
  const auto s = builtin_phi("signed-square");
  EXPECT_EQ(s.p(), 2.0);
  EXPECT_EQ(s.lipschitz_on_ball(), 2.0);
  EXPECT_EQ(s(-3.0), -9.0);
  EXPECT_EQ(builtin_phi("-signed-square")(2.0), -4.0);
  EXPECT_EQ(builtin_phi("zero")(5.0), 0.0);
  EXPECT_NEAR(builtin_phi("abs-p", 1.5)(-4.0), 8.0, 1e-14);
  EXPECT_THROW(builtin_phi("cubic"), std::invalid_argument);
}

TEST(BuiltinPhi, HomogeneityAndLipschitz) {
  Rng rng(6);
  for (const char* name : {"signed-square", "square", "abs-p", "signed-power", "-signed-square"}) {
    const double p = 1.5;
    const auto phi = builtin_phi(name, p);
    const double pp = phi.p();
    for (int i = 0; i < 2000; ++i) {
      const double x = rng.uniform(-3, 3);
      const double t = rng.log_uniform(0.01, 100);
      EXPECT_NEAR(phi(t * x), std::pow(t, pp) * phi(x), 1e-12 * std::max(1.0, std::abs(std::pow(t, pp) * phi(x))));
      const double a = rng.uniform(-1, 1);
      const double b = rng.uniform(-1, 1);
      if (a != b) {
        EXPECT_LE(std::abs(phi(a) - phi(b)), phi.lipschitz_on_ball() * std::abs(a - b) * (1 + 1e-12));
      }
    }
  }
}

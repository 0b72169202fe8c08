#include <gtest/gtest.h>

#include <cmath>
#include <functional>
#include <vector>

#include "fracmart/context.hpp"
#include "fracmart/martingale.hpp"
#include "fracmart/operator.hpp"
#include "fracmart/phi.hpp"
#include "fracmart/rng.hpp"
#include "fracmart/transform.hpp"

using namespace fracmart;

namespace {

Martingale random_martingale(Rng& rng, int m, int depth) {
  std::vector<double> v(ipow(m, depth));
  for (double& x : v) x = rng.uniform(-3.0, 3.0);
  return Martingale::scalar(m, depth, v);
}

// Recursive oracle for the transform: walks the tree top-down, computing
// parent means from the leaves of each subtree directly.
void transform_oracle(const std::vector<double>& leaves, std::size_t first, std::size_t count, int m, int level,
                      double alpha, const std::function<std::vector<double>(const std::vector<double>&)>& T,
                      double acc, std::vector<double>& out) {
  if (count == 1) {
    out[first] = acc;
    return;
  }
  auto mean = [&](std::size_t b, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = b; i < b + n; ++i) s += leaves[i];
    return s / static_cast<double>(n);
  };
  const double parent = mean(first, count);
  const std::size_t sub = count / m;
  std::vector<double> dev(m);
  for (int k = 0; k < m; ++k) dev[k] = mean(first + k * sub, sub) - parent;
  const auto img = T(dev);
  const double damp = std::pow(static_cast<double>(m), -alpha * (level + 1));
  for (int k = 0; k < m; ++k)
    transform_oracle(leaves, first + k * sub, sub, m, level + 1, alpha, T, acc + damp * img[k], out);
}

std::vector<double> example_T(const std::vector<double>& x) { return {x[2] - x[1], x[0] - x[2], x[1] - x[0]}; }

}  // namespace

TEST(NodeValues, ArithmeticMean) {
  auto F = Martingale::scalar(3, 1, {6.0, 0.0, 3.0});
  EXPECT_DOUBLE_EQ(node_values(F, 0)[0], 3.0);
  auto G = Martingale::scalar(3, 1, {1.0, -1.0, 0.0});
  EXPECT_EQ(node_values(G, 0)[0], 0.0);
  auto C = Martingale::constant(3, 2.5, 3);
  for (int n = 0; n <= 3; ++n)
    for (double v : node_values(C, n)) EXPECT_EQ(v, 2.5);
}

TEST(NodeValues, LevelOutOfRange) {
  auto F = Martingale::scalar(3, 1, {6.0, 0.0, 3.0});
  EXPECT_THROW(node_values(F, 2), std::out_of_range);
  EXPECT_THROW(node_values(F, -1), std::out_of_range);
}

TEST(Martingale, RejectsBadShapes) {
  EXPECT_THROW(Martingale::scalar(3, 1, {1.0, 2.0}), std::invalid_argument);
  EXPECT_THROW(Martingale::scalar(1, 0, {1.0}), std::invalid_argument);
  EXPECT_THROW(Martingale::scalar(2, 1, {1.0, NAN}), std::invalid_argument);
}

TEST(Differences, TelescopeAndZeroSum) {
  Rng rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    auto F = random_martingale(rng, 3, 2);
    const auto f = martingale_differences(F);
    ASSERT_EQ(f.size(), 2u);
    const double F0 = node_values(F, 0)[0];
    for (std::size_t leaf = 0; leaf < 9; ++leaf) {
      const double rebuilt = F0 + f[0][leaf / 3] + f[1][leaf];
      EXPECT_NEAR(rebuilt, F.leaf(leaf), 1e-12);
    }
    for (std::size_t lv = 0; lv < f.size(); ++lv) {
      for (std::size_t a = 0; a < f[lv].size() / 3; ++a) {
        const double s = f[lv][3 * a] + f[lv][3 * a + 1] + f[lv][3 * a + 2];
        EXPECT_NEAR(s, 0.0, 1e-12);
      }
    }
  }
  auto G = Martingale::scalar(3, 1, {1.0, -1.0, 0.0});
  EXPECT_EQ(martingale_differences(G)[0], (std::vector<double>{1.0, -1.0, 0.0}));
  for (const auto& lv : martingale_differences(Martingale::constant(3, 4.0, 2)))
    for (double v : lv) EXPECT_EQ(v, 0.0);
}

TEST(L1, Values) {
  auto F = Martingale::scalar(3, 1, {1.0, -1.0, 0.0});
  EXPECT_NEAR(expected_abs(F), 2.0 / 3.0, 1e-15);
  const auto r = l1_norm(F);
  EXPECT_NEAR(r.sup_norm, 2.0 / 3.0, 1e-15);
  EXPECT_EQ(r.by_level.size(), 2u);
  EXPECT_TRUE(r.nondecreasing);
  EXPECT_EQ(l1_norm(Martingale::constant(3, -1.75, 2)).sup_norm, 1.75);
  auto P = Martingale::scalar(3, 1, {1.0, 4.0, 7.0});
  EXPECT_DOUBLE_EQ(expected_abs(P), node_values(P, 0)[0]);
}

TEST(L1, LevelsNondecreasingOnRandomTrees) {
  Rng rng(5);
  for (int trial = 0; trial < 300; ++trial) {
    auto F = random_martingale(rng, 2 + trial % 3, 1 + trial % 4);
    const auto r = l1_norm(F);
    EXPECT_TRUE(r.nondecreasing);
    EXPECT_NEAR(r.sup_norm, r.terminal, 1e-12 * r.terminal);
  }
}

TEST(Riesz, Examples) {
  auto C = Martingale::constant(3, 1.5, 2);
  for (const auto& lv : riesz_potential(C, 0.5))
    for (double v : lv) EXPECT_DOUBLE_EQ(v, 1.5);
  auto F = Martingale::scalar(3, 1, {1.0, -1.0, 0.0});
  const auto I = riesz_potential(F, 0.5);
  const double s = 1.0 / std::sqrt(3.0);
  EXPECT_NEAR(I[1][0], s, 1e-15);
  EXPECT_NEAR(I[1][1], -s, 1e-15);
  EXPECT_EQ(I[1][2], 0.0);
  auto G = Martingale::scalar(3, 1, {2.0, 5.0, 8.0});
  EXPECT_NEAR(riesz_potential(G, 60.0)[1][2], 5.0, 1e-12);
  EXPECT_THROW(riesz_potential(F, 0.0), std::invalid_argument);
}

TEST(Transform, HandWitness) {
  auto F = Martingale::scalar(3, 1, {1.0, -1.0, 0.0});
  const auto T = cyclic_difference_operator();
  const auto tr = fractional_transform(F, T, 0.5);
  const double s = 1.0 / std::sqrt(3.0);
  EXPECT_NEAR(tr.leaf_values[0], s, 1e-15);
  EXPECT_NEAR(tr.leaf_values[1], s, 1e-15);
  EXPECT_NEAR(tr.leaf_values[2], -2.0 * s, 1e-15);
  const auto phi = builtin_phi("signed-square");
  EXPECT_NEAR(phi_functional(F, T, 0.5, phi), -2.0 / 9.0, 1e-15);
  EXPECT_NEAR(phi_ratio(F, T, 0.5, phi).ratio, 0.5, 1e-15);
}

TEST(Transform, MatchesRecursiveOracle) {
  Rng rng(3);
  const auto T = cyclic_difference_operator();
  for (int trial = 0; trial < 30; ++trial) {
    auto F = random_martingale(rng, 3, 1 + trial % 4);
    const auto tr = fractional_transform(F, T, 0.5);
    std::vector<double> expect(F.leaf_count());
    std::vector<double> leaves(F.leaves().begin(), F.leaves().end());
    transform_oracle(leaves, 0, leaves.size(), 3, 0, 0.5, example_T, 0.0, expect);
    for (std::size_t k = 0; k < expect.size(); ++k) EXPECT_NEAR(tr.leaf_values[k], expect[k], 1e-12);
  }
}

TEST(Transform, ConstantAndRefinement) {
  const auto T = cyclic_difference_operator();
  for (double v : fractional_transform(Martingale::constant(3, 7.0, 3), T, 0.5).leaf_values) EXPECT_EQ(v, 0.0);
  auto F = Martingale::scalar(3, 1, {0.3, 2.0, -1.1});
  const auto a = fractional_transform(F, T, 0.5);
  const auto b = fractional_transform(refine_constant(F), T, 0.5);
  for (std::size_t k = 0; k < 9; ++k) EXPECT_EQ(b.leaf_values[k], a.leaf_values[k / 3]);
}

TEST(Transform, ZeroSumIncrements) {
  Rng rng(8);
  const auto T = cyclic_difference_operator();
  auto F = random_martingale(rng, 3, 4);
  const auto lv = transform_levels(F, T, 0.5);
  for (std::size_t k = 1; k < lv.size(); ++k) {
    for (std::size_t a = 0; a < lv[k - 1].size(); ++a) {
      double s = 0.0;
      double mag = 0.0;
      for (int j = 0; j < 3; ++j) {
        const double inc = lv[k][3 * a + j] - lv[k - 1][a];
        s += inc;
        mag += std::abs(inc);
      }
      EXPECT_LE(std::abs(s), 1e-12 * std::max(1.0, mag));
    }
  }
}

TEST(Transform, Linearity) {
  Rng rng(21);
  const auto T = cyclic_difference_operator();
  for (int trial = 0; trial < 20; ++trial) {
    auto F = random_martingale(rng, 3, 3);
    auto G = random_martingale(rng, 3, 3);
    const double a = rng.uniform(-2, 2);
    const double b = rng.uniform(-2, 2);
    std::vector<double> mix(27);
    for (std::size_t k = 0; k < 27; ++k) mix[k] = a * F.leaf(k) + b * G.leaf(k);
    const auto tf = fractional_transform(F, T, 0.5);
    const auto tg = fractional_transform(G, T, 0.5);
    const auto tm = fractional_transform(Martingale::scalar(3, 3, mix), T, 0.5);
    for (std::size_t k = 0; k < 27; ++k)
      EXPECT_NEAR(tm.leaf_values[k], a * tf.leaf_values[k] + b * tg.leaf_values[k], 1e-12);
  }
}

TEST(Transform, TrivialRootSplitDampsOnce) {
  Rng rng(4);
  const auto T = cyclic_difference_operator();
  const double alpha = 0.5;
  auto F = random_martingale(rng, 3, 2);
  const auto base = fractional_transform(F, T, alpha);
  const auto nested = fractional_transform(prepend_trivial_split(F), T, alpha);
  const auto lv = transform_levels(prepend_trivial_split(F), T, alpha);
  for (double v : lv[1]) EXPECT_EQ(v, 0.0);
  const double d = std::pow(3.0, -alpha);
  for (std::size_t k = 0; k < nested.leaf_values.size(); ++k)
    EXPECT_NEAR(nested.leaf_values[k], d * base.leaf_values[k % base.leaf_values.size()], 1e-12);
}

TEST(Transform, Errors) {
  auto F = Martingale::scalar(2, 1, {1.0, -1.0});
  EXPECT_THROW(fractional_transform(F, cyclic_difference_operator(), 0.5), std::invalid_argument);
  EXPECT_THROW(fractional_transform(Martingale::scalar(3, 1, {1, 2, 3}), cyclic_difference_operator(), -1.0),
               std::invalid_argument);
}

TEST(PhiFunctional, ConstantAndHomogeneity) {
  const auto ctx = example_instance();
  auto C = Martingale::constant(3, 2.0, 2);
  EXPECT_DOUBLE_EQ(phi_functional(C, ctx.op(), 0.5, ctx.phi(), 1.7), 1.7 * 1.7);
  Rng rng(9);
  for (int trial = 0; trial < 10; ++trial) {
    auto F = random_martingale(rng, 3, 3);
    const double y = rng.uniform(-1, 1);
    const double base = phi_functional(F, ctx.op(), 0.5, ctx.phi(), y);
    for (double lam : {0.5, 2.0, 7.3}) {
      const double scaled = phi_functional(F.scaled(lam), ctx.op(), 0.5, ctx.phi(), lam * y);
      EXPECT_NEAR(scaled, lam * lam * base, 1e-9 * std::max(1.0, std::abs(lam * lam * base)));
    }
  }
}

TEST(Operator, Validation) {
  // Constant rows annihilate V, so this is a valid (zero) map.
  EXPECT_NO_THROW(Operator(3, 1, std::vector<double>(9, 1.0)));
  // T[x] = (x_1, 0, 0) leaves V.
  EXPECT_THROW(Operator(3, 1, {1, 0, 0, 0, 0, 0, 0, 0, 0}), std::invalid_argument);
  EXPECT_THROW(Operator(3, 1, std::vector<double>(8, 0.0)), std::invalid_argument);
  const auto T = cyclic_difference_operator();
  EXPECT_EQ(T.apply(std::vector<double>{1.0, -1.0, 0.0}), (std::vector<double>{1.0, 1.0, -2.0}));
  EXPECT_THROW(T.apply(std::vector<double>{1.0, 0.0, 0.0}), std::domain_error);
}

TEST(Context, AlphaMustMatch) {
  EXPECT_THROW(InequalityContext(cyclic_difference_operator(), builtin_phi("signed-square"), 0.4),
               std::invalid_argument);
  EXPECT_NO_THROW(example_instance());
}

TEST(Glue, ChildrenDevelopIndependently) {
  auto a = Martingale::scalar(3, 1, {1.0, 2.0, 3.0});
  auto b = Martingale::constant(3, -1.0);
  auto g = glue({a, b, a});
  EXPECT_EQ(g.depth(), 2);
  EXPECT_DOUBLE_EQ(node_values(g, 1)[0], 2.0);
  EXPECT_DOUBLE_EQ(node_values(g, 1)[1], -1.0);
  EXPECT_EQ(g.leaf(8), 3.0);
}

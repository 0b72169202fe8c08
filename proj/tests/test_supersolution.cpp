#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "fracmart/context.hpp"
#include "fracmart/sampling.hpp"
#include "fracmart/supersolution.hpp"

using namespace fracmart;

namespace {

FitConfig small_fit() {
  FitConfig c;
  c.train_samples = 40000;
  c.validation_samples = 40000;
  c.seed = 11;
  return c;
}

}  // namespace

TEST(Supersolution, Values) {
  const auto ctx = example_instance();
  const Supersolution G(ctx, {1.0, 1.0, Branch::Min});
  EXPECT_DOUBLE_EQ(G(0.0, 1.0, 1.0), 3.0);
  // Φ(-2) = -4, ℳ_2(2, 3) = 6, z^2 = 9.
  EXPECT_DOUBLE_EQ(G(1.5, -2.0, 3.0), -4.0 + 6.0 + 9.0);
  EXPECT_DOUBLE_EQ(G(-3.0, -2.0, 3.0), G(0.0, -2.0, 3.0));
  EXPECT_THROW(G(1.1, 0.0, 1.0), std::domain_error);
  EXPECT_THROW(BellmanPoint(2.0, 0.0, 1.0), std::domain_error);
  EXPECT_DOUBLE_EQ(G(BellmanPoint(0.5, 1.0, 1.0)), 3.0);
  EXPECT_DOUBLE_EQ(G.upper_constant(), 1.0);
}

TEST(Supersolution, BranchRules) {
  const auto ctx = example_instance();
  EXPECT_THROW(Supersolution(ctx, {-1.0, 0.0, Branch::Min}), std::invalid_argument);
  EXPECT_EQ(default_branch(2.0), Branch::Min);
  EXPECT_EQ(default_branch(3.0), Branch::Sum);
  EXPECT_EQ(parse_branch("sum"), Branch::Sum);
  EXPECT_THROW(parse_branch("max"), std::invalid_argument);
  // At p = 2 the sum form is twice the min form.
  const Supersolution Gs(ctx, {1.0, 0.0, Branch::Sum});
  const Supersolution Gm(ctx, {1.0, 0.0, Branch::Min});
  EXPECT_DOUBLE_EQ(Gs.correction(2.0, 3.0), 2.0 * Gm.correction(2.0, 3.0));
  const auto ctx3 = InequalityContext(cyclic_difference_operator(), builtin_phi("signed-power", 3.0));
  EXPECT_THROW(Supersolution(ctx3, {1.0, 1.0, Branch::Min}), std::invalid_argument);
  // p = 3: |y|^2 z + |y| z^2.
  EXPECT_DOUBLE_EQ(Supersolution(ctx3, {1.0, 0.0, Branch::Sum}).correction(2.0, 3.0), 12.0 + 18.0);
}

TEST(Supersolution, ComponentGapMatchesDirect) {
  const auto ctx = example_instance();
  const Supersolution G(ctx, {5.0, 7.0, Branch::Min});
  const SplitSampler S(ctx.op(), ctx.alpha(), 3);
  for (std::size_t i = 0; i < 5000; ++i) {
    const auto s = S(i);
    const auto g = gap_components(G, s);
    const double scale = g.phi_scale + 5.0 * g.corr_scale + 7.0 * std::pow(s.z(), 2.0) * 2.0;
    EXPECT_NEAR(main_inequality_gap(G, s), main_inequality_gap_direct(G, s), 1e-12 * scale + 1e-300) << i;
    EXPECT_GE(g.zp, 0.0);
  }
}

TEST(Supersolution, GapHomogeneity) {
  const auto ctx = example_instance();
  const Supersolution G(ctx, {3.0, 2.0, Branch::Min});
  const SplitSampler S(ctx.op(), ctx.alpha(), 5);
  for (std::size_t i = 0; i < 2000; ++i) {
    const auto s = S(i);
    const auto g = gap_components(G, s);
    const double tol = 1e-11 * (g.phi_scale + 3.0 * g.corr_scale + 2.0 * g.zp);
    for (double lam : {0.1, 10.0}) {
      EXPECT_NEAR(main_inequality_gap(G, s.scaled(lam)), lam * lam * main_inequality_gap(G, s), lam * lam * tol) << i;
    }
  }
}

TEST(Supersolution, HandSplit) {
  // y = 0, x⃗ = (1,-1,0), z⃗ = |x⃗|: T x⃗ = (1,1,-2), child offsets likewise.
  const auto ctx = example_instance();
  SplitConfiguration s{{0.0}, {1.0, -1.0, 0.0}, {1.0, 1.0, 0.0}};
  const Supersolution G(ctx, {1.0, 1.0, Branch::Min});
  const auto g = gap_components(G, s);
  EXPECT_NEAR(g.phi, -(1.0 / 9.0) * (1.0 + 1.0 - 4.0), 1e-15);
  // ℳ_2 children: 1·1 + 1·1 + 2·0.
  EXPECT_NEAR(g.corr, -(2.0 / 9.0), 1e-15);
  // Ψ = (2)^2 - 2 = 2.
  EXPECT_NEAR(g.zp, 2.0 / 9.0, 1e-15);
}

TEST(Boundary, Holds) {
  const auto ctx = example_instance();
  for (double c1 : {0.0, 1.0})
    for (double c2 : {0.0, 4.0}) {
      const auto r = check_boundary_sampled(Supersolution(ctx, {c1, c2, Branch::Min}), 5000, 2);
      EXPECT_EQ(r.violations, 0u);
      EXPECT_GE(r.min_margin, -1e-12);
    }
  // Naked C1 = C2 = 0 meets the boundary with equality.
  const auto r0 = check_boundary_sampled(Supersolution(ctx, {0.0, 0.0, Branch::Min}), 1000, 2);
  EXPECT_EQ(r0.min_margin, 0.0);
}

TEST(Verify, ZeroConstantsViolate) {
  const auto ctx = example_instance();
  VerifyConfig c;
  c.samples = 20000;
  const auto r = verify_supersolution(Supersolution(ctx, {0.0, 0.0, Branch::Min}), c);
  EXPECT_TRUE(r.cancellation_ok);
  EXPECT_FALSE(r.pass);
  EXPECT_GT(r.violations, 0u);
  ASSERT_FALSE(r.worst.empty());
  EXPECT_LT(r.worst.front().normalized, 0.0);
  for (std::size_t k = 1; k < r.worst.size(); ++k) EXPECT_LE(r.worst[k - 1].normalized, r.worst[k].normalized);
  // Reported splits regenerate from their index.
  const SplitSampler S(ctx.op(), ctx.alpha(), c.seed);
  EXPECT_EQ(S(r.worst.front().index).xs, r.worst.front().split.xs);
}

TEST(Verify, ThreadCountInvariant) {
  const auto ctx = example_instance();
  const Supersolution G(ctx, {1.0, 1.0, Branch::Min});
  VerifyConfig c;
  c.samples = 30000;
  c.threads = 1;
  const auto a = verify_supersolution(G, c);
  c.threads = 4;
  const auto b = verify_supersolution(G, c);
  EXPECT_EQ(a.violations, b.violations);
  EXPECT_EQ(a.min_gap, b.min_gap);
  ASSERT_EQ(a.worst.size(), b.worst.size());
  for (std::size_t k = 0; k < a.worst.size(); ++k) EXPECT_EQ(a.worst[k].index, b.worst[k].index);
}

TEST(Verify, NonCancelingRejectedUpFront) {
  const auto ctx = example_instance().with_phi(builtin_phi("square"));
  const auto r = verify_supersolution(Supersolution(ctx, {100.0, 100.0, Branch::Min}), {});
  EXPECT_FALSE(r.pass);
  EXPECT_FALSE(r.cancellation_ok);
  EXPECT_NE(r.message.find("cancellation"), std::string::npos);
}

TEST(Fit, Grids) {
  const auto g0 = c2_grid(0.0, 2.0, -2, 2);
  EXPECT_EQ(g0, (std::vector<double>{0.0, 0.25, 0.5, 1.0, 2.0, 4.0}));
  const auto g = c2_grid(4.0, 1.5, 0, 0);
  // 4^{0.5}, 4^1, 4^{1.5} and 0.
  EXPECT_EQ(g, (std::vector<double>{0.0, 2.0, 4.0, 8.0}));
  EXPECT_EQ(c1_grid(-1, 1), (std::vector<double>{0.0, 0.5, 1.0, 2.0}));
}

TEST(Fit, ExampleBothSigns) {
  const auto ctx = example_instance();
  const auto t = fit_two_sided(ctx, small_fit());
  ASSERT_TRUE(t.plus.success) << t.plus.message;
  ASSERT_TRUE(t.minus.success) << t.minus.message;
  EXPECT_GT(t.plus.params.C1, 0.0);
  EXPECT_TRUE(std::isfinite(t.upper_constant));
  // Refit result verifies on a fresh sample.
  VerifyConfig v;
  v.samples = 50000;
  v.seed = 999;
  EXPECT_TRUE(verify_supersolution(Supersolution(ctx, t.plus.params), v).pass);
  // Lexicographic minimality: halving C1 must not pass with the reported grid C2.
  if (t.plus.params.C1 > std::ldexp(1.0, -4)) {
    SupersolutionParams q = t.plus.params;
    q.C1 /= 2.0;
    VerifyConfig tr;
    tr.samples = 40000;
    tr.seed = t.plus.train_seed;
    EXPECT_FALSE(verify_supersolution(Supersolution(ctx, q), tr).pass);
  }
}

TEST(Fit, DeterministicInSeed) {
  const auto ctx = example_instance();
  auto c = small_fit();
  c.train_samples = c.validation_samples = 20000;
  const auto a = fit_constants(ctx, c);
  c.threads = 3;
  const auto b = fit_constants(ctx, c);
  EXPECT_EQ(a.success, b.success);
  EXPECT_EQ(a.params.C1, b.params.C1);
  EXPECT_EQ(a.params.C2, b.params.C2);
}

TEST(Fit, SquareFails) {
  const auto ctx = example_instance().with_phi(builtin_phi("square"));
  auto c = small_fit();
  const auto pre = fit_constants(ctx, c);
  EXPECT_FALSE(pre.success);
  EXPECT_NE(pre.message.find("cancellation"), std::string::npos);
  c.require_cancellation = false;
  c.c1_max_exp = 10;
  const auto r = fit_constants(ctx, c);
  EXPECT_FALSE(r.success);
  EXPECT_GT(r.candidates_tried, 0u);
}

TEST(Process, SupermartingaleOnRandomTrees) {
  const auto ctx = example_instance();
  const auto fit = fit_constants(ctx, small_fit());
  ASSERT_TRUE(fit.success);
  const Supersolution G(ctx, fit.params);
  Rng rng(42);
  for (int t = 0; t < 60; ++t) {
    const auto F = random_martingale(3, 1 + t % 4, rng);
    const double y0 = (t % 3 == 0) ? 0.0 : rng.normal();
    const auto r = supermartingale_check(G, F, y0);
    EXPECT_TRUE(r.pass) << t << " min decrement " << r.min_decrement;
    EXPECT_LT(r.max_component_mismatch, 1e-10);
    for (std::size_t n = 1; n < r.process_means.size(); ++n)
      EXPECT_LE(r.process_means[n], r.process_means[n - 1] + 1e-9 * (1.0 + std::abs(r.process_means[n - 1])));
    const auto b = bellman_chain_bound(G, F);
    if (y0 == 0.0) {
      EXPECT_TRUE(b.holds);
    }
  }
}

TEST(Process, ChainBoundHandCase) {
  const auto ctx = example_instance();
  const auto F = Martingale::scalar(3, 1, {1.0, -1.0, 0.0});
  const auto b = bellman_chain_bound(Supersolution(ctx, {0.0, 3.0, Branch::Min}), F);
  // 𝕋 = 3^{-1/2}(1,1,-2): EΦ = (1/3)(1/3)(1+1-4) = -2/9; E|F| = 2/3.
  EXPECT_NEAR(b.lhs, -2.0 / 9.0, 1e-15);
  EXPECT_NEAR(b.rhs, 3.0 * 4.0 / 9.0, 1e-15);
  EXPECT_TRUE(b.holds);
}

TEST(Supersolution, DeltaAndConstantSplits) {
  const auto ctx = example_instance();
  for (auto [c1, c2] : {std::pair{0.0, 0.0}, std::pair{1.0, 5.0}, std::pair{8.0, 16.0}}) {
    const Supersolution G(ctx, {c1, c2, Branch::Min});
    // x_1 = z_1 = 3, rest zero: T[D_1] = (0, 3, -3) and Φ(3) + Φ(-3) = 0.
    const SplitConfiguration delta{{0.0}, {3.0, 0.0, 0.0}, {3.0, 0.0, 0.0}};
    EXPECT_NEAR(main_inequality_gap(G, delta), 0.0, 1e-14 * (1.0 + c2));
    // Constant split with y = 0: (1 - m^{1-p}) C2 z^p.
    const SplitConfiguration flat{{0.0}, {0.4, 0.4, 0.4}, {1.5, 1.5, 1.5}};
    EXPECT_NEAR(main_inequality_gap(G, flat), (2.0 / 3.0) * c2 * 2.25, 1e-14 * (1.0 + c2));
  }
}

TEST(Verify, ZeroPhi) {
  const InequalityContext ctx(cyclic_difference_operator(), builtin_phi("zero"));
  VerifyConfig c;
  c.samples = 20000;
  EXPECT_TRUE(verify_supersolution(Supersolution(ctx, {0.0, 1.0, Branch::Min}), c).pass);
  auto f = small_fit();
  f.train_samples = f.validation_samples = 10000;
  const auto r = fit_constants(ctx, f);
  ASSERT_TRUE(r.success);
  EXPECT_EQ(r.params.C1, 0.0);
  EXPECT_EQ(r.params.C2, 0.0);
}

TEST(Fit, DoublingPhiNeedsNoLessC1) {
  const auto ctx = example_instance();
  auto f = small_fit();
  f.train_samples = f.validation_samples = 20000;
  const auto a = fit_constants(ctx, f);
  const auto b = fit_constants(ctx.with_phi(ctx.phi().scaled(2.0)), f);
  ASSERT_TRUE(a.success);
  ASSERT_TRUE(b.success);
  EXPECT_GE(b.params.C1, a.params.C1);
}

TEST(Process, PhiAloneIsNoSupermartingale) {
  const auto ctx = example_instance();
  const Supersolution G(ctx, {0.0, 0.0, Branch::Min});
  Rng rng(8);
  std::size_t bad = 0;
  for (int t = 0; t < 100; ++t) bad += supermartingale_check(G, random_martingale(3, 2, rng), rng.normal()).violations;
  EXPECT_GT(bad, 0u);
  // Constant martingale: only the Φ part survives the m^{-(p-1)n} weight, so
  // the naked Φ process is constant and the corrected one strictly decreasing.
  const auto F = Martingale::constant(3, 0.7, 3);
  const auto r0 = supermartingale_check(G, F, 0.3);
  EXPECT_TRUE(r0.pass);
  for (double v : r0.process_means) EXPECT_NEAR(v, r0.process_means[0], 1e-12 * std::abs(r0.process_means[0]));
  const auto r = supermartingale_check(Supersolution(ctx, {8.0, 16.0, Branch::Min}), F, 0.3);
  EXPECT_TRUE(r.pass);
  for (std::size_t n = 1; n < r.process_means.size(); ++n) EXPECT_LT(r.process_means[n], r.process_means[n - 1]);
}

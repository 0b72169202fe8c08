#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "fracmart/bellman_dp.hpp"
#include "fracmart/bracket.hpp"
#include "fracmart/cancellation.hpp"
#include "fracmart/context.hpp"
#include "fracmart/search.hpp"

using namespace fracmart;

namespace {

SearchConfig quick_search(int restarts = 4, int steps = 2000) {
  SearchConfig c;
  c.restarts = restarts;
  c.steps = steps;
  c.depth_max = 3;
  c.seed = 5;
  return with_hand_start(c);
}

}  // namespace

TEST(Ratio, HandAndDegenerateCases) {
  const auto ctx = example_instance();
  const auto e = evaluate_ratio(ctx, hand_witness());
  ASSERT_TRUE(e);
  EXPECT_NEAR(e->ratio, 0.5, 1e-15);
  EXPECT_NEAR(e->phi_mean, -2.0 / 9.0, 1e-15);
  EXPECT_NEAR(e->l1, 2.0 / 3.0, 1e-15);
  EXPECT_EQ(evaluate_ratio(ctx, Martingale::constant(3, 2.0, 2))->ratio, 0.0);
  EXPECT_FALSE(evaluate_ratio(ctx, Martingale::constant(3, 0.0, 1)));
  EXPECT_NEAR(evaluate_ratio(ctx, delta_martingale(3, 1))->ratio, 0.0, 1e-15);
  for (double l : {0.01, 3.0, 1e4}) EXPECT_NEAR(evaluate_ratio(ctx, hand_witness().scaled(l))->ratio, 0.5, 1e-14);
}

TEST(Search, FindsAtLeastTheHandWitness) {
  const auto ctx = example_instance();
  const auto s = adversarial_search(ctx, quick_search());
  EXPECT_GE(s.best_ratio, 0.5);
  EXPECT_LE(s.witness.depth(), 3);
  const auto e = evaluate_ratio(ctx, s.witness);
  ASSERT_TRUE(e);
  EXPECT_EQ(e->ratio, s.best_ratio);
  EXPECT_EQ(e->phi_mean, s.phi_mean);
}

TEST(Search, Reproducible) {
  const auto ctx = example_instance();
  auto c = quick_search();
  const auto a = adversarial_search(ctx, c);
  c.threads = 3;
  const auto b = adversarial_search(ctx, c);
  EXPECT_EQ(a.best_ratio, b.best_ratio);
  EXPECT_EQ(a.witness, b.witness);
  c.seed = 6;
  const auto d = adversarial_search(ctx, c);
  EXPECT_FALSE(d.witness == a.witness);
}

TEST(Search, MonotoneInRestarts) {
  const auto ctx = example_instance();
  const auto a = adversarial_search(ctx, quick_search(3));
  const auto b = adversarial_search(ctx, quick_search(6));
  EXPECT_GE(b.best_ratio, a.best_ratio);
  for (int r = 0; r < 3; ++r) EXPECT_EQ(a.restarts[r].best_ratio, b.restarts[r].best_ratio);
}

TEST(Search, ConfigChecks) {
  const auto ctx = example_instance();
  SearchConfig c;
  c.depth_max = 0;
  EXPECT_THROW(adversarial_search(ctx, c), std::invalid_argument);
  c = SearchConfig{};
  c.starts.push_back(Martingale::constant(2, 1.0, 1));
  EXPECT_THROW(adversarial_search(ctx, c), std::invalid_argument);
}

TEST(Bracket, ConsistentOnSmallRun) {
  const auto ctx = example_instance();
  DpConfig dc;
  dc.geometry = {11, 21, 4.0};
  dc.iters = 3;
  const auto dp = dp_run(ctx, dc);
  const auto s = adversarial_search(ctx, quick_search());
  const SupersolutionParams params{8.0, 16.0, Branch::Min};
  const auto r = bracket_report(ctx, dp.final_slice(), s, params);
  EXPECT_TRUE(r.pass);
  EXPECT_EQ(r.z0_max_deviation, 0.0);
  EXPECT_EQ(r.boundary_violations, 0u);
  EXPECT_EQ(r.sandwich_violations, 0u);
  EXPECT_EQ(r.cells_checked, dc.geometry.cells());
  EXPECT_GE(r.lower_dp, 0.5);
  EXPECT_DOUBLE_EQ(r.upper, 16.0);
  EXPECT_LE(r.lower_search, r.upper);
}

TEST(Bracket, FlagsDpAboveG) {
  const auto ctx = example_instance();
  DpConfig dc;
  dc.geometry = {5, 7, 3.0};
  dc.iters = 1;
  auto slice = dp_run(ctx, dc).final_slice();
  const auto c = slice.geometry.index(2, 3);
  slice.values[c] = 1e3;
  const auto r = bracket_report(ctx, slice, SearchState{}, {1.0, 1.0, Branch::Min});
  EXPECT_FALSE(r.pass);
  EXPECT_EQ(r.sandwich_violations, 1u);
  ASSERT_EQ(r.violations.size(), 1u);
  EXPECT_EQ(r.violations[0].cell, c);
  // An upper constant below the lower bounds is reported as unordered.
  const auto q = bracket_report(ctx, dp_run(ctx, dc).final_slice(), SearchState{}, {0.0, 0.0, Branch::Min}, 0.1);
  EXPECT_FALSE(q.ordered);
}

TEST(Bracket, InstanceMismatch) {
  const auto ctx = example_instance();
  SearchState s;
  s.best_restart = 0;
  s.witness = Martingale::constant(2, 1.0, 1);
  GridSlice slice(GridGeometry{5, 7, 3.0});
  EXPECT_THROW(bracket_report(ctx, slice, s, {1.0, 1.0, Branch::Min}), std::invalid_argument);
}

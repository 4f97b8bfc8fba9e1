#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "rshape/shaping.hpp"
#include "support.hpp"

namespace rshape {
namespace {

TEST(PotentialShaping, ConstantPotentialUndiscountedIsZero) {
  EXPECT_EQ(potential_shaping_reward(3.5, 3.5, 1.0), 0.0);
}

TEST(PotentialShaping, HandValues) {
  EXPECT_DOUBLE_EQ(potential_shaping_reward(0.0, 1.0, 0.99), 0.99);
  EXPECT_NEAR(potential_shaping_reward(10.0, 10.0, 0.99), -0.1, 1e-12);
}

SubgoalSeries two_cells() { return SubgoalSeries({CellSubgoal{10}, CellSubgoal{20}}); }

TEST(Filter, AdvancesOnlyOnTheNextSubgoal) {
  const auto series = two_cells();
  ShapingContext ctx(series.size());
  EXPECT_EQ(filter(EnvState::discrete(10), ctx, series), 1u);
  EXPECT_EQ(filter(EnvState::discrete(11), ctx, series), 0u);
  EXPECT_EQ(filter(EnvState::discrete(20), ctx, series), 0u);
  EXPECT_EQ(ctx.z, 0u);
  EXPECT_EQ(ctx.cursor.next_index(), 1u);
}

TEST(Filter, SaturatedContextStays) {
  const auto series = two_cells();
  ShapingContext ctx(series.size());
  ctx.cursor.advance(EnvState::discrete(10), series);
  ctx.cursor.advance(EnvState::discrete(20), series);
  ctx.z = 2;
  EXPECT_EQ(filter(EnvState::discrete(10), ctx, series), 2u);
  EXPECT_EQ(filter(EnvState::discrete(20), ctx, series), 2u);
}

TEST(Accumulate, ZeroRewardsGiveZero) {
  ShapingContext ctx;
  for (int i = 0; i < 17; ++i) accumulate(ctx, 0.0, 0.99);
  EXPECT_EQ(ctx.r_h, 0.0);
  EXPECT_EQ(ctx.t, 17u);
}

TEST(Accumulate, FirstRewardIsUndiscounted) {
  ShapingContext ctx;
  for (const double r : {0.0, 0.0, 1.0}) accumulate(ctx, r, 0.99);
  EXPECT_NEAR(ctx.r_h, 0.9801, 1e-15);

  ShapingContext ones;
  for (int i = 0; i < 3; ++i) accumulate(ones, 1.0, 0.9);
  EXPECT_NEAR(ones.r_h, 2.71, 1e-15);
}

TEST(AbstractValueTable, SingleTdStep) {
  AbstractValueTable table(3, 0.01, 0.99);
  table.update(0, 1, 1.0, 4);
  EXPECT_DOUBLE_EQ(table(0), 0.01);
}

TEST(AbstractValueTable, ZeroTdErrorLeavesValue) {
  AbstractValueTable table(3, 0.01, 0.99);
  table.update(1, 2, 0.0, 5);
  EXPECT_EQ(table(1), 0.0);
}

TEST(AbstractValueTable, TerminalUpdateBootstrapsWithZero) {
  AbstractValueTable table(3, 0.01, 0.99);
  table.values() << 0.0, 0.0, 50.0;
  table.update_terminal(1, 1.0);
  EXPECT_DOUBLE_EQ(table(1), 0.01);
  EXPECT_EQ(table(2), 50.0);
}

TEST(AbstractValueTable, EverySeriesLengthGivesNPlusOneZeros) {
  for (std::size_t n = 1; n <= 12; ++n) {
    std::vector<SubgoalSpec> specs;
    for (std::size_t i = 0; i < n; ++i) specs.push_back(CellSubgoal{i + 1});
    SubgoalShaper shaper(SubgoalSeries(specs), 0.01, 0.99);
    ASSERT_EQ(shaper.table().size(), n + 1);
    ASSERT_TRUE(shaper.table().values().isZero(0.0));
  }
}

DynamicShapingOptions options() {
  DynamicShapingOptions o;
  o.gamma = 0.99;
  return o;
}

TEST(DynamicShaping, NoTransitionWithZeroPotentialGivesZero) {
  const auto series = two_cells();
  ShapingContext ctx(series.size());
  AbstractValueTable table(3, 0.01, 0.99);
  const auto r = dynamic_shaping_step(ctx, table, series, EnvState::discrete(4), 0.0, false, options());
  EXPECT_EQ(r.shaping, 0.0);
  EXPECT_FALSE(r.closed.has_value());
}

TEST(DynamicShaping, TransitionUsesTheNextAbstractValue) {
  const auto series = two_cells();
  ShapingContext ctx(series.size());
  AbstractValueTable table(3, 0.01, 0.99);
  table.values() << 0.0, 0.5, 0.0;
  auto o = options();
  o.learn = false;
  const auto r = dynamic_shaping_step(ctx, table, series, EnvState::discrete(10), 0.0, false, o);
  EXPECT_DOUBLE_EQ(r.shaping, 0.495);
  EXPECT_EQ(ctx.z, 1u);
  EXPECT_EQ(ctx.t, 0u);
  EXPECT_EQ(ctx.r_h, 0.0);
  EXPECT_EQ(ctx.cursor.next_index(), 2u);
}

TEST(DynamicShaping, PotentialIsComputedAfterTheAbstractUpdate) {
  const auto series = two_cells();
  ShapingContext ctx(series.size());
  AbstractValueTable table(3, 0.5, 0.99);
  table.values() << 0.0, 0.5, 0.0;
  // V(0) <- 0 + 0.5 (0 + 0.99 * 0.5 - 0) = 0.2475 before F is formed
  const auto r = dynamic_shaping_step(ctx, table, series, EnvState::discrete(10), 0.0, false, options());
  EXPECT_DOUBLE_EQ(table(0), 0.2475);
  EXPECT_DOUBLE_EQ(r.shaping, 0.99 * 0.5 - 0.2475);

  ShapingContext ctx2(series.size());
  AbstractValueTable table2(3, 0.5, 0.99);
  table2.values() << 0.0, 0.5, 0.0;
  auto pre = options();
  pre.pre_update_potential = true;
  const auto r2 = dynamic_shaping_step(ctx2, table2, series, EnvState::discrete(10), 0.0, false, pre);
  EXPECT_DOUBLE_EQ(r2.shaping, 0.495);
}

TEST(DynamicShaping, InSegmentStepCostsOneMinusGammaOfV) {
  const auto series = two_cells();
  ShapingContext ctx(series.size());
  AbstractValueTable table(3, 0.01, 0.99);
  table.values() << 10.0, 0.0, 0.0;
  const auto r = dynamic_shaping_step(ctx, table, series, EnvState::discrete(4), 0.0, false, options());
  EXPECT_NEAR(r.shaping, -0.1, 1e-12);
}

TEST(DynamicShaping, TerminalAtGoalUpdatesTowardTheReward) {
  const auto series = SubgoalSeries({CellSubgoal{10}});
  ShapingContext ctx(series.size());
  AbstractValueTable table(2, 0.01, 0.99);
  dynamic_shaping_step(ctx, table, series, EnvState::discrete(10), 0.0, false, options());
  ASSERT_EQ(ctx.z, 1u);
  const auto r = dynamic_shaping_step(ctx, table, series, EnvState::discrete(99), 1.0, true, options());
  ASSERT_TRUE(r.closed.has_value());
  EXPECT_TRUE(r.closed->terminal);
  EXPECT_DOUBLE_EQ(table(1), 0.01);
  EXPECT_DOUBLE_EQ(r.shaping, -0.01);  // phi(terminal) = 0
}

TEST(DynamicShaping, TerminalBeforeTheLastSubgoalLeavesTheTableAlone) {
  const auto series = two_cells();
  ShapingContext ctx(series.size());
  AbstractValueTable table(3, 0.01, 0.99);
  dynamic_shaping_step(ctx, table, series, EnvState::discrete(99), 1.0, true, options());
  EXPECT_TRUE(table.values().isZero(0.0));

  ShapingContext ctx2(series.size());
  auto every = options();
  every.terminal_update_final_only = false;
  dynamic_shaping_step(ctx2, table, series, EnvState::discrete(99), 1.0, true, every);
  EXPECT_DOUBLE_EQ(table(0), 0.01);
}

TEST(DynamicShaping, ZeroTableGivesAnIdenticallyZeroStream) {
  const auto series = two_cells();
  ShapingContext ctx(series.size());
  AbstractValueTable table(3, 0.01, 0.99);
  auto o = options();
  o.learn = false;
  Rng rng(3);
  for (int t = 0; t < 500; ++t) {
    const auto r = dynamic_shaping_step(ctx, table, series, EnvState::discrete(rng() % 25), 0.0, t == 499, o);
    ASSERT_EQ(r.shaping, 0.0);
  }
}

TEST(Nrs, PotentialIsEtaOnSubgoals) {
  NrsPotential grid{1.0, {CellSubgoal{27}, CellSubgoal{74}}};
  EXPECT_EQ(grid(EnvState::discrete(27)), 1.0);
  EXPECT_EQ(grid(EnvState::discrete(28)), 0.0);
  NrsPotential pin{10000.0, {CircleSubgoal{{0.5, 0.5}, 0.04}}};
  EXPECT_EQ(pin(EnvState::continuous({0.51, 0.5, 0.3, 0.3})), 10000.0);
  EXPECT_EQ(pin(EnvState::continuous({0.7, 0.5, 0.0, 0.0})), 0.0);
}

TEST(StaticAggregation, WithinRoomCostsOneMinusGammaOfV) {
  StaticAggregationShaper shaper({0, 0, 1, 1}, 0.01, 0.99, 0.99);
  shaper.table().values() << 2.0, 5.0;
  shaper.begin_episode(EnvState::discrete(0));
  const double f = shaper.shape({EnvState::discrete(0), ActionId{0}, 0.0, EnvState::discrete(1), false, false});
  EXPECT_NEAR(f, (0.99 - 1.0) * 2.0, 1e-12);
}

TEST(StaticAggregation, CrossingRoomsTriggersAnAbstractUpdate) {
  StaticAggregationShaper shaper({0, 0, 1, 1}, 0.5, 0.99, 0.99);
  shaper.table().values() << 0.0, 4.0;
  shaper.begin_episode(EnvState::discrete(0));
  shaper.shape({EnvState::discrete(0), ActionId{0}, 0.0, EnvState::discrete(1), false, false});
  const double f = shaper.shape({EnvState::discrete(1), ActionId{0}, 0.0, EnvState::discrete(2), false, false});
  // k = 2 steps in room 0: V(0) <- 0.5 * 0.99^2 * 4
  EXPECT_NEAR(shaper.table()(0), 0.5 * 0.99 * 0.99 * 4.0, 1e-12);
  EXPECT_NEAR(f, 0.99 * 4.0 - shaper.table()(0), 1e-12);
}

TEST(StaticAggregation, SingleAbstractStateIsNearlyInert) {
  StaticAggregationShaper shaper({0, 0, 0}, 0.01, 0.99, 0.99);
  shaper.table().values() << 3.0;
  shaper.begin_episode(EnvState::discrete(0));
  for (std::size_t s = 0; s < 2; ++s) {
    const double f = shaper.shape({EnvState::discrete(s), ActionId{0}, 0.0, EnvState::discrete(s + 1), false, false});
    EXPECT_NEAR(f, (0.99 - 1.0) * 3.0, 1e-12);
  }
}

TEST(StaticAggregation, StateOutsideTheMappingIsAConfigError) {
  StaticAggregationShaper shaper({0, -1}, 0.01, 0.99, 0.99);
  EXPECT_THROW(shaper.begin_episode(EnvState::discrete(1)), ConfigError);
  EXPECT_THROW(shaper.begin_episode(EnvState::discrete(5)), ConfigError);
}

TEST(StaticPotential, TelescopesToMinusTheStartPotential) {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  std::vector<double> phi(30);
  for (auto& p : phi) p = u(rng);
  StaticPotentialShaper shaper([&](const EnvState& s) { return phi[s.cell()]; }, 1.0);
  std::size_t s = 0;
  double total = 0.0;
  for (int t = 0; t < 40; ++t) {
    const std::size_t n = rng() % 30;
    total += shaper.shape({EnvState::discrete(s), ActionId{0}, 0.0, EnvState::discrete(n), t == 39, false});
    s = n;
  }
  EXPECT_NEAR(total, -phi[0], 1e-9);
}

}  // namespace
}  // namespace rshape

#include <gtest/gtest.h>

#include "invariance.hpp"

namespace rshape::testing {
namespace {

TEST(Corridor, ValueIterationOracleIsUniqueRightward) {
  const auto q = corridor_value_iteration(0.99);
  const auto greedy = strict_greedy(q);
  for (std::size_t s = 0; s < greedy.size(); ++s) {
    ASSERT_TRUE(greedy[s].has_value()) << "tie at " << s;
    EXPECT_EQ(*greedy[s], static_cast<std::size_t>(kRight));
  }
  EXPECT_NEAR(q(0, kRight), std::pow(0.99, 8), 1e-12);
}

TEST(Corridor, DoorIsOneWay) {
  EXPECT_EQ(corridor_step(kCorridorDoor, ActionId{kLeft}).next_state.cell(), kCorridorDoor);
  EXPECT_EQ(corridor_step(kCorridorDoor + 1, ActionId{kLeft}).next_state.cell(), kCorridorDoor);
  EXPECT_EQ(corridor_step(3, ActionId{kUp}).next_state.cell(), 3u);
}

class Invariance : public ::testing::TestWithParam<InvarianceShaping> {};

TEST_P(Invariance, GreedyPolicyMatchesTheOracle) {
  const auto oracle = strict_greedy(corridor_value_iteration(0.99));
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto learned = strict_greedy(train_corridor(GetParam(), seed));
    ASSERT_EQ(learned, oracle) << "seed " << seed;
  }
}

INSTANTIATE_TEST_SUITE_P(Shapings, Invariance,
                         ::testing::Values(InvarianceShaping::none, InvarianceShaping::static_potential,
                                           InvarianceShaping::dynamic_subgoal),
                         [](const auto& info) {
                           switch (info.param) {
                             case InvarianceShaping::none: return std::string("Unshaped");
                             case InvarianceShaping::static_potential: return std::string("StaticPotential");
                             case InvarianceShaping::dynamic_subgoal: return std::string("DynamicSubgoal");
                           }
                           return std::string("Unknown");
                         });

TEST(Invariance, UnshapedValuesApproachTheExploringPolicyValue) {
  // SARSA is on-policy: the target is the value of the final epsilon-greedy
  // policy, evaluated here on the known model.
  const int episodes = 20000;
  const double epsilon = 1.0 / (1.0 + (episodes - 1) / 25.0);
  Eigen::MatrixXd v = Eigen::MatrixXd::Zero(kCorridorCells, 4);
  for (int sweep = 0; sweep < 100000; ++sweep) {
    Eigen::MatrixXd next = v;
    for (std::size_t s = 0; s < kCorridorGoal; ++s)
      for (std::size_t a = 0; a < 4; ++a) {
        const auto out = corridor_step(s, ActionId{a});
        double follow = 0.0;
        if (!out.terminal) {
          const auto row = v.row(static_cast<Eigen::Index>(out.next_state.cell()));
          follow = (1.0 - epsilon) * row[kRight] + epsilon * row.mean();
        }
        next(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(a)) = out.reward + 0.99 * follow;
      }
    const double change = (next - v).cwiseAbs().maxCoeff();
    v = next;
    if (change < 1e-15) break;
  }
  const auto q = train_corridor(InvarianceShaping::none, 3, episodes);
  for (Eigen::Index s = 0; s < static_cast<Eigen::Index>(kCorridorGoal); ++s)
    EXPECT_NEAR(q(s, kRight), v(s, kRight), 1e-3) << "cell " << s;
}

}  // namespace
}  // namespace rshape::testing

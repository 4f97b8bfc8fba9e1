#include <gtest/gtest.h>

#include "rshape/core.hpp"
#include "rshape/environments.hpp"
#include "rshape/harness.hpp"
#include "support.hpp"

namespace rshape {
namespace {

TEST(EnvState, DiscreteObservationIsTheCellId) {
  const EnvState s = EnvState::discrete(37);
  EXPECT_TRUE(s.is_discrete());
  EXPECT_EQ(s.observation_size(), 1u);
  EXPECT_EQ(s.observation(0), 37.0);
  EXPECT_THROW(s.pinball(), UsageError);
  EXPECT_THROW(s.observation(1), UsageError);
}

TEST(EnvState, ContinuousObservationHasFourComponents) {
  const EnvState s = EnvState::continuous({0.1, 0.2, -0.3, 0.4});
  const Eigen::VectorXd obs = s.observation();
  ASSERT_EQ(obs.size(), 4);
  EXPECT_EQ(obs, Eigen::Vector4d(0.1, 0.2, -0.3, 0.4));
  EXPECT_THROW(s.cell(), UsageError);
}

TEST(Environment, FourRoomsResetReturnsTheStartCell) {
  const GridMap map = testing::fourrooms_map();
  FourRoomsEnv env(map);
  const EnvState s = env.reset(7);
  EXPECT_EQ(s.cell(), map.id(map.start()));
  EXPECT_EQ(env.steps(), 0u);
}

TEST(Environment, PinballResetPlacesTheBallAtRest) {
  const PinballMap map = testing::pinball_map();
  PinballEnv env(map);
  const PinballState s = env.reset(3).pinball();
  EXPECT_EQ(s.x, map.start.x());
  EXPECT_EQ(s.y, map.start.y());
  EXPECT_EQ(s.xdot, 0.0);
  EXPECT_EQ(s.ydot, 0.0);
}

TEST(Environment, SameSeedAndActionsGiveIdenticalTrajectories) {
  PinballEnv a(testing::pinball_map());
  PinballEnv b(testing::pinball_map());
  a.reset(11);
  b.reset(11);
  Rng actions(5);
  for (int i = 0; i < 500; ++i) {
    const ActionId act{actions() % kPinballActionCount};
    const auto x = a.step(act);
    const auto y = b.step(act);
    ASSERT_EQ(x.next_state, y.next_state);
    ASSERT_EQ(x.reward, y.reward);
    if (x.terminal) break;
  }
}

TEST(Environment, StepAfterTerminalIsAUsageError) {
  GridMap map(3, 1, {}, {0, 0}, {0, 1});
  FourRoomsEnv env(map);
  env.reset(0);
  const auto out = env.step(ActionId{kRight});
  EXPECT_TRUE(out.terminal);
  EXPECT_EQ(out.reward, 1.0);
  EXPECT_THROW(env.step(ActionId{kRight}), UsageError);
}

TEST(Environment, StepBeforeResetIsAUsageError) {
  FourRoomsEnv env(testing::fourrooms_map());
  EXPECT_THROW(env.step(ActionId{0}), UsageError);
}

TEST(Environment, FourRoomsTruncatesAtTheThousandthStep) {
  FourRoomsEnv env(testing::fourrooms_map());
  env.reset(0);
  StepOutcome out;
  for (int i = 0; i < 1000; ++i) {
    ASSERT_FALSE(env.done());
    out = env.step(ActionId{kUp});  // pinned against the top border
  }
  EXPECT_TRUE(out.truncated);
  EXPECT_FALSE(out.terminal);
  EXPECT_EQ(out.reward, 0.0);
  EXPECT_TRUE(env.done());
}

TEST(Environment, PinballStepCapIsTenThousand) {
  PinballEnv env(testing::pinball_map());
  EXPECT_EQ(env.step_cap(), 10000u);
  EXPECT_EQ(env.action_count(), 5u);
  FourRoomsEnv grid(testing::fourrooms_map());
  EXPECT_EQ(grid.step_cap(), 1000u);
  EXPECT_EQ(grid.action_count(), 4u);
}

TEST(Environment, OutOfRangeActionIsRejected) {
  FourRoomsEnv env(testing::fourrooms_map());
  env.reset(0);
  EXPECT_THROW(env.step(ActionId{4}), UsageError);
}

TEST(Streams, NamedStreamsAreIndependentAndReproducible) {
  auto a = RunStreams::from_seed(42);
  auto b = RunStreams::from_seed(42);
  EXPECT_EQ(a.policy(), b.policy());
  EXPECT_EQ(a.environment(), b.environment());
  auto c = RunStreams::from_seed(42);
  EXPECT_NE(c.policy(), c.subgoals());
  EXPECT_NE(make_stream(1, "policy")(), make_stream(2, "policy")());
}

TEST(Trajectory, RecordedEpisodesAreContiguousAndRespectTheCap) {
  const MapDocument map = testing::fourrooms_map();
  AgentConfig agent;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    auto env = make_environment(map);
    auto learner = make_agent(agent, map);
    IdentityTransformer identity;
    auto streams = RunStreams::from_seed(seed);
    Trajectory t;
    const auto stats = run_episode(*env, *learner, identity, streams, &t);
    EXPECT_TRUE(t.contiguous());
    EXPECT_LE(t.steps.size(), env->step_cap());
    EXPECT_EQ(static_cast<int>(t.steps.size()), stats.steps);
    for (const auto& step : t.steps) {
      EXPECT_FALSE(step.terminal && step.truncated);
      if (step.truncated) EXPECT_EQ(step.reward, 0.0);
    }
  }
}

TEST(IdentityTransformer, AlwaysReturnsZero) {
  IdentityTransformer identity;
  Transition t{EnvState::discrete(1), ActionId{0}, 1.0, EnvState::discrete(2), true, false};
  EXPECT_EQ(identity.shape(t), 0.0);
  t.reward = -3.5;
  t.terminal = false;
  EXPECT_EQ(identity.shape(t), 0.0);
}

}  // namespace
}  // namespace rshape

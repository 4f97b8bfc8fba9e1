#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "rshape/environments.hpp"
#include "rshape/geometry.hpp"
#include "support.hpp"

namespace rshape {
namespace {

// --- four-rooms --------------------------------------------------------------

TEST(FourRooms, StepIntoGoalPaysOneAndTerminates) {
  const GridMap map = testing::fourrooms_map();
  const Cell left_of_goal{map.goal().row, map.goal().col - 1};
  const auto out = fourrooms_step(map, map.id(left_of_goal), ActionId{kRight});
  EXPECT_EQ(out.next_state.cell(), map.id(map.goal()));
  EXPECT_EQ(out.reward, 1.0);
  EXPECT_TRUE(out.terminal);
  EXPECT_FALSE(out.truncated);
}

TEST(FourRooms, MoveIntoWallLeavesTheCell) {
  const GridMap map = testing::fourrooms_map();
  const Cell below_wall{6, 0};  // (5,0) is a wall
  ASSERT_TRUE(map.is_wall(Cell{5, 0}));
  const auto out = fourrooms_step(map, map.id(below_wall), ActionId{kUp});
  EXPECT_EQ(out.next_state.cell(), map.id(below_wall));
  EXPECT_EQ(out.reward, 0.0);
  EXPECT_FALSE(out.terminal);
}

TEST(FourRooms, MoveOffGridLeavesTheCell) {
  const GridMap map = testing::fourrooms_map();
  EXPECT_EQ(fourrooms_step(map, 0, ActionId{kLeft}).next_state.cell(), 0u);
  EXPECT_EQ(fourrooms_step(map, 0, ActionId{kUp}).next_state.cell(), 0u);
}

TEST(FourRooms, ShortestPathMatchesIndependentBfs) {
  const GridMap map = testing::fourrooms_map();
  const auto oracle = testing::bfs_oracle(map);
  ASSERT_TRUE(oracle.has_value());
  EXPECT_EQ(shortest_path_length(map), oracle);
  EXPECT_EQ(*oracle, 20);
}

TEST(FourRooms, DefaultMapHasFourHallways) {
  const GridMap map = testing::fourrooms_map();
  EXPECT_EQ(map.hallways().size(), 4u);
  EXPECT_EQ(map.width(), 11);
  EXPECT_EQ(map.height(), 11);
}

TEST(FourRooms, NeverTeleports) {
  const GridMap map = testing::fourrooms_map();
  for (const std::size_t c : map.open_cells()) {
    for (std::size_t a = 0; a < kGridActionCount; ++a) {
      const Cell from = map.cell(c);
      const Cell to = map.cell(fourrooms_step(map, c, ActionId{a}).next_state.cell());
      EXPECT_LE(std::abs(from.row - to.row) + std::abs(from.col - to.col), 1);
      EXPECT_FALSE(map.is_wall(to));
    }
  }
}

TEST(FourRooms, StepFromWallIsAUsageError) {
  const GridMap map = testing::fourrooms_map();
  EXPECT_THROW(fourrooms_step(map, map.id(Cell{0, 5}), ActionId{kUp}), UsageError);
}

TEST(FourRooms, RoomLabelsSplitTheMapIntoFourRooms) {
  const GridMap map = testing::fourrooms_map();
  const auto labels = room_labels(map);
  int max_label = -1;
  for (const std::size_t c : map.open_cells()) {
    ASSERT_GE(labels[c], 0);
    max_label = std::max(max_label, labels[c]);
  }
  EXPECT_EQ(max_label, 3);
  EXPECT_NE(labels[map.id(map.start())], labels[map.id(map.goal())]);
  for (const Cell w : map.walls()) EXPECT_EQ(labels[map.id(w)], -1);
}

// --- pinball -----------------------------------------------------------------

PinballMap open_table() {
  PinballMap m;
  m.start = {0.5, 0.5};
  m.target = {0.9, 0.9};
  return m;
}

TEST(Pinball, DragScalesVelocityWithoutCollision) {
  const PinballMap map = open_table();
  const auto out = pinball_step(map, {0.3, 0.5, 1.0, 0.0}, ActionId{kNoForce});
  const auto& s = out.next_state.pinball();
  EXPECT_DOUBLE_EQ(s.xdot, 0.995);
  EXPECT_EQ(s.ydot, 0.0);
  EXPECT_NEAR(s.x, 0.3 + 1.0 * map.ball_radius, 1e-12);
  EXPECT_EQ(out.reward, 0.0);
}

TEST(Pinball, HeadOnWallHitReversesVelocity) {
  const PinballMap map = open_table();
  const double x = 1.0 - map.ball_radius - 1e-4;
  const auto out = pinball_step(map, {x, 0.5, 0.3, 0.0}, ActionId{kNoForce});
  EXPECT_NEAR(out.next_state.pinball().xdot, -0.3 * 0.995, 1e-12);
}

TEST(Pinball, HeadOnObstacleHitReversesVelocity) {
  PinballMap map = open_table();
  map.obstacles.push_back({{0.6, 0.4}, {0.7, 0.4}, {0.7, 0.6}, {0.6, 0.6}});
  const double x = 0.6 - map.ball_radius - 1e-4;
  const auto out = pinball_step(map, {x, 0.5, 0.3, 0.0}, ActionId{kNoForce});
  EXPECT_NEAR(out.next_state.pinball().xdot, -0.3 * 0.995, 1e-12);
  EXPECT_NEAR(out.next_state.pinball().ydot, 0.0, 1e-12);
}

TEST(Pinball, ReachingTheTargetPaysTenThousand) {
  const PinballMap map = open_table();
  const double x = map.target.x() - map.target_radius - 0.001;
  const auto out = pinball_step(map, {x, map.target.y(), 0.5, 0.0}, ActionId{kNoForce});
  EXPECT_TRUE(out.terminal);
  EXPECT_EQ(out.reward, 10000.0);
  const auto& s = out.next_state.pinball();
  EXPECT_LE(std::hypot(s.x - map.target.x(), s.y - map.target.y()), map.target_radius);
}

TEST(Pinball, ThrustAddsImpulseAndClips) {
  const PinballMap map = open_table();
  auto s = pinball_step(map, {0.5, 0.5, 0.0, 0.0}, ActionId{kAccX}).next_state.pinball();
  EXPECT_DOUBLE_EQ(s.xdot, 0.2 * 0.995);
  s = pinball_step(map, {0.5, 0.5, 0.0, 0.95}, ActionId{kAccY}).next_state.pinball();
  EXPECT_DOUBLE_EQ(s.ydot, 1.0 * 0.995);
  s = pinball_step(map, {0.5, 0.5, 0.0, 0.0}, ActionId{kDecY}).next_state.pinball();
  EXPECT_DOUBLE_EQ(s.ydot, -0.2 * 0.995);
}

TEST(Pinball, StepPenaltiesAreOptIn) {
  PinballMap map = open_table();
  EXPECT_EQ(pinball_step(map, {0.5, 0.5, 0, 0}, ActionId{kAccX}).reward, 0.0);
  map.step_penalties = true;
  EXPECT_EQ(pinball_step(map, {0.5, 0.5, 0, 0}, ActionId{kAccX}).reward, -5.0);
  EXPECT_EQ(pinball_step(map, {0.5, 0.5, 0, 0}, ActionId{kNoForce}).reward, -1.0);
}

TEST(Pinball, EnteringInsideAnObstacleIsAnIntegrityError) {
  PinballMap map = open_table();
  map.obstacles.push_back({{0.4, 0.4}, {0.6, 0.4}, {0.6, 0.6}, {0.4, 0.6}});
  EXPECT_THROW(pinball_step(map, {0.5, 0.5, 0, 0}, ActionId{kNoForce}), IntegrityError);
}

TEST(Pinball, RandomRolloutsStayContainedAndLoseEnergyWithoutThrust) {
  const PinballMap map = testing::pinball_map();
  std::mt19937_64 rng(1);
  std::uniform_int_distribution<std::size_t> pick(0, kPinballActionCount - 1);
  for (int episode = 0; episode < 20; ++episode) {
    PinballState s{map.start.x(), map.start.y(), 0.0, 0.0};
    for (int t = 0; t < 400; ++t) {
      const ActionId a{t < 200 ? pick(rng) : kNoForce};
      const auto out = pinball_step(map, s, a);
      const auto& n = out.next_state.pinball();
      ASSERT_GE(n.x, 0.0);
      ASSERT_LE(n.x, 1.0);
      ASSERT_GE(n.y, 0.0);
      ASSERT_LE(n.y, 1.0);
      ASSERT_LE(std::abs(n.xdot), 1.0);
      ASSERT_LE(std::abs(n.ydot), 1.0);
      ASSERT_FALSE(disc_collides({n.x, n.y}, map.ball_radius, map.obstacles));
      if (a.index == kNoForce)
        ASSERT_LE(std::hypot(n.xdot, n.ydot), std::hypot(s.xdot, s.ydot) + 1e-12);
      if (out.terminal) break;
      s = n;
    }
  }
}

TEST(Geometry, ReflectionPreservesSpeedAndMatchesOracle) {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int i = 0; i < 10000; ++i) {
    const Eigen::Vector2d v(u(rng), u(rng));
    const double angle = std::acos(-1.0) * u(rng);
    const Eigen::Vector2d n(std::cos(angle), std::sin(angle));
    const Eigen::Vector2d r = reflect(v, n);
    // oracle: keep the tangential part, negate the normal part
    const Eigen::Vector2d t(-n.y(), n.x());
    const Eigen::Vector2d expected = v.dot(t) * t - v.dot(n) * n;
    ASSERT_NEAR((r - expected).norm(), 0.0, 1e-12);
    ASSERT_NEAR(r.norm(), v.norm(), 1e-12);
  }
}

TEST(Geometry, VertexContactUsesTheCentreToVertexNormal) {
  const std::vector<Polygon> obstacles{{{0.4, 0.4}, {0.5, 0.4}, {0.5, 0.5}, {0.4, 0.5}}};
  const Eigen::Vector2d centre(0.51, 0.51);
  const Contact c = find_contact(centre, 0.02, obstacles);
  ASSERT_LT(c.distance, 0.02);
  EXPECT_NEAR(c.normal.x(), std::sqrt(0.5), 1e-12);
  EXPECT_NEAR(c.normal.y(), std::sqrt(0.5), 1e-12);
}

TEST(Geometry, PointInPolygon) {
  const std::vector<Point2<double>> square{{0, 0}, {1, 0}, {1, 1}, {0, 1}};
  EXPECT_TRUE(point_in_polygon<double>({0.5, 0.5}, square));
  EXPECT_FALSE(point_in_polygon<double>({1.5, 0.5}, square));
  EXPECT_TRUE(polygon_is_simple(square));
  EXPECT_FALSE(polygon_is_simple({{0, 0}, {1, 1}, {1, 0}, {0, 1}}));
}

// --- map documents -----------------------------------------------------------

TEST(MapDocument, DefaultPinballHasStandardDrag) {
  const PinballMap map = testing::pinball_map();
  EXPECT_EQ(map.drag, 0.995);
  EXPECT_EQ(map.substeps, 20);
  EXPECT_EQ(map.impulse, 0.2);
  EXPECT_EQ(map.ball_radius, 0.02);
  EXPECT_GT(map.target_radius, 0.0);
}

TEST(MapDocument, RoundTripIsStructuralIdentity) {
  for (const char* name : {"fourrooms.json", "pinball.json"}) {
    const MapDocument m = load_map(testing::data_dir() / "maps" / name);
    EXPECT_EQ(parse_map(map_to_json(m)), m) << name;
    EXPECT_EQ(parse_map_text(map_to_json(m).dump()), m) << name;
  }
}

TEST(MapDocument, UnknownKeysAreRejected) {
  auto doc = map_to_json(testing::fourrooms_map());
  doc["colour"] = "blue";
  try {
    parse_map(doc);
    FAIL() << "expected LoadError";
  } catch (const LoadError& e) {
    EXPECT_EQ(e.where, "/colour");
  }
}

TEST(MapDocument, UnreachableGoalIsALoadError) {
  const auto doc = nlohmann::json::parse(
      R"({"type":"grid","width":3,"height":3,"walls":[[0,1],[1,1],[2,1]],"start":[0,0],"goal":[0,2]})");
  try {
    parse_map(doc);
    FAIL() << "expected LoadError";
  } catch (const LoadError& e) {
    EXPECT_EQ(e.where, "/goal");
  }
}

TEST(MapDocument, StartInsideObstacleIsALoadError) {
  auto doc = map_to_json(testing::pinball_map());
  doc["obstacles"].push_back(nlohmann::json::parse("[[0.0,0.0],[0.3,0.0],[0.3,0.3],[0.0,0.3]]"));
  try {
    parse_map(doc);
    FAIL() << "expected LoadError";
  } catch (const LoadError& e) {
    EXPECT_EQ(e.where, "/start");
  }
}

TEST(MapDocument, SchemaViolationsAreLocated) {
  EXPECT_THROW(parse_map_text("{not json"), LoadError);
  EXPECT_THROW(parse_map(nlohmann::json::parse(R"({"type":"hex"})")), LoadError);
  try {
    parse_map(nlohmann::json::parse(R"({"type":"grid","width":"wide","height":3,"walls":[],"start":[0,0],"goal":[0,2]})"));
    FAIL();
  } catch (const LoadError& e) {
    EXPECT_EQ(e.where, "/width");
  }
}

}  // namespace
}  // namespace rshape

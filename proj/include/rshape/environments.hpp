#pragma once

#include <compare>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <Eigen/Core>
#include <nlohmann/json.hpp>

#include "rshape/core.hpp"
#include "rshape/geometry.hpp"

namespace rshape {

/// Map document failed schema or semantic validation. `where` is a JSON
/// pointer to the offending value.
struct LoadError : std::runtime_error {
  LoadError(std::string where, const std::string& message)
      : std::runtime_error(where + ": " + message), where(std::move(where)) {}
  std::string where;
};

struct Cell {
  int row = 0;
  int col = 0;

  auto operator<=>(const Cell&) const = default;
};

// ---------------------------------------------------------------------------
// Four-rooms grid
// ---------------------------------------------------------------------------

enum GridAction : std::size_t { kUp = 0, kDown = 1, kLeft = 2, kRight = 3 };
inline constexpr std::size_t kGridActionCount = 4;
inline constexpr std::size_t kGridStepCap = 1000;
inline constexpr double kGridGoalReward = 1.0;

/// Rectangular grid with wall cells. Cell ids are row-major over the whole
/// rectangle (walls included); moving off-grid or into a wall is a no-op.
class GridMap {
 public:
  GridMap(int width, int height, std::vector<Cell> walls, Cell start, Cell goal,
          std::vector<Cell> hallways = {});

  int width() const { return width_; }
  int height() const { return height_; }
  const std::vector<Cell>& walls() const { return walls_; }
  const std::vector<Cell>& hallways() const { return hallways_; }
  Cell start() const { return start_; }
  Cell goal() const { return goal_; }

  std::size_t cell_count() const { return static_cast<std::size_t>(width_) * height_; }
  std::size_t id(Cell c) const { return static_cast<std::size_t>(c.row) * width_ + c.col; }
  Cell cell(std::size_t id) const { return {static_cast<int>(id / width_), static_cast<int>(id % width_)}; }
  bool in_bounds(Cell c) const { return c.row >= 0 && c.col >= 0 && c.row < height_ && c.col < width_; }
  bool is_wall(Cell c) const { return blocked_[id(c)] != 0; }
  bool is_wall(std::size_t id) const { return blocked_[id] != 0; }
  /// Ids of every non-wall cell in ascending order.
  std::vector<std::size_t> open_cells() const;

  bool operator==(const GridMap&) const = default;

 private:
  int width_;
  int height_;
  std::vector<Cell> walls_;  // sorted, unique
  Cell start_;
  Cell goal_;
  std::vector<Cell> hallways_;
  std::vector<char> blocked_;
};

/// One deterministic four-rooms move.
StepOutcome fourrooms_step(const GridMap& map, std::size_t cell, ActionId action);

/// Breadth-first shortest path length (in moves) from start to goal.
std::optional<int> shortest_path_length(const GridMap& map);

/// Room index per cell id (-1 for walls). Rooms are the connected components
/// after removing hallway cells; each hallway joins its lowest-numbered
/// neighbouring room.
std::vector<int> room_labels(const GridMap& map);

class FourRoomsEnv final : public Environment {
 public:
  explicit FourRoomsEnv(GridMap map, std::size_t step_cap = kGridStepCap)
      : map_(std::move(map)), cap_(step_cap) {}

  const GridMap& map() const { return map_; }
  std::size_t action_count() const override { return kGridActionCount; }
  std::size_t step_cap() const override { return cap_; }
  std::string_view id() const override { return "fourrooms"; }

 protected:
  EnvState start_state(Rng&) override { return EnvState::discrete(map_.id(map_.start())); }
  StepOutcome dynamics(const EnvState& state, ActionId action) override {
    return fourrooms_step(map_, state.cell(), action);
  }

 private:
  GridMap map_;
  std::size_t cap_;
};

// ---------------------------------------------------------------------------
// Pinball
// ---------------------------------------------------------------------------

enum PinballAction : std::size_t { kAccX = 0, kDecX = 1, kAccY = 2, kDecY = 3, kNoForce = 4 };
inline constexpr std::size_t kPinballActionCount = 5;
inline constexpr std::size_t kPinballStepCap = 10000;
inline constexpr double kPinballGoalReward = 10000.0;

struct PinballMap {
  std::vector<Polygon> obstacles;
  Eigen::Vector2d start{0.1, 0.1};
  Eigen::Vector2d target{0.9, 0.9};
  double target_radius = 0.04;
  double ball_radius = 0.02;
  double drag = 0.995;
  double impulse = 0.2;
  int substeps = 20;
  /// Classic per-step costs (-1 no force, -5 thrust); off unless enabled.
  bool step_penalties = false;

  bool operator==(const PinballMap&) const = default;

  /// Throws LoadError on invalid geometry or parameters.
  void validate() const;
};

/// One pinball step. Each of `substeps` sub-intervals moves the ball by
/// velocity * ball_radius / substeps; a move that would overlap an obstacle
/// or the border is rejected and the velocity reflected about the contact
/// normal. Drag is applied once per step.
StepOutcome pinball_step(const PinballMap& map, const PinballState& state, ActionId action);

class PinballEnv final : public Environment {
 public:
  explicit PinballEnv(PinballMap map, std::size_t step_cap = kPinballStepCap)
      : map_(std::move(map)), cap_(step_cap) {}

  const PinballMap& map() const { return map_; }
  std::size_t action_count() const override { return kPinballActionCount; }
  std::size_t step_cap() const override { return cap_; }
  std::string_view id() const override { return "pinball"; }

 protected:
  EnvState start_state(Rng&) override {
    return EnvState::continuous({map_.start.x(), map_.start.y(), 0.0, 0.0});
  }
  StepOutcome dynamics(const EnvState& state, ActionId action) override {
    return pinball_step(map_, state.pinball(), action);
  }

 private:
  PinballMap map_;
  std::size_t cap_;
};

// ---------------------------------------------------------------------------
// Map documents
// ---------------------------------------------------------------------------

using MapDocument = std::variant<GridMap, PinballMap>;

MapDocument parse_map(const nlohmann::json& doc);
MapDocument parse_map_text(std::string_view text);
MapDocument load_map(const std::filesystem::path& path);
nlohmann::json map_to_json(const MapDocument& map);

std::string_view map_kind(const MapDocument& map);
std::unique_ptr<Environment> make_environment(const MapDocument& map);

}  // namespace rshape

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Core>
#include <nlohmann/json.hpp>

#include "rshape/core.hpp"
#include "rshape/environments.hpp"

namespace rshape {

struct CellSubgoal {
  std::size_t cell = 0;
  bool operator==(const CellSubgoal&) const = default;
};

/// Reached when the ball centre is within `radius` of `center`, at any velocity.
struct CircleSubgoal {
  Eigen::Vector2d center = Eigen::Vector2d::Zero();
  double radius = 0.0;
  bool operator==(const CircleSubgoal&) const = default;
};

/// Reached when every selected observation component is within +-margin of
/// its target value.
struct SliceSubgoal {
  std::vector<std::size_t> indices;
  std::vector<double> values;
  double margin = 0.0;
  bool operator==(const SliceSubgoal&) const = default;
};

using SubgoalSpec = std::variant<CellSubgoal, CircleSubgoal, SliceSubgoal>;

/// Subgoal identification predicate. Throws UsageError when the subgoal kind is
/// incompatible with the state (cell vs pinball) or a slice index is out of
/// range.
bool matches(const SubgoalSpec& spec, const EnvState& state);

enum class SeriesSource { human, random, scripted };

/// Totally ordered, non-empty sequence of distinct subgoals.
class SubgoalSeries {
 public:
  SubgoalSeries(std::vector<SubgoalSpec> subgoals, SeriesSource source = SeriesSource::human,
                std::string env = {});

  std::size_t size() const { return subgoals_.size(); }
  const SubgoalSpec& operator[](std::size_t i) const { return subgoals_[i]; }
  const std::vector<SubgoalSpec>& subgoals() const { return subgoals_; }
  SeriesSource source() const { return source_; }
  const std::string& env() const { return env_; }

  bool operator==(const SubgoalSeries&) const = default;

 private:
  std::vector<SubgoalSpec> subgoals_;
  SeriesSource source_;
  std::string env_;
};

/// Index of the next subgoal to achieve, 1-based; size()+1 once all are done.
class AchievementCursor {
 public:
  AchievementCursor() = default;
  explicit AchievementCursor(std::size_t series_size) : size_(series_size) {}

  std::size_t next_index() const { return next_; }
  std::size_t achieved() const { return next_ - 1; }
  bool saturated() const { return next_ > size_; }
  void reset() { next_ = 1; }

  /// Tests only the next subgoal in order; advances by one on a match.
  bool advance(const EnvState& state, const SubgoalSeries& series);

 private:
  std::size_t size_ = 0;
  std::size_t next_ = 1;
};

/// Uniformly sampled series of `count` distinct subgoals in random order.
/// Grid: open cells other than start and goal. Pinball: circle centres in
/// free space with the target radius.
SubgoalSeries random_series(const MapDocument& map, std::size_t count, std::uint64_t seed);

/// Field-level validation messages keyed by JSON pointer; empty when valid.
struct ValidationIssue {
  std::string field;
  std::string message;
};
std::vector<ValidationIssue> validate_series(const SubgoalSeries& series, const MapDocument& map);

SubgoalSeries parse_series(const nlohmann::json& doc);
SubgoalSeries load_series(const std::filesystem::path& path);
nlohmann::json series_to_json(const SubgoalSeries& series);

std::string_view to_string(SeriesSource source);

}  // namespace rshape

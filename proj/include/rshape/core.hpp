#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <Eigen/Core>

namespace rshape {

// Error taxonomy shared by every module.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct UsageError : std::logic_error {
  using std::logic_error::logic_error;
};
struct IntegrityError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

using Rng = std::mt19937_64;

/// Position and velocity of the pinball ball.
struct PinballState {
  double x = 0.0;
  double y = 0.0;
  double xdot = 0.0;
  double ydot = 0.0;

  bool operator==(const PinballState&) const = default;
};

/// Environment state: a grid cell id or a pinball configuration. Both expose a
/// canonical observation vector (length 1 for cells, 4 for pinball).
class EnvState {
 public:
  EnvState() = default;

  static EnvState discrete(std::size_t cell) { return EnvState(cell); }
  static EnvState continuous(const PinballState& s) { return EnvState(s); }

  bool is_discrete() const { return std::holds_alternative<std::size_t>(kind_); }
  bool is_continuous() const { return !is_discrete(); }

  std::size_t cell() const;
  const PinballState& pinball() const;

  std::size_t observation_size() const { return is_discrete() ? 1 : 4; }
  double observation(std::size_t index) const;
  Eigen::VectorXd observation() const;

  bool operator==(const EnvState&) const = default;

 private:
  explicit EnvState(std::size_t cell) : kind_(cell) {}
  explicit EnvState(const PinballState& s) : kind_(s) {}

  std::variant<std::size_t, PinballState> kind_{std::size_t{0}};
};

struct ActionId {
  std::size_t index = 0;

  bool operator==(const ActionId&) const = default;
};

struct StepOutcome {
  EnvState next_state;
  double reward = 0.0;
  bool terminal = false;
  bool truncated = false;
};

struct Transition {
  EnvState state;
  ActionId action;
  double reward = 0.0;
  EnvState next_state;
  bool terminal = false;
  bool truncated = false;
};

struct Trajectory {
  std::vector<Transition> steps;
  int episode_index = 0;

  /// next_state of step i equals state of step i+1 for every i.
  bool contiguous() const;
  double total_reward() const;
};

/// Independent random streams derived from one run seed.
struct RunStreams {
  Rng environment;
  Rng policy;
  Rng subgoals;

  static RunStreams from_seed(std::uint64_t seed);
};

Rng make_stream(std::uint64_t seed, std::string_view stream_name);

/// Episodic environment with a step cap. Truncation and termination are
/// distinct: truncated is set when the cap is reached without termination.
class Environment {
 public:
  virtual ~Environment() = default;

  EnvState reset(std::uint64_t seed);
  StepOutcome step(ActionId action);

  const EnvState& state() const { return state_; }
  std::size_t steps() const { return steps_; }
  bool done() const { return done_; }

  virtual std::size_t action_count() const = 0;
  virtual std::size_t step_cap() const = 0;
  virtual std::string_view id() const = 0;

 protected:
  virtual EnvState start_state(Rng& rng) = 0;
  virtual StepOutcome dynamics(const EnvState& state, ActionId action) = 0;

 private:
  EnvState state_;
  std::size_t steps_ = 0;
  bool done_ = true;
  bool started_ = false;
  Rng rng_;
};

/// Produces the additional shaping reward F for each transition.
class RewardTransformer {
 public:
  virtual ~RewardTransformer() = default;

  virtual void begin_episode(const EnvState& /*start*/) {}
  virtual double shape(const Transition& transition) = 0;
  virtual void end_episode() {}
};

class IdentityTransformer final : public RewardTransformer {
 public:
  double shape(const Transition&) override { return 0.0; }
};

}  // namespace rshape

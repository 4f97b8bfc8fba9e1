#include "rshape/core.hpp"

#include <cmath>

namespace rshape {

std::size_t EnvState::cell() const {
  if (const auto* c = std::get_if<std::size_t>(&kind_)) return *c;
  throw UsageError("EnvState: continuous state has no cell id");
}

const PinballState& EnvState::pinball() const {
  if (const auto* p = std::get_if<PinballState>(&kind_)) return *p;
  throw UsageError("EnvState: discrete state has no pinball configuration");
}

double EnvState::observation(std::size_t index) const {
  if (index >= observation_size())
    throw UsageError("EnvState: observation index " + std::to_string(index) + " out of range");
  if (is_discrete()) return static_cast<double>(cell());
  const auto& p = pinball();
  switch (index) {
    case 0: return p.x;
    case 1: return p.y;
    case 2: return p.xdot;
    default: return p.ydot;
  }
}

Eigen::VectorXd EnvState::observation() const {
  Eigen::VectorXd obs(observation_size());
  for (Eigen::Index i = 0; i < obs.size(); ++i) obs[i] = observation(static_cast<std::size_t>(i));
  return obs;
}

bool Trajectory::contiguous() const {
  for (std::size_t i = 1; i < steps.size(); ++i)
    if (!(steps[i - 1].next_state == steps[i].state)) return false;
  return true;
}

double Trajectory::total_reward() const {
  double total = 0.0;
  for (const auto& s : steps) total += s.reward;
  return total;
}

Rng make_stream(std::uint64_t seed, std::string_view stream_name) {
  // FNV-1a, stable across standard library implementations.
  std::uint64_t tag = 1469598103934665603ull;
  for (char c : stream_name) {
    tag ^= static_cast<unsigned char>(c);
    tag *= 1099511628211ull;
  }
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(tag), static_cast<std::uint32_t>(tag >> 32)};
  return Rng(seq);
}

RunStreams RunStreams::from_seed(std::uint64_t seed) {
  return RunStreams{make_stream(seed, "environment"), make_stream(seed, "policy"),
                    make_stream(seed, "subgoals")};
}

EnvState Environment::reset(std::uint64_t seed) {
  rng_ = make_stream(seed, "environment");
  state_ = start_state(rng_);
  steps_ = 0;
  done_ = false;
  started_ = true;
  return state_;
}

StepOutcome Environment::step(ActionId action) {
  if (!started_) throw UsageError("Environment::step called before reset");
  if (done_) throw UsageError("Environment::step called after the episode ended");
  if (action.index >= action_count())
    throw UsageError("Environment::step: action " + std::to_string(action.index) + " out of range");

  StepOutcome out = dynamics(state_, action);
  if (!std::isfinite(out.reward)) throw NumericError("Environment::step: non-finite reward");
  ++steps_;
  out.truncated = !out.terminal && steps_ >= step_cap();
  state_ = out.next_state;
  done_ = out.terminal || out.truncated;
  return out;
}

}  // namespace rshape

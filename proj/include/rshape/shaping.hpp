#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <vector>

#include <Eigen/Core>

#include "rshape/core.hpp"
#include "rshape/subgoal.hpp"

namespace rshape {

/// Potential-based shaping reward gamma * phi_next - phi_prev. Callers pass
/// phi_next = 0 for transitions into a terminal (absorbing) state.
template <typename Scalar>
constexpr Scalar potential_shaping_reward(Scalar phi_prev, Scalar phi_next, Scalar gamma) {
  return gamma * phi_next - phi_prev;
}

/// Value function over abstract states, used as the shaping potential.
class AbstractValueTable {
 public:
  AbstractValueTable(std::size_t size, double alpha, double gamma);

  std::size_t size() const { return static_cast<std::size_t>(values_.size()); }
  double operator()(std::size_t z) const { return values_[static_cast<Eigen::Index>(z)]; }
  const Eigen::VectorXd& values() const { return values_; }
  Eigen::VectorXd& values() { return values_; }
  double alpha() const { return alpha_; }
  double gamma() const { return gamma_; }

  /// Semi-Markov TD step: V(z) += alpha (r_h + gamma^k V(z_next) - V(z)).
  void update(std::size_t z, std::size_t z_next, double r_h, std::size_t k);
  /// Episode ended in an absorbing state: bootstrap with 0.
  void update_terminal(std::size_t z, double r_h);

 private:
  Eigen::VectorXd values_;
  double alpha_;
  double gamma_;
};

/// Per-episode bookkeeping of the dynamic aggregation.
struct ShapingContext {
  std::size_t z = 0;    // abstract state = subgoals achieved so far
  std::size_t t = 0;    // steps since entering z
  double r_h = 0.0;     // discounted reward accumulated since entering z
  AchievementCursor cursor;

  explicit ShapingContext(std::size_t series_size = 0) : cursor(series_size) {}
  void reset() {
    z = 0;
    t = 0;
    r_h = 0.0;
    cursor.reset();
  }
};

/// Abstract state after observing `state`: z + 1 when the next subgoal in
/// order matches, z otherwise. Pure.
std::size_t filter(const EnvState& state, const ShapingContext& context, const SubgoalSeries& series);

/// r_h += gamma^t * reward, then t += 1. With t counted from 0 at abstract
/// state entry this yields r_h = sum_{i<k} gamma^i r_i.
void accumulate(ShapingContext& context, double reward, double gamma);

struct DynamicShapingOptions {
  double gamma = 0.99;                 // agent discount, used in F
  bool terminal_update = true;         // final abstract update (bootstrap 0) at termination
  bool terminal_update_final_only = true;   // ... only once every subgoal was achieved
  bool pre_update_potential = false;   // compute F before the abstract update
  bool learn = true;                   // false keeps the potential fixed
  bool absorbing_terminal = true;      // V(terminal) = 0; otherwise the last z carries over
};

/// One completed abstract segment (for inspection and oracle checks).
struct Segment {
  std::size_t z = 0;
  std::size_t k = 0;
  double r_h = 0.0;
  bool terminal = false;
};

struct ShapingStepResult {
  double shaping = 0.0;
  std::optional<Segment> closed;
};

/// One environment step of subgoal-based dynamic trajectory aggregation:
/// accumulate, filter, abstract update on achievement (or termination), then
/// F = gamma V(z') - V(z) with V(terminal) = 0.
ShapingStepResult dynamic_shaping_step(ShapingContext& context, AbstractValueTable& table,
                                       const SubgoalSeries& series, const EnvState& next_state, double reward,
                                       bool terminal, const DynamicShapingOptions& options);

/// SARSA-RS over subgoal-based dynamic trajectory aggregation. The table has
/// series.size() + 1 entries, all zero initially, and persists across
/// episodes.
class SubgoalShaper final : public RewardTransformer {
 public:
  SubgoalShaper(SubgoalSeries series, double alpha_v, double gamma_v, DynamicShapingOptions options = {});

  void begin_episode(const EnvState& start) override;
  double shape(const Transition& transition) override;

  const AbstractValueTable& table() const { return table_; }
  AbstractValueTable& table() { return table_; }
  const ShapingContext& context() const { return context_; }
  const SubgoalSeries& series() const { return series_; }

  /// Stop learning the abstract values (the potential stays as it is).
  void freeze(bool frozen = true) { options_.learn = !frozen; }
  /// Record every completed segment into `segments()`.
  void record_segments(bool on = true) { record_ = on; }
  const std::vector<Segment>& segments() const { return segments_; }

 private:
  SubgoalSeries series_;
  AbstractValueTable table_;
  DynamicShapingOptions options_;
  ShapingContext context_;
  bool record_ = false;
  std::vector<Segment> segments_;
};

/// SARSA-RS with a fixed aggregation function (e.g. grid cell -> room).
/// Abstract transitions may go in any direction.
class StaticAggregationShaper final : public RewardTransformer {
 public:
  /// `mapping[cell]` is the abstract state of each cell; negative entries are
  /// outside the domain.
  StaticAggregationShaper(std::vector<int> mapping, double alpha_v, double gamma_v, double gamma,
                          bool terminal_update = true);

  void begin_episode(const EnvState& start) override;
  double shape(const Transition& transition) override;

  const AbstractValueTable& table() const { return table_; }
  AbstractValueTable& table() { return table_; }
  std::size_t abstract_state(const EnvState& state) const;

 private:
  std::vector<int> mapping_;
  AbstractValueTable table_;
  double gamma_;
  bool terminal_update_;
  std::size_t z_ = 0;
  std::size_t t_ = 0;
  double r_h_ = 0.0;
};

/// Naive subgoal potential: eta on any subgoal state, 0 elsewhere.
struct NrsPotential {
  double eta = 1.0;
  std::vector<SubgoalSpec> subgoals;

  double operator()(const EnvState& state) const;
};

/// Shaping from a fixed potential over states.
class StaticPotentialShaper final : public RewardTransformer {
 public:
  using Potential = std::function<double(const EnvState&)>;

  StaticPotentialShaper(Potential potential, double gamma) : potential_(std::move(potential)), gamma_(gamma) {}

  double shape(const Transition& transition) override {
    const double next = transition.terminal ? 0.0 : potential_(transition.next_state);
    return potential_shaping_reward(potential_(transition.state), next, gamma_);
  }

 private:
  Potential potential_;
  double gamma_;
};

}  // namespace rshape

#include "rshape/shaping.hpp"

#include <cmath>

namespace rshape {

AbstractValueTable::AbstractValueTable(std::size_t size, double alpha, double gamma)
    : values_(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(size))), alpha_(alpha), gamma_(gamma) {
  if (size == 0) throw ConfigError("AbstractValueTable: size must be positive");
}

void AbstractValueTable::update(std::size_t z, std::size_t z_next, double r_h, std::size_t k) {
  const double target = r_h + std::pow(gamma_, static_cast<double>(k)) * (*this)(z_next);
  values_[static_cast<Eigen::Index>(z)] += alpha_ * (target - (*this)(z));
}

void AbstractValueTable::update_terminal(std::size_t z, double r_h) {
  values_[static_cast<Eigen::Index>(z)] += alpha_ * (r_h - (*this)(z));
}

std::size_t filter(const EnvState& state, const ShapingContext& context, const SubgoalSeries& series) {
  if (context.cursor.saturated()) return context.z;
  return matches(series[context.cursor.next_index() - 1], state) ? context.z + 1 : context.z;
}

void accumulate(ShapingContext& context, double reward, double gamma) {
  context.r_h += std::pow(gamma, static_cast<double>(context.t)) * reward;
  ++context.t;
}

ShapingStepResult dynamic_shaping_step(ShapingContext& context, AbstractValueTable& table,
                                       const SubgoalSeries& series, const EnvState& next_state, double reward,
                                       bool terminal, const DynamicShapingOptions& options) {
  const double gamma_v = table.gamma();
  accumulate(context, reward, gamma_v);

  const std::size_t z = context.z;
  // The terminal step closes the current segment; subgoal achievement there
  // carries no further information.
  const std::size_t z_next = terminal ? z : filter(next_state, context, series);

  const double potential_before = table(z);
  const bool zero_next = terminal && options.absorbing_terminal;
  const double potential_next_before = zero_next ? 0.0 : table(z_next);

  ShapingStepResult result;
  if (terminal) {
    if (options.terminal_update && (!options.terminal_update_final_only || context.cursor.saturated())) {
      if (options.learn) table.update_terminal(z, context.r_h);
      result.closed = Segment{z, context.t, context.r_h, true};
    }
  } else if (z_next != z) {
    if (options.learn) table.update(z, z_next, context.r_h, context.t);
    result.closed = Segment{z, context.t, context.r_h, false};
    context.cursor.advance(next_state, series);
    context.z = z_next;
    context.t = 0;
    context.r_h = 0.0;
  }

  if (options.pre_update_potential) {
    result.shaping = potential_shaping_reward(potential_before, potential_next_before, options.gamma);
  } else {
    const double phi_next = zero_next ? 0.0 : table(z_next);
    result.shaping = potential_shaping_reward(table(z), phi_next, options.gamma);
  }
  return result;
}

SubgoalShaper::SubgoalShaper(SubgoalSeries series, double alpha_v, double gamma_v, DynamicShapingOptions options)
    : series_(std::move(series)), table_(series_.size() + 1, alpha_v, gamma_v), options_(options),
      context_(series_.size()) {}

void SubgoalShaper::begin_episode(const EnvState&) { context_.reset(); }

double SubgoalShaper::shape(const Transition& transition) {
  const auto r = dynamic_shaping_step(context_, table_, series_, transition.next_state, transition.reward,
                                      transition.terminal, options_);
  if (record_ && r.closed) segments_.push_back(*r.closed);
  return r.shaping;
}

StaticAggregationShaper::StaticAggregationShaper(std::vector<int> mapping, double alpha_v, double gamma_v,
                                                 double gamma, bool terminal_update)
    : mapping_(std::move(mapping)),
      table_([&] {
        int max_id = -1;
        for (const int z : mapping_) max_id = std::max(max_id, z);
        if (max_id < 0) throw ConfigError("StaticAggregationShaper: mapping has no abstract states");
        return static_cast<std::size_t>(max_id) + 1;
      }(), alpha_v, gamma_v),
      gamma_(gamma), terminal_update_(terminal_update) {}

std::size_t StaticAggregationShaper::abstract_state(const EnvState& state) const {
  if (!state.is_discrete() || state.cell() >= mapping_.size() || mapping_[state.cell()] < 0)
    throw ConfigError("StaticAggregationShaper: state outside the aggregation domain");
  return static_cast<std::size_t>(mapping_[state.cell()]);
}

void StaticAggregationShaper::begin_episode(const EnvState& start) {
  z_ = abstract_state(start);
  t_ = 0;
  r_h_ = 0.0;
}

double StaticAggregationShaper::shape(const Transition& transition) {
  r_h_ += std::pow(table_.gamma(), static_cast<double>(t_)) * transition.reward;
  ++t_;
  const std::size_t z = z_;
  if (transition.terminal) {
    if (terminal_update_) table_.update_terminal(z, r_h_);
    return potential_shaping_reward(table_(z), 0.0, gamma_);
  }
  const std::size_t z_next = abstract_state(transition.next_state);
  if (z_next != z) {
    table_.update(z, z_next, r_h_, t_);
    z_ = z_next;
    t_ = 0;
    r_h_ = 0.0;
  }
  return potential_shaping_reward(table_(z), table_(z_next), gamma_);
}

double NrsPotential::operator()(const EnvState& state) const {
  for (const auto& spec : subgoals)
    if (matches(spec, state)) return eta;
  return 0.0;
}

}  // namespace rshape

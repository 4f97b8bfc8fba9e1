#include "rshape/agents.hpp"

#include <algorithm>
#include <complex>
#include <vector>
#include <numbers>

namespace rshape {

ActionId sample_action(const Eigen::Ref<const Eigen::VectorXd>& probabilities, Rng& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double u = unit(rng) * probabilities.sum();
  double acc = 0.0;
  for (Eigen::Index i = 0; i < probabilities.size(); ++i) {
    acc += probabilities[i];
    if (u < acc) return ActionId{static_cast<std::size_t>(i)};
  }
  // u landed on the rounding slack at the top end
  for (Eigen::Index i = probabilities.size() - 1; i >= 0; --i)
    if (probabilities[i] > 0.0) return ActionId{static_cast<std::size_t>(i)};
  return ActionId{0};
}

ActionId softmax_select(const Eigen::Ref<const Eigen::VectorXd>& preferences, double temperature, Rng& rng) {
  return sample_action(softmax_probabilities(preferences, temperature), rng);
}

void sarsa_update(QTable& q, std::size_t s, ActionId a, double reward, double shaping, std::size_t s_next,
                  ActionId a_next, bool terminal) {
  const double bootstrap = terminal ? 0.0 : q.gamma * q(s_next, a_next);
  q(s, a) += q.alpha * (reward + shaping + bootstrap - q(s, a));
}

void q_learning_update(QTable& q, std::size_t s, ActionId a, double reward, double shaping, std::size_t s_next,
                       bool terminal) {
  const double bootstrap = terminal ? 0.0 : q.gamma * q.row(s_next).maxCoeff();
  q(s, a) += q.alpha * (reward + shaping + bootstrap - q(s, a));
}

std::size_t greedy_action(const Eigen::Ref<const Eigen::RowVectorXd>& row) {
  Eigen::Index best = 0;
  row.maxCoeff(&best);
  return static_cast<std::size_t>(best);
}

FourierBasis::FourierBasis(int order, int dimension) : order_(order), dimension_(dimension) {
  if (order < 0 || dimension < 1) throw ConfigError("FourierBasis: order must be >= 0 and dimension >= 1");
  Eigen::Index count = 1;
  for (int d = 0; d < dimension; ++d) count *= order + 1;
  coefficients_.resize(count, dimension);
  // lexicographic: the last coordinate varies fastest
  for (Eigen::Index i = 0; i < count; ++i) {
    Eigen::Index rest = i;
    for (int d = dimension - 1; d >= 0; --d) {
      coefficients_(i, d) = static_cast<double>(rest % (order + 1));
      rest /= order + 1;
    }
  }
  rate_scale_ = coefficients_.rowwise().norm();
  for (Eigen::Index i = 0; i < count; ++i) rate_scale_[i] = rate_scale_[i] > 0.0 ? 1.0 / rate_scale_[i] : 1.0;
}

Eigen::VectorXd FourierBasis::features(const Eigen::Ref<const Eigen::VectorXd>& normalized) const {
  Eigen::VectorXd out(size());
  features(normalized, out);
  return out;
}

void FourierBasis::features(const Eigen::Ref<const Eigen::VectorXd>& normalized, Eigen::Ref<Eigen::VectorXd> out) const {
  if (normalized.size() != dimension_) throw UsageError("FourierBasis: state dimension mismatch");
  if ((normalized.array() < 0.0).any() || (normalized.array() > 1.0).any() || !normalized.allFinite())
    throw NumericError("FourierBasis: state outside [0,1]^d");
  // cos(pi c.s) = Re prod_d exp(i pi s_d)^c_d, expanded dimension by dimension
  // so the last coordinate varies fastest
  const int n = order_ + 1;
  std::vector<std::complex<double>> acc{1.0};
  std::vector<std::complex<double>> next;
  std::vector<std::complex<double>> powers(static_cast<std::size_t>(n));
  for (int d = 0; d < dimension_; ++d) {
    const std::complex<double> z = std::polar(1.0, std::numbers::pi * normalized[d]);
    powers[0] = 1.0;
    for (int k = 1; k < n; ++k) powers[k] = powers[k - 1] * z;
    next.clear();
    next.reserve(acc.size() * n);
    for (const auto& a : acc)
      for (const auto& p : powers) next.push_back(a * p);
    acc.swap(next);
  }
  for (Eigen::Index i = 0; i < out.size(); ++i) out[i] = acc[static_cast<std::size_t>(i)].real();
}

Eigen::Vector4d normalize_pinball(const PinballState& s) {
  const bool ok = s.x >= 0.0 && s.x <= 1.0 && s.y >= 0.0 && s.y <= 1.0 && s.xdot >= -1.0 && s.xdot <= 1.0 &&
                  s.ydot >= -1.0 && s.ydot <= 1.0;
  if (!ok) throw NumericError("normalize_pinball: state component out of range");
  return {s.x, s.y, (s.xdot + 1.0) / 2.0, (s.ydot + 1.0) / 2.0};
}

Eigen::VectorXd policy_probabilities(const ActorCriticParams& params, const Eigen::Ref<const Eigen::VectorXd>& phi) {
  const Eigen::VectorXd preferences = params.actor * phi;
  return softmax_probabilities(preferences, params.temperature);
}

Eigen::VectorXd behaviour_probabilities(const ActorCriticParams& params, const Eigen::Ref<const Eigen::VectorXd>& phi) {
  const Eigen::VectorXd pi = policy_probabilities(params, phi);
  const double uniform = 1.0 / static_cast<double>(pi.size());
  return ((1.0 - params.explore_prob) * pi.array() + params.explore_prob * uniform).matrix();
}

Eigen::MatrixXd log_policy_gradient(const ActorCriticParams& params, const Eigen::Ref<const Eigen::VectorXd>& phi,
                                    ActionId action) {
  Eigen::VectorXd indicator = -policy_probabilities(params, phi);
  indicator[static_cast<Eigen::Index>(action.index)] += 1.0;
  return (indicator / params.temperature) * phi.transpose();
}

double actor_critic_update(ActorCriticParams& params, const FourierBasis& basis,
                           const Eigen::Ref<const Eigen::VectorXd>& phi, ActionId action, double reward,
                           double shaping, const Eigen::Ref<const Eigen::VectorXd>& phi_next, bool terminal) {
  const double value = params.critic.dot(phi);
  const double next_value = terminal ? 0.0 : params.critic.dot(phi_next);
  const double delta = reward + shaping + params.gamma * next_value - value;
  if (delta == 0.0) return delta;

  Eigen::VectorXd indicator = -policy_probabilities(params, phi);
  indicator[static_cast<Eigen::Index>(action.index)] += 1.0;
  if (params.scaled_rates)
    params.critic.array() += params.alpha_critic * delta * phi.array() * basis.rate_scale().array();
  else
    params.critic += params.alpha_critic * delta * phi;
  // theta += alpha_a delta * d log pi / d theta, applied as a rank-one update
  params.actor.noalias() += (params.alpha_actor * delta / params.temperature) * indicator * phi.transpose();
  return delta;
}

SarsaAgent::SarsaAgent(std::size_t states, std::size_t actions, double alpha, double gamma, double temperature)
    : q_(states, actions, alpha, gamma), temperature_(temperature) {}

ActionId SarsaAgent::start(const EnvState& state, Rng& rng) {
  return softmax_select(q_.row(state.cell()).transpose(), temperature_, rng);
}

ActionId SarsaAgent::observe(const EnvState& state, ActionId action, double reward, double shaping,
                             const EnvState& next_state, bool terminal, bool /*truncated*/, Rng& rng) {
  const ActionId next_action =
      terminal ? ActionId{0} : softmax_select(q_.row(next_state.cell()).transpose(), temperature_, rng);
  sarsa_update(q_, state.cell(), action, reward, shaping, next_state.cell(), next_action, terminal);
  return next_action;
}

ActorCriticAgent::ActorCriticAgent(int fourier_order, std::size_t actions, double alpha, double gamma,
                                   double temperature, double explore_prob, bool scaled_rates)
    : basis_(fourier_order, 4), params_(basis_.size(), static_cast<Eigen::Index>(actions)),
      phi_(basis_.size()), phi_next_(basis_.size()) {
  params_.alpha_critic = alpha;
  params_.alpha_actor = alpha;
  params_.gamma = gamma;
  params_.temperature = temperature;
  params_.explore_prob = explore_prob;
  params_.scaled_rates = scaled_rates;
}

ActionId ActorCriticAgent::act(Rng& rng) { return sample_action(behaviour_probabilities(params_, phi_), rng); }

ActionId ActorCriticAgent::start(const EnvState& state, Rng& rng) {
  basis_.features(normalize_pinball(state.pinball()), phi_);
  return act(rng);
}

ActionId ActorCriticAgent::observe(const EnvState&, ActionId action, double reward, double shaping,
                                   const EnvState& next_state, bool terminal, bool /*truncated*/, Rng& rng) {
  basis_.features(normalize_pinball(next_state.pinball()), phi_next_);
  actor_critic_update(params_, basis_, phi_, action, reward, shaping, phi_next_, terminal);
  std::swap(phi_, phi_next_);
  if (terminal) return ActionId{0};
  return act(rng);
}

}  // namespace rshape

#pragma once

#include <cmath>
#include <cstddef>
#include <random>

#include <Eigen/Core>

#include "rshape/core.hpp"

namespace rshape {

/// Softmax distribution over preferences at temperature tau, computed with
/// max-subtraction so large preferences do not overflow.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1> softmax_probabilities(
    const Eigen::MatrixBase<Derived>& preferences, typename Derived::Scalar temperature) {
  using Scalar = typename Derived::Scalar;
  if (!(temperature > Scalar(0))) throw UsageError("softmax: temperature must be positive");
  if (!preferences.allFinite()) throw NumericError("softmax: non-finite preference");
  const Scalar top = preferences.maxCoeff();
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> p = ((preferences.array() - top) / temperature).exp().matrix();
  p /= p.sum();
  return p;
}

/// Draws an action index from softmax(preferences / temperature).
ActionId softmax_select(const Eigen::Ref<const Eigen::VectorXd>& preferences, double temperature, Rng& rng);

/// Draws from a discrete distribution given by `probabilities`.
ActionId sample_action(const Eigen::Ref<const Eigen::VectorXd>& probabilities, Rng& rng);

// ---------------------------------------------------------------------------
// Tabular
// ---------------------------------------------------------------------------

/// Action values indexed by (state id, action).
struct QTable {
  Eigen::MatrixXd values;
  double alpha = 0.01;
  double gamma = 0.99;

  QTable(std::size_t states, std::size_t actions, double alpha_ = 0.01, double gamma_ = 0.99)
      : values(Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(states), static_cast<Eigen::Index>(actions))),
        alpha(alpha_), gamma(gamma_) {}

  double operator()(std::size_t s, ActionId a) const {
    return values(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(a.index));
  }
  double& operator()(std::size_t s, ActionId a) {
    return values(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(a.index));
  }
  auto row(std::size_t s) const { return values.row(static_cast<Eigen::Index>(s)); }
};

/// On-policy TD step: Q(s,a) += alpha (r + F + gamma Q(s',a') [not terminal] - Q(s,a)).
void sarsa_update(QTable& q, std::size_t s, ActionId a, double reward, double shaping, std::size_t s_next,
                  ActionId a_next, bool terminal);

/// Off-policy TD step with a max over next actions.
void q_learning_update(QTable& q, std::size_t s, ActionId a, double reward, double shaping, std::size_t s_next,
                       bool terminal);

std::size_t greedy_action(const Eigen::Ref<const Eigen::RowVectorXd>& row);

// ---------------------------------------------------------------------------
// Fourier basis
// ---------------------------------------------------------------------------

/// Full Fourier cosine basis: phi_i(s) = cos(pi c_i . s) over every
/// coefficient vector c_i in {0..order}^dimension, lexicographic order.
class FourierBasis {
 public:
  FourierBasis(int order, int dimension);

  int order() const { return order_; }
  int dimension() const { return dimension_; }
  Eigen::Index size() const { return coefficients_.rows(); }
  const Eigen::MatrixXd& coefficients() const { return coefficients_; }
  /// Per-feature learning-rate scale 1/||c_i|| (1 for the constant feature).
  const Eigen::VectorXd& rate_scale() const { return rate_scale_; }

  /// `normalized` must lie in [0,1]^dimension.
  Eigen::VectorXd features(const Eigen::Ref<const Eigen::VectorXd>& normalized) const;
  void features(const Eigen::Ref<const Eigen::VectorXd>& normalized, Eigen::Ref<Eigen::VectorXd> out) const;

 private:
  int order_;
  int dimension_;
  Eigen::MatrixXd coefficients_;
  Eigen::VectorXd rate_scale_;
};

/// Maps (x, y, xdot, ydot) from [0,1]^2 x [-1,1]^2 onto [0,1]^4. Throws
/// NumericError when a component is out of range.
Eigen::Vector4d normalize_pinball(const PinballState& state);

// ---------------------------------------------------------------------------
// Linear actor-critic
// ---------------------------------------------------------------------------

struct ActorCriticParams {
  Eigen::VectorXd critic;   // w, one weight per feature
  Eigen::MatrixXd actor;    // theta, one row of feature weights per action
  double alpha_critic = 0.01;
  double alpha_actor = 0.01;
  double gamma = 0.99;
  double temperature = 1.0;
  double explore_prob = 0.1;
  bool scaled_rates = true;

  ActorCriticParams(Eigen::Index features, Eigen::Index actions)
      : critic(Eigen::VectorXd::Zero(features)), actor(Eigen::MatrixXd::Zero(actions, features)) {}
};

/// Softmax policy pi(.|s) over actor preferences theta_a . phi(s).
Eigen::VectorXd policy_probabilities(const ActorCriticParams& params, const Eigen::Ref<const Eigen::VectorXd>& phi);

/// Behaviour distribution: the softmax policy mixed with a uniform choice
/// with probability explore_prob.
Eigen::VectorXd behaviour_probabilities(const ActorCriticParams& params, const Eigen::Ref<const Eigen::VectorXd>& phi);

/// d log pi(a|s) / d theta, same shape as params.actor.
Eigen::MatrixXd log_policy_gradient(const ActorCriticParams& params, const Eigen::Ref<const Eigen::VectorXd>& phi,
                                    ActionId action);

/// One actor-critic step; returns the TD error.
///   delta = r + F + gamma w.phi(s') [not terminal] - w.phi(s)
///   w += alpha_c delta phi(s) (times rate_scale when scaled_rates)
///   theta_a += alpha_a delta (1{a = a_t} - pi(a|s)) phi(s)
double actor_critic_update(ActorCriticParams& params, const FourierBasis& basis,
                           const Eigen::Ref<const Eigen::VectorXd>& phi, ActionId action, double reward,
                           double shaping, const Eigen::Ref<const Eigen::VectorXd>& phi_next, bool terminal);

// ---------------------------------------------------------------------------
// Agents driven by the episode loop
// ---------------------------------------------------------------------------

class Agent {
 public:
  virtual ~Agent() = default;

  /// Action for the first state of an episode.
  virtual ActionId start(const EnvState& state, Rng& rng) = 0;
  /// Learns from one transition and returns the next action (unused once the
  /// episode has ended). Truncated transitions bootstrap; terminal ones do not.
  virtual ActionId observe(const EnvState& state, ActionId action, double reward, double shaping,
                           const EnvState& next_state, bool terminal, bool truncated, Rng& rng) = 0;
};

/// Tabular SARSA with a softmax policy over Q(s, .).
class SarsaAgent final : public Agent {
 public:
  SarsaAgent(std::size_t states, std::size_t actions, double alpha, double gamma, double temperature);

  ActionId start(const EnvState& state, Rng& rng) override;
  ActionId observe(const EnvState& state, ActionId action, double reward, double shaping,
                   const EnvState& next_state, bool terminal, bool truncated, Rng& rng) override;

  const QTable& q() const { return q_; }
  QTable& q() { return q_; }

 private:
  QTable q_;
  double temperature_;
};

/// Linear actor-critic over a Fourier basis of the normalised pinball state.
class ActorCriticAgent final : public Agent {
 public:
  ActorCriticAgent(int fourier_order, std::size_t actions, double alpha, double gamma, double temperature,
                   double explore_prob, bool scaled_rates = true);

  ActionId start(const EnvState& state, Rng& rng) override;
  ActionId observe(const EnvState& state, ActionId action, double reward, double shaping,
                   const EnvState& next_state, bool terminal, bool truncated, Rng& rng) override;

  const ActorCriticParams& params() const { return params_; }
  const FourierBasis& basis() const { return basis_; }

 private:
  ActionId act(Rng& rng);

  FourierBasis basis_;
  ActorCriticParams params_;
  Eigen::VectorXd phi_;       // features of the current state
  Eigen::VectorXd phi_next_;
};

}  // namespace rshape

#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string_view>
#include <vector>

#include "rave/dynamics/ensemble.hpp"
#include "rave/expansion/value_expansion.hpp"
#include "rave/linalg.hpp"
#include "rave/nn/adam.hpp"
#include "rave/nn/mlp.hpp"
#include "rave/rng.hpp"
#include "rave/transition.hpp"

namespace rave::agent {

// Which critic value drives the policy gradient (and, separately, the
// evaluation read-out).
enum class CriticReduction { Mean, FirstMember };

std::string_view to_string(CriticReduction r);
CriticReduction critic_reduction_from_string(std::string_view name);

struct AgentConfig {
  int state_dim = 1;
  int action_dim = 1;
  int hidden_width = 64;
  int policy_layers = 4;
  int critic_layers = 4;
  int critic_ensemble = 4;
  nn::AdamConfig policy_adam{};
  nn::AdamConfig critic_adam{};
  double tau = 0.005;
  double explore_probability = 0.05;
  double explore_std = 0.1;
  CriticReduction actor_signal = CriticReduction::Mean;

  void validate() const;
};

// pi(s) plus, with probability explore_probability, N(0, explore_std) noise
// clipped back into [-1, 1]. Used by the agent and by actor workers holding a
// policy snapshot.
std::vector<double> select_action(const nn::Mlp& policy, std::span<const double> state,
                                  bool explore, double explore_probability, double explore_std,
                                  Rng& rng);

// DDPG actor with an ensemble of critics and their slowly blended targets.
class ActorCritic {
 public:
  ActorCritic() = default;
  ActorCritic(AgentConfig config, std::uint64_t seed);

  const AgentConfig& config() const { return config_; }

  // pi(s), plus clipped Gaussian noise with probability explore_probability
  // when explore is set.
  std::vector<double> select_action(std::span<const double> state, bool explore, Rng& rng) const;
  Matrix act(const Matrix& states) const { return policy_.forward(states); }

  // One Adam step per critic on mean squared error to the fixed targets.
  // Returns the pre-step loss averaged over critics.
  double critic_update(const TransitionBatch& batch, std::span<const double> targets);

  // One Adam step on -mean Q(s, pi(s)); critics are read, never written.
  double actor_update(const TransitionBatch& batch);

  void target_sync() { target_sync(config_.tau); }
  void target_sync(double tau);

  double q_value(int member, std::span<const double> state, std::span<const double> action) const;
  double q_mean(std::span<const double> state, std::span<const double> action) const;
  double policy_loss(const Matrix& states) const;

  const nn::Mlp& policy() const { return policy_; }
  nn::Mlp& policy() { return policy_; }
  std::span<const nn::Mlp> critics() const { return critics_; }
  std::span<nn::Mlp> critics() { return critics_; }
  std::span<const nn::Mlp> target_critics() const { return targets_; }
  std::span<nn::Mlp> target_critics() { return targets_; }
  const nn::Adam& policy_optimizer() const { return policy_opt_; }
  const nn::Adam& critic_optimizer(int m) const { return critic_opts_.at(static_cast<std::size_t>(m)); }

  expansion::ValueModels value_models() const { return {policy_, targets_}; }

  void save(std::ostream& out) const;
  static ActorCritic load(std::istream& in);

 private:
  Matrix critic_input(const Matrix& states, const Matrix& actions) const;

  AgentConfig config_;
  nn::Mlp policy_;
  std::vector<nn::Mlp> critics_;
  std::vector<nn::Mlp> targets_;
  nn::Adam policy_opt_;
  std::vector<nn::Adam> critic_opts_;
};

struct LearnerStep {
  double critic_loss = 0.0;
  double actor_loss = 0.0;
  expansion::TargetDiagnostics diagnostics;
};

// Targets from the configured estimator, critic step, actor step, target
// sync. Reads only the replay batch; dynamics may be null for TD0.
LearnerStep learner_update(ActorCritic& agent, const dynamics::DynamicsEnsemble* dynamics,
                           const TransitionBatch& batch, const expansion::ExpansionConfig& config,
                           Rng& rng);

}  // namespace rave::agent

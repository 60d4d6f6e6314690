#pragma once

#include <cstdint>
#include <iosfwd>
#include <string_view>
#include <vector>

#include "rave/linalg.hpp"
#include "rave/nn/adam.hpp"
#include "rave/nn/mlp.hpp"
#include "rave/rng.hpp"
#include "rave/transition.hpp"

namespace rave::dynamics {

enum class ModelMode { Deterministic, Probabilistic };

// How a sampled termination value becomes a continuation weight: clipped to
// [0, 1] and used as-is, or thresholded at 0.5 to {0, 1}.
enum class TerminationSampling { Clip, Threshold };

std::string_view to_string(ModelMode mode);
ModelMode model_mode_from_string(std::string_view name);
std::string_view to_string(TerminationSampling sampling);
TerminationSampling termination_sampling_from_string(std::string_view name);

struct DynamicsConfig {
  int ensemble_size = 4;
  ModelMode mode = ModelMode::Probabilistic;
  int state_dim = 1;
  int action_dim = 1;
  int hidden_width = 64;
  int transition_layers = 8;
  int reward_layers = 4;
  int termination_layers = 4;
  nn::AdamConfig adam{};
  TerminationSampling termination_sampling = TerminationSampling::Clip;
  bool bootstrap = true;

  void validate() const;
};

struct GaussianPrediction {
  Matrix mean;
  Matrix variance;  // zero in deterministic mode
};

struct MemberLoss {
  double transition = 0.0;
  double reward = 0.0;
  double termination = 0.0;

  double total() const { return transition + reward + termination; }
};

// N members, each a transition model (s, a) -> s' - s, a reward model
// (s, a, s') -> r and a termination model s' -> d. Member i's transition and
// termination models are always used together.
class DynamicsEnsemble {
 public:
  DynamicsEnsemble() = default;
  DynamicsEnsemble(DynamicsConfig config, std::uint64_t seed);

  int size() const { return config_.ensemble_size; }
  const DynamicsConfig& config() const { return config_; }
  ModelMode mode() const { return config_.mode; }
  // Applies to every optimizer of every member from the next step on.
  void set_learning_rate(double lr);

  // Next-state distribution (delta already added back onto s).
  GaussianPrediction transition_distribution(int member, const Matrix& states,
                                             const Matrix& actions) const;
  GaussianPrediction reward_distribution(int member, const Matrix& states, const Matrix& actions,
                                         const Matrix& next_states) const;
  GaussianPrediction termination_distribution(int member, const Matrix& next_states) const;

  // sample = false returns the mean; deterministic members ignore sample.
  Matrix predict_transition(int member, const Matrix& states, const Matrix& actions, bool sample,
                            Rng& rng) const;
  Matrix predict_reward(int member, const Matrix& states, const Matrix& actions,
                        const Matrix& next_states, bool sample, Rng& rng) const;
  // Result lies in [0, 1].
  Matrix predict_termination(int member, const Matrix& next_states, bool sample, Rng& rng) const;

  // Ensemble-average of the transition means.
  Matrix mean_transition(const Matrix& states, const Matrix& actions) const;

  // One optimizer step per member, each on its own bootstrap resample of the
  // batch. Returns the pre-step loss of every member.
  std::vector<MemberLoss> train(const TransitionBatch& batch, Rng& rng);

  nn::Mlp& transition_net(int member) { return members_.at(index(member)).transition; }
  nn::Mlp& reward_net(int member) { return members_.at(index(member)).reward; }
  nn::Mlp& termination_net(int member) { return members_.at(index(member)).termination; }
  const nn::Mlp& transition_net(int member) const { return members_.at(index(member)).transition; }
  const nn::Mlp& reward_net(int member) const { return members_.at(index(member)).reward; }
  const nn::Mlp& termination_net(int member) const { return members_.at(index(member)).termination; }

  void save(std::ostream& out) const;
  static DynamicsEnsemble load(std::istream& in);

 private:
  struct Member {
    nn::Mlp transition;
    nn::Mlp reward;
    nn::Mlp termination;
    nn::Adam transition_opt;
    nn::Adam reward_opt;
    nn::Adam termination_opt;
  };

  std::size_t index(int member) const;
  GaussianPrediction head(const nn::Mlp& net, const Matrix& input) const;
  double fit(nn::Mlp& net, nn::Adam& opt, const Matrix& input, const Matrix& target);

  DynamicsConfig config_;
  std::vector<Member> members_;
};

// Draws mean + sqrt(variance) * N(0, 1) elementwise.
Matrix sample_gaussian(const GaussianPrediction& prediction, Rng& rng);

}  // namespace rave::dynamics

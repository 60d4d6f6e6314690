#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "rave/dynamics/ensemble.hpp"
#include "rave/dynamics/ensemble_stats.hpp"
#include "rave/linalg.hpp"
#include "rave/nn/mlp.hpp"
#include "rave/rng.hpp"
#include "rave/transition.hpp"

namespace rave::expansion {

enum class EstimatorKind { TD0, MVE, STEVE, RAVE };

std::string_view to_string(EstimatorKind kind);
EstimatorKind estimator_from_string(std::string_view name);

struct ExpansionConfig {
  int max_horizon = 3;
  int ensemble_size = 4;
  double alpha = 1.5;
  double error_scale = 1.0;  // Z
  double gamma = 0.99;
  EstimatorKind kind = EstimatorKind::RAVE;
  bool adaptive_alpha = true;
  double weight_epsilon = 1e-8;

  void validate() const;
};

// d_{t,t+offset}: (1 - origin_done) times (1 - terminations[m]) for the first
// offset - 1 imagined states. offset >= 1; terminations[m] belongs to the
// imagined state s_{t+2+m}.
double continuation_mask(double origin_done, std::span<const double> terminations, int offset);

// Rollout from a real (r_t, s_{t+1}) pair. For horizon H the sequences hold
// H rewards r_{t+1..t+H}, H terminations d(s_{t+2..t+H+1}), H + 1 states and
// H + 1 actions; tail_value is the target critic at the last state-action.
struct ImaginedTrajectory {
  double origin_reward = 0.0;
  double origin_done = 0.0;
  std::vector<double> rewards;
  std::vector<double> terminations;
  double tail_value = 0.0;
  Matrix states;
  Matrix actions;
  int transition_member = 0;
  int reward_member = 0;
  int critic_member = 0;

  int horizon() const { return static_cast<int>(rewards.size()); }
};

// r_t + sum_{h=1..H} gamma^h d_{t,t+h} r_{t+h} + gamma^{H+1} d_{t,t+H+1} Q.
// H is rewards.size(); terminations must have the same length.
double expansion_value(double origin_reward, double origin_done, std::span<const double> rewards,
                       std::span<const double> terminations, double tail_value, double gamma);
double expansion_value(const ImaginedTrajectory& trajectory, double gamma);

// One-step TD target r + gamma (1 - done) q_next.
double td0_target(double reward, double done, double next_value, double gamma);

// MVE target of a mean-mode trajectory.
double mve_target(const ImaginedTrajectory& trajectory, double gamma);

// The policy and target critics used during imagination. Critics take
// [state | action] as input.
struct ValueModels {
  const nn::Mlp& policy;
  std::span<const nn::Mlp> target_critics;
};

struct MemberTriple {
  int transition = 0;  // i: transition and termination member
  int reward = 0;      // j
  int critic = 0;      // k
};

struct Origin {
  double reward = 0.0;
  std::vector<double> next_state;
  double done = 0.0;
};

ImaginedTrajectory imagine(const dynamics::DynamicsEnsemble& dynamics, const ValueModels& models,
                           const MemberTriple& members, const Origin& origin, int horizon,
                           bool sample, Rng& rng);

struct DveResult {
  ImaginedTrajectory trajectory;
  double value = 0.0;
};

// Sampled rollout through one (i, j, k) combination.
DveResult dve_rollout(const dynamics::DynamicsEnsemble& dynamics, const ValueModels& models,
                      const MemberTriple& members, const Origin& origin, int horizon, double gamma,
                      Rng& rng);

// Q estimates for every (i, j, k) combination and every horizon 0..H_max of a
// single origin. Values are stored horizon-major so each horizon's N^3
// candidates are contiguous.
class CandidateMatrix {
 public:
  CandidateMatrix() = default;
  CandidateMatrix(int ensemble_size, int max_horizon);

  int ensemble_size() const { return n_; }
  int max_horizon() const { return max_horizon_; }
  std::size_t combinations() const { return combos_; }
  std::size_t size() const { return values_.size(); }

  static std::size_t combination_index(int i, int j, int k, int ensemble_size);

  double& at(std::size_t combination, int horizon);
  double at(std::size_t combination, int horizon) const;
  std::span<const double> horizon(int h) const;
  std::span<double> horizon(int h);
  dynamics::EnsembleStats horizon_stats(int h) const;

 private:
  int n_ = 0;
  int max_horizon_ = 0;
  std::size_t combos_ = 0;
  std::vector<double> values_;
};

// One candidate matrix per origin row of the batch (rewards, next_states,
// dones). Imagined state-action sequences are rolled out once per
// transition member i and shared across reward members j and critics k.
std::vector<CandidateMatrix> build_candidates(const TransitionBatch& batch,
                                              const dynamics::DynamicsEnsemble& dynamics,
                                              const ValueModels& models,
                                              const ExpansionConfig& config, bool sample, Rng& rng);

// omega_h / sum(omega) with omega_h = 1 / (variance_h + epsilon).
std::vector<double> horizon_weights(std::span<const double> variances, double epsilon);

// sum_h w_h value_h with the normalized weights above.
double inverse_variance_interpolation(std::span<const double> values,
                                      std::span<const double> variances, double epsilon);

double steve_target(const CandidateMatrix& matrix, double weight_epsilon);

// mean - alpha * sqrt(population variance). Throws UsageError on empty input.
double clb(std::span<const double> values, double alpha);

// max(0, alpha (1 - |predicted - observed|^2 / Z)).
double adaptive_alpha(std::span<const double> predicted, std::span<const double> observed,
                      double alpha, double error_scale);

// Per-row adaptive alpha using the ensemble-mean transition prediction.
std::vector<double> adaptive_alpha(const dynamics::DynamicsEnsemble& dynamics, const Matrix& states,
                                   const Matrix& actions, const Matrix& next_states, double alpha,
                                   double error_scale);

double rave_target(const CandidateMatrix& matrix, double alpha, double weight_epsilon);

struct TargetDiagnostics {
  std::vector<double> mean_weights;  // per horizon, batch average of normalized weights
  double mean_alpha = 0.0;
  double mean_clb_subtraction = 0.0;
};

struct TargetBatch {
  std::vector<double> targets;
  TargetDiagnostics diagnostics;
};

// Target values for a replay batch under config.kind. dynamics may be null
// only for TD0.
TargetBatch compute_targets(const TransitionBatch& batch,
                            const dynamics::DynamicsEnsemble* dynamics, const ValueModels& models,
                            const ExpansionConfig& config, Rng& rng);

}  // namespace rave::expansion

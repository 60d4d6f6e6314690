#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <vector>

#include "rave/agent/actor_critic.hpp"
#include "rave/agent/replay_buffer.hpp"
#include "rave/dynamics/ensemble.hpp"
#include "rave/env/environment.hpp"
#include "rave/harness/metrics.hpp"
#include "rave/harness/run_config.hpp"
#include "rave/rng.hpp"

namespace rave::harness {

struct OracleValues {
  double right = 0.0;
  double right_std_error = 0.0;
  double left = 0.0;
  double left_std_error = 0.0;
};

// Ground truth for Q(s0, +1) and Q(s0, -1) under the always-right policy,
// read from (or added to) <output_dir>/oracle_cache.csv.
OracleValues resolve_oracle(const RunConfig& config);

struct QReadout {
  double right = 0.0;
  double left = 0.0;
};

// One seed of one configuration. Owns the environment(s), replay buffer,
// agent, dynamics ensemble and all random streams; the learner only ever
// reads replay batches.
class Trainer {
 public:
  // config.seeds must hold exactly one seed.
  Trainer(RunConfig config, std::filesystem::path run_dir);

  // Restores a trainer from <run_dir>/checkpoint.txt; metrics are appended.
  static std::unique_ptr<Trainer> resume(const std::filesystem::path& run_dir);

  // Runs until env_steps() == min(until, total_steps).
  void advance(std::int64_t until);
  void run() { advance(config_.total_steps); }

  void save_checkpoint() const;

  std::int64_t env_steps() const { return env_steps_; }
  std::int64_t learner_updates() const { return updates_; }
  const RunConfig& config() const { return config_; }
  const agent::ActorCritic& agent() const { return agent_; }
  const dynamics::DynamicsEnsemble* dynamics() const { return dynamics_ ? &*dynamics_ : nullptr; }
  const agent::ReplayBuffer& replay() const { return *replay_; }
  const OracleValues& oracle() const { return oracle_; }
  const std::filesystem::path& run_dir() const { return run_dir_; }

  QReadout q_readout() const;
  // Return of one greedy episode on the evaluation environment.
  double evaluate_episode();

 private:
  struct Accumulator {
    std::int64_t updates = 0;
    double critic_loss = 0.0;
    double actor_loss = 0.0;
    double alpha = 0.0;
    double clb = 0.0;
    std::vector<double> weights;
    std::int64_t dynamics_updates = 0;
    std::vector<double> dynamics_losses;
  };

  struct Worker {
    std::unique_ptr<env::Environment> env;
    std::vector<double> observation;
    double episode_return = 0.0;
    Rng rng;
  };

  void initialise_outputs(bool append);
  void act(Worker& worker, const nn::Mlp& policy, bool random_action);
  void pretrain_dynamics();
  void dynamics_step();
  void learner_step();
  bool in_warmup(std::int64_t step) const { return step < config_.warmup_frames; }
  void advance_serial(std::int64_t until);
  void advance_parallel(std::int64_t until);
  void emit_row();
  void reset_accumulator();
  std::int64_t dynamics_updates_since_warmup() const;

  Trainer() = default;

  RunConfig config_;
  std::uint64_t seed_ = 0;
  std::filesystem::path run_dir_;
  OracleValues oracle_;

  std::unique_ptr<agent::ReplayBuffer> replay_;
  agent::ActorCritic agent_;
  std::optional<dynamics::DynamicsEnsemble> dynamics_;
  std::vector<Worker> workers_;
  std::unique_ptr<env::Environment> eval_env_;
  Rng learner_rng_;
  Rng eval_rng_;

  std::int64_t env_steps_ = 0;
  std::int64_t updates_ = 0;
  std::int64_t dynamics_updates_ = 0;
  bool pretrained_ = false;
  double last_train_return_ = 0.0;
  Accumulator acc_;

  std::unique_ptr<MetricsWriter> metrics_;
  std::chrono::steady_clock::time_point started_;
  double elapsed_offset_ = 0.0;
};

struct RunSummary {
  std::uint64_t seed = 0;
  std::filesystem::path run_dir;
  MetricsRow final_row;
  bool has_rows = false;
};

// All seeds of a configuration, one after another, each in
// <output_dir>/<run_name>/seed_<seed>.
std::vector<RunSummary> run_experiment(const RunConfig& config);

std::filesystem::path run_directory(const RunConfig& config, std::uint64_t seed);

}  // namespace rave::harness

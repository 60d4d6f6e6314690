#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "rave/agent/actor_critic.hpp"
#include "rave/dynamics/ensemble.hpp"
#include "rave/env/toy_env.hpp"
#include "rave/expansion/value_expansion.hpp"

namespace rave::harness {

// Every knob of a run. Defaults are the toy-scale profile; the resolved file
// written next to the results lists every field, so nothing is implicit.
struct RunConfig {
  // environment
  std::string env = "toy";
  double noise_scale = 0.0;  // k
  int step_cap = 1000;

  // estimator
  expansion::EstimatorKind estimator = expansion::EstimatorKind::RAVE;
  std::string dynamics_mode = "auto";  // auto | deterministic | probabilistic
  double gamma = 0.99;
  int max_horizon = 3;
  int ensemble_size = 4;
  double alpha = 1.5;
  double error_scale = 1.0;  // Z
  bool adaptive_alpha = true;
  double weight_epsilon = 1e-8;
  std::string termination_sampling = "clip";

  // learning
  int batch_size = 128;
  std::int64_t replay_capacity = 100000;
  double lr_policy = 3e-4;
  double lr_critic = 3e-4;
  double lr_dynamics = 3e-4;
  double explore_probability = 0.05;
  double explore_std = 0.1;
  double tau = 0.005;
  double reward_scale = 0.01;
  std::string actor_signal = "mean";  // mean | first
  std::int64_t warmup_frames = 1000;
  std::int64_t pretrain_updates = 1000;
  int learner_period = 1;  // env steps per learner update
  int dynamics_period = 1;  // env steps per dynamics update

  // networks
  int hidden_width = 64;
  int policy_layers = 4;
  int critic_layers = 4;
  int transition_layers = 8;
  int reward_layers = 4;
  int termination_layers = 4;

  // schedule
  std::int64_t total_steps = 100000;
  std::int64_t eval_period = 1000;
  int workers = 1;
  int snapshot_period = 1;  // learner updates between policy publications
  std::vector<std::uint64_t> seeds{0, 1, 2, 3};

  // evaluation
  std::string eval_member = "first";  // first | mean
  std::int64_t oracle_episodes = 100000;
  std::uint64_t oracle_seed = 12345;

  // output
  std::string output_dir = "runs";
  std::string run_name;  // empty: derived from env, k and estimator

  void validate() const;

  std::string resolved_run_name() const;
  bool needs_dynamics() const { return estimator != expansion::EstimatorKind::TD0; }
  dynamics::ModelMode resolved_dynamics_mode() const;

  env::ToyEnvConfig toy_config() const;
  expansion::ExpansionConfig expansion_config() const;
  agent::AgentConfig agent_config() const;
  dynamics::DynamicsConfig dynamics_config() const;
};

// Name, help text and string accessors for one RunConfig field.
struct ConfigField {
  std::string name;
  std::string help;
  std::function<void(RunConfig&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

const std::vector<ConfigField>& config_fields();

// Applies one key=value assignment; throws ConfigError for unknown keys or
// unparsable values.
void set_field(RunConfig& config, const std::string& key, const std::string& value);

// key = value lines; '#' starts a comment.
void apply_config_text(RunConfig& config, std::istream& in);
void apply_config_file(RunConfig& config, const std::filesystem::path& path);

// Every field, one key = value per line, in registry order.
void write_resolved_config(std::ostream& out, const RunConfig& config);

}  // namespace rave::harness

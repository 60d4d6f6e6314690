#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <span>
#include <string>

#include "rave/env/environment.hpp"
#include "rave/rng.hpp"

namespace rave::env {

// One-dimensional walk on [-bound, bound]. Each step moves by sign(a) plus
// noise_scale * N(0, 1). Leaving the interval ends the episode with a side
// dependent terminal reward; landing inside the trap interval costs
// trap_reward; any other step costs step_penalty.
struct ToyEnvConfig {
  double noise_scale = 0.0;
  double step_penalty = -100.0;
  double trap_low = 1.01;
  double trap_high = 1.011;
  double trap_reward = -20000.0;
  double right_terminal_reward = 1000.0;
  double left_terminal_reward = 984.0;
  double bound = 5.0;
  int step_cap = 1000;

  void validate() const;
};

struct EnvState {
  double position = 0.0;
  bool done = false;  // episode over (terminal or truncated)
  int steps = 0;
};

struct ToyStep {
  EnvState state;
  double reward = 0.0;
  bool terminal = false;
  bool truncated = false;
};

// sign(action) with sign(0) = +1.
double action_direction(double action);

// Deterministic transition given an explicit standard-normal draw.
ToyStep toy_transition(const ToyEnvConfig& config, const EnvState& state, double action,
                       double standard_normal);

class ToyEnv final : public Environment {
 public:
  explicit ToyEnv(ToyEnvConfig config = {});

  int state_dim() const override { return 1; }
  int action_dim() const override { return 1; }

  EnvState reset_state(std::uint64_t seed);
  ToyStep step_scalar(double action);

  std::vector<double> reset(std::uint64_t seed) override;
  std::vector<double> reset() override;
  StepOutcome step(std::span<const double> action) override;

  const EnvState& state() const { return state_; }
  const ToyEnvConfig& config() const { return config_; }

  void save(std::ostream& out) const override;
  void load(std::istream& in) override;

 private:
  ToyEnvConfig config_;
  EnvState state_;
  Rng rng_;
};

// Builds an environment by name ("toy").
std::unique_ptr<Environment> make_environment(const std::string& name, const ToyEnvConfig& toy);

}  // namespace rave::env

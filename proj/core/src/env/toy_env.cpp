#include "rave/env/toy_env.hpp"

#include <cmath>
#include <istream>
#include <ostream>

#include "rave/errors.hpp"

namespace rave::env {

void ToyEnvConfig::validate() const {
  if (!(noise_scale >= 0.0)) throw ConfigError("toy env: noise scale must be >= 0");
  if (!(bound > 0.0)) throw ConfigError("toy env: bound must be positive");
  if (!(trap_low < trap_high && trap_low > -bound && trap_high < bound)) {
    throw ConfigError("toy env: trap interval must lie strictly inside the state space");
  }
  if (step_cap <= 0) throw ConfigError("toy env: step cap must be positive");
}

double action_direction(double action) { return action < 0.0 ? -1.0 : 1.0; }

ToyStep toy_transition(const ToyEnvConfig& config, const EnvState& state, double action,
                       double standard_normal) {
  if (state.done) throw UsageError("toy env: step called on a finished episode");
  ToyStep out;
  out.state.position = state.position + action_direction(action) + config.noise_scale * standard_normal;
  out.state.steps = state.steps + 1;
  const double s = out.state.position;

  if (s > config.bound) {
    out.reward = config.right_terminal_reward;
    out.terminal = true;
  } else if (s < -config.bound) {
    out.reward = config.left_terminal_reward;
    out.terminal = true;
  } else if (s > config.trap_low && s < config.trap_high) {
    out.reward = config.trap_reward;
  } else {
    out.reward = config.step_penalty;
  }
  out.truncated = !out.terminal && out.state.steps >= config.step_cap;
  out.state.done = out.terminal || out.truncated;
  return out;
}

ToyEnv::ToyEnv(ToyEnvConfig config) : config_(config) {
  config_.validate();
  state_.done = true;
}

EnvState ToyEnv::reset_state(std::uint64_t seed) {
  rng_.seed(seed);
  state_ = EnvState{};
  return state_;
}

ToyStep ToyEnv::step_scalar(double action) {
  if (state_.done) throw UsageError("toy env: step called on a finished episode; reset first");
  // Draw even when k = 0 so the RNG stream does not depend on k.
  const double eta = rng_.normal();
  ToyStep out = toy_transition(config_, state_, action, eta);
  state_ = out.state;
  return out;
}

std::vector<double> ToyEnv::reset(std::uint64_t seed) { return {reset_state(seed).position}; }

std::vector<double> ToyEnv::reset() {
  state_ = EnvState{};
  return {state_.position};
}

StepOutcome ToyEnv::step(std::span<const double> action) {
  if (action.size() != 1) throw ConfigError("toy env: action must be 1-dimensional");
  const ToyStep s = step_scalar(action[0]);
  return {{s.state.position}, s.reward, s.terminal, s.truncated};
}

void ToyEnv::save(std::ostream& out) const {
  const auto old_precision = out.precision(17);
  out << "toy-env " << state_.position << ' ' << state_.done << ' ' << state_.steps << '\n';
  out.precision(old_precision);
  rng_.save(out);
}

void ToyEnv::load(std::istream& in) {
  std::string tag;
  in >> tag >> state_.position >> state_.done >> state_.steps;
  if (tag != "toy-env" || !in) throw UsageError("toy env: malformed state");
  rng_.load(in);
}

std::unique_ptr<Environment> make_environment(const std::string& name, const ToyEnvConfig& toy) {
  if (name == "toy") return std::make_unique<ToyEnv>(toy);
  throw ConfigError("unknown environment: " + name);
}

}  // namespace rave::env

#include "rave/agent/actor_critic.hpp"

#include <algorithm>
#include <istream>
#include <ostream>
#include <string>

#include "rave/errors.hpp"
#include "rave/nn/losses.hpp"

namespace rave::agent {

std::string_view to_string(CriticReduction r) {
  return r == CriticReduction::Mean ? "mean" : "first";
}

CriticReduction critic_reduction_from_string(std::string_view name) {
  if (name == "mean") return CriticReduction::Mean;
  if (name == "first") return CriticReduction::FirstMember;
  throw ConfigError("unknown critic reduction: " + std::string(name));
}

void AgentConfig::validate() const {
  if (state_dim < 1 || action_dim < 1) throw ConfigError("agent: dimensions must be >= 1");
  if (hidden_width < 1) throw ConfigError("agent: hidden width must be >= 1");
  if (policy_layers < 1 || critic_layers < 1) throw ConfigError("agent: need at least one layer");
  if (critic_ensemble < 1) throw ConfigError("agent: critic ensemble must be >= 1");
  if (!(tau >= 0.0 && tau <= 1.0)) throw ConfigError("agent: tau must lie in [0, 1]");
  if (!(explore_probability >= 0.0 && explore_probability <= 1.0)) {
    throw ConfigError("agent: exploration probability must lie in [0, 1]");
  }
  if (!(explore_std >= 0.0)) throw ConfigError("agent: exploration std must be >= 0");
}

namespace {

std::vector<int> layer_widths(int input, int hidden, int layers, int output) {
  std::vector<int> widths{input};
  for (int l = 0; l + 1 < layers; ++l) widths.push_back(hidden);
  widths.push_back(output);
  return widths;
}

Matrix row_matrix(std::span<const double> v) {
  Matrix m(1, static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) m(0, static_cast<Eigen::Index>(i)) = v[i];
  return m;
}

}  // namespace

ActorCritic::ActorCritic(AgentConfig config, std::uint64_t seed) : config_(config) {
  config_.validate();
  const int s = config_.state_dim;
  const int a = config_.action_dim;
  const int h = config_.hidden_width;
  policy_ = nn::Mlp(layer_widths(s, h, config_.policy_layers, a), nn::OutputHead::Tanh,
                    seed * 1000003ULL + 11);
  policy_opt_ = nn::Adam(policy_.parameters().size(), config_.policy_adam);
  for (int m = 0; m < config_.critic_ensemble; ++m) {
    nn::Mlp critic(layer_widths(s + a, h, config_.critic_layers, 1), nn::OutputHead::Identity,
                   seed * 1000003ULL + 101 + static_cast<std::uint64_t>(m));
    critic_opts_.emplace_back(critic.parameters().size(), config_.critic_adam);
    targets_.push_back(critic);
    critics_.push_back(std::move(critic));
  }
}

Matrix ActorCritic::critic_input(const Matrix& states, const Matrix& actions) const {
  Matrix out(states.rows(), states.cols() + actions.cols());
  out << states, actions;
  return out;
}

std::vector<double> select_action(const nn::Mlp& policy, std::span<const double> state,
                                  bool explore, double explore_probability, double explore_std,
                                  Rng& rng) {
  const Matrix a = policy.forward(row_matrix(state));
  std::vector<double> action(a.data(), a.data() + a.size());
  if (explore && explore_probability > 0.0 && rng.uniform() < explore_probability) {
    for (double& x : action) x = std::clamp(x + explore_std * rng.normal(), -1.0, 1.0);
  }
  return action;
}

std::vector<double> ActorCritic::select_action(std::span<const double> state, bool explore,
                                               Rng& rng) const {
  return agent::select_action(policy_, state, explore, config_.explore_probability,
                              config_.explore_std, rng);
}

double ActorCritic::critic_update(const TransitionBatch& batch, std::span<const double> targets) {
  if (static_cast<Eigen::Index>(targets.size()) != batch.size()) {
    throw ConfigError("critic_update: one target per batch row required");
  }
  Matrix y(batch.size(), 1);
  for (Eigen::Index r = 0; r < batch.size(); ++r) y(r, 0) = targets[static_cast<std::size_t>(r)];
  const Matrix input = critic_input(batch.states, batch.actions);
  double total = 0.0;
  for (std::size_t m = 0; m < critics_.size(); ++m) {
    const nn::ForwardPass pass = critics_[m].record(input);
    Matrix grad;
    total += nn::mean_squared_error(pass.output, y, &grad);
    nn::backward_and_step(critics_[m], pass, grad, critic_opts_[m]);
  }
  return total / static_cast<double>(critics_.size());
}

double ActorCritic::actor_update(const TransitionBatch& batch) {
  const Eigen::Index b = batch.size();
  if (b < 1) throw UsageError("actor_update: empty batch");
  const nn::ForwardPass pi = policy_.record(batch.states);
  const Matrix input = critic_input(batch.states, pi.output);
  const std::size_t used = config_.actor_signal == CriticReduction::Mean ? critics_.size() : 1;
  const double scale = 1.0 / (static_cast<double>(b) * static_cast<double>(used));

  Matrix action_grad = Matrix::Zero(b, config_.action_dim);
  double loss = 0.0;
  for (std::size_t m = 0; m < used; ++m) {
    const nn::ForwardPass q = critics_[m].record(input);
    loss -= q.output.sum() * scale;
    const nn::Gradients g = critics_[m].backward(q, Matrix::Constant(b, 1, -scale));
    action_grad += g.input.rightCols(config_.action_dim);
  }
  nn::backward_and_step(policy_, pi, action_grad, policy_opt_);
  return loss;
}

double ActorCritic::policy_loss(const Matrix& states) const {
  const Matrix input = critic_input(states, policy_.forward(states));
  const std::size_t used = config_.actor_signal == CriticReduction::Mean ? critics_.size() : 1;
  double total = 0.0;
  for (std::size_t m = 0; m < used; ++m) total += critics_[m].forward(input).sum();
  return -total / (static_cast<double>(states.rows()) * static_cast<double>(used));
}

void ActorCritic::target_sync(double tau) {
  for (std::size_t m = 0; m < critics_.size(); ++m) nn::soft_update(targets_[m], critics_[m], tau);
}

double ActorCritic::q_value(int member, std::span<const double> state,
                            std::span<const double> action) const {
  const nn::Mlp& critic = critics_.at(static_cast<std::size_t>(member));
  return critic.forward(critic_input(row_matrix(state), row_matrix(action)))(0, 0);
}

double ActorCritic::q_mean(std::span<const double> state, std::span<const double> action) const {
  double total = 0.0;
  for (int m = 0; m < static_cast<int>(critics_.size()); ++m) total += q_value(m, state, action);
  return total / static_cast<double>(critics_.size());
}

void ActorCritic::save(std::ostream& out) const {
  const auto old_precision = out.precision(17);
  out << "rave-agent 1\n"
      << config_.state_dim << ' ' << config_.action_dim << ' ' << config_.hidden_width << ' '
      << config_.policy_layers << ' ' << config_.critic_layers << ' ' << config_.critic_ensemble
      << ' ' << config_.tau << ' ' << config_.explore_probability << ' ' << config_.explore_std
      << ' ' << to_string(config_.actor_signal) << '\n';
  out.precision(old_precision);
  nn::save(out, policy_);
  policy_opt_.save(out);
  for (std::size_t m = 0; m < critics_.size(); ++m) {
    nn::save(out, critics_[m]);
    nn::save(out, targets_[m]);
    critic_opts_[m].save(out);
  }
}

ActorCritic ActorCritic::load(std::istream& in) {
  std::string tag;
  int version = 0;
  in >> tag >> version;
  if (tag != "rave-agent" || version != 1) throw UsageError("agent: not a rave-agent v1 record");
  ActorCritic ac;
  AgentConfig& c = ac.config_;
  std::string signal;
  in >> c.state_dim >> c.action_dim >> c.hidden_width >> c.policy_layers >> c.critic_layers >>
      c.critic_ensemble >> c.tau >> c.explore_probability >> c.explore_std >> signal;
  if (!in) throw UsageError("agent: malformed header");
  c.actor_signal = critic_reduction_from_string(signal);
  c.validate();
  ac.policy_ = nn::load_mlp(in);
  ac.policy_opt_ = nn::Adam::load(in);
  c.policy_adam = ac.policy_opt_.config();
  for (int m = 0; m < c.critic_ensemble; ++m) {
    ac.critics_.push_back(nn::load_mlp(in));
    ac.targets_.push_back(nn::load_mlp(in));
    ac.critic_opts_.push_back(nn::Adam::load(in));
  }
  c.critic_adam = ac.critic_opts_.front().config();
  return ac;
}

LearnerStep learner_update(ActorCritic& agent, const dynamics::DynamicsEnsemble* dynamics,
                           const TransitionBatch& batch, const expansion::ExpansionConfig& config,
                           Rng& rng) {
  if (config.kind == expansion::EstimatorKind::STEVE || config.kind == expansion::EstimatorKind::RAVE ||
      config.kind == expansion::EstimatorKind::MVE) {
    if (!dynamics) throw ConfigError("learner: value expansion requires a dynamics ensemble");
    if (dynamics->size() != agent.config().critic_ensemble ||
        config.ensemble_size != agent.config().critic_ensemble) {
      throw ConfigError("learner: critic ensemble size must match the dynamics ensemble size");
    }
  }
  const expansion::TargetBatch targets =
      expansion::compute_targets(batch, dynamics, agent.value_models(), config, rng);
  LearnerStep step;
  step.critic_loss = agent.critic_update(batch, targets.targets);
  step.actor_loss = agent.actor_update(batch);
  agent.target_sync();
  step.diagnostics = targets.diagnostics;
  return step;
}

}  // namespace rave::agent

#include "rave/dynamics/ensemble.hpp"

#include <cmath>
#include <istream>
#include <ostream>
#include <string>

#include "rave/errors.hpp"
#include "rave/nn/losses.hpp"

namespace rave::dynamics {

std::string_view to_string(ModelMode mode) {
  return mode == ModelMode::Deterministic ? "deterministic" : "probabilistic";
}

ModelMode model_mode_from_string(std::string_view name) {
  if (name == "deterministic") return ModelMode::Deterministic;
  if (name == "probabilistic") return ModelMode::Probabilistic;
  throw ConfigError("unknown dynamics mode: " + std::string(name));
}

std::string_view to_string(TerminationSampling sampling) {
  return sampling == TerminationSampling::Clip ? "clip" : "threshold";
}

TerminationSampling termination_sampling_from_string(std::string_view name) {
  if (name == "clip") return TerminationSampling::Clip;
  if (name == "threshold") return TerminationSampling::Threshold;
  throw ConfigError("unknown termination sampling: " + std::string(name));
}

void DynamicsConfig::validate() const {
  if (ensemble_size < 1) throw ConfigError("dynamics: ensemble size must be >= 1");
  if (state_dim < 1 || action_dim < 1) throw ConfigError("dynamics: dimensions must be >= 1");
  if (hidden_width < 1) throw ConfigError("dynamics: hidden width must be >= 1");
  if (transition_layers < 1 || reward_layers < 1 || termination_layers < 1) {
    throw ConfigError("dynamics: every model needs at least one layer");
  }
}

namespace {

// `layers` linear layers: input -> hidden x (layers - 1) -> output.
std::vector<int> layer_widths(int input, int hidden, int layers, int output) {
  std::vector<int> widths{input};
  for (int l = 0; l + 1 < layers; ++l) widths.push_back(hidden);
  widths.push_back(output);
  return widths;
}

Matrix concat(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows(), a.cols() + b.cols());
  out << a, b;
  return out;
}

Matrix concat(const Matrix& a, const Matrix& b, const Matrix& c) {
  Matrix out(a.rows(), a.cols() + b.cols() + c.cols());
  out << a, b, c;
  return out;
}

Matrix select_rows(const Matrix& m, const std::vector<Eigen::Index>& rows) {
  Matrix out(static_cast<Eigen::Index>(rows.size()), m.cols());
  for (std::size_t r = 0; r < rows.size(); ++r) out.row(static_cast<Eigen::Index>(r)) = m.row(rows[r]);
  return out;
}

}  // namespace

DynamicsEnsemble::DynamicsEnsemble(DynamicsConfig config, std::uint64_t seed) : config_(config) {
  config_.validate();
  const nn::OutputHead head = config_.mode == ModelMode::Probabilistic ? nn::OutputHead::Gaussian
                                                                       : nn::OutputHead::Identity;
  const int s = config_.state_dim;
  const int a = config_.action_dim;
  const int h = config_.hidden_width;
  members_.reserve(static_cast<std::size_t>(config_.ensemble_size));
  for (int i = 0; i < config_.ensemble_size; ++i) {
    const std::uint64_t base = seed * 1000003ULL + static_cast<std::uint64_t>(i) * 7919ULL;
    Member m;
    m.transition = nn::Mlp(layer_widths(s + a, h, config_.transition_layers, s), head, base + 1);
    m.reward = nn::Mlp(layer_widths(s + a + s, h, config_.reward_layers, 1), head, base + 2);
    m.termination = nn::Mlp(layer_widths(s, h, config_.termination_layers, 1), head, base + 3);
    m.transition_opt = nn::Adam(m.transition.parameters().size(), config_.adam);
    m.reward_opt = nn::Adam(m.reward.parameters().size(), config_.adam);
    m.termination_opt = nn::Adam(m.termination.parameters().size(), config_.adam);
    members_.push_back(std::move(m));
  }
}

std::size_t DynamicsEnsemble::index(int member) const {
  if (member < 0 || member >= size()) {
    throw ConfigError("dynamics: member index " + std::to_string(member) + " out of range");
  }
  return static_cast<std::size_t>(member);
}

GaussianPrediction DynamicsEnsemble::head(const nn::Mlp& net, const Matrix& input) const {
  Matrix out = net.forward(input);
  if (config_.mode == ModelMode::Deterministic) {
    return {std::move(out), Matrix::Zero(input.rows(), net.output_width())};
  }
  nn::GaussianBatch g = nn::split_gaussian(out);
  return {std::move(g.mean), std::move(g.variance)};
}

GaussianPrediction DynamicsEnsemble::transition_distribution(int member, const Matrix& states,
                                                             const Matrix& actions) const {
  GaussianPrediction p = head(members_[index(member)].transition, concat(states, actions));
  p.mean += states;
  return p;
}

GaussianPrediction DynamicsEnsemble::reward_distribution(int member, const Matrix& states,
                                                         const Matrix& actions,
                                                         const Matrix& next_states) const {
  return head(members_[index(member)].reward, concat(states, actions, next_states));
}

GaussianPrediction DynamicsEnsemble::termination_distribution(int member,
                                                              const Matrix& next_states) const {
  return head(members_[index(member)].termination, next_states);
}

Matrix sample_gaussian(const GaussianPrediction& prediction, Rng& rng) {
  Matrix out = prediction.mean;
  for (Eigen::Index r = 0; r < out.rows(); ++r) {
    for (Eigen::Index c = 0; c < out.cols(); ++c) {
      out(r, c) += std::sqrt(prediction.variance(r, c)) * rng.normal();
    }
  }
  return out;
}

Matrix DynamicsEnsemble::predict_transition(int member, const Matrix& states, const Matrix& actions,
                                            bool sample, Rng& rng) const {
  GaussianPrediction p = transition_distribution(member, states, actions);
  if (!sample || config_.mode == ModelMode::Deterministic) return std::move(p.mean);
  return sample_gaussian(p, rng);
}

Matrix DynamicsEnsemble::predict_reward(int member, const Matrix& states, const Matrix& actions,
                                        const Matrix& next_states, bool sample, Rng& rng) const {
  GaussianPrediction p = reward_distribution(member, states, actions, next_states);
  if (!sample || config_.mode == ModelMode::Deterministic) return std::move(p.mean);
  return sample_gaussian(p, rng);
}

Matrix DynamicsEnsemble::predict_termination(int member, const Matrix& next_states, bool sample,
                                             Rng& rng) const {
  GaussianPrediction p = termination_distribution(member, next_states);
  Matrix d = (!sample || config_.mode == ModelMode::Deterministic) ? std::move(p.mean)
                                                                    : sample_gaussian(p, rng);
  if (config_.termination_sampling == TerminationSampling::Threshold) {
    return (d.array() >= 0.5).select(Matrix::Ones(d.rows(), d.cols()), 0.0);
  }
  return d.cwiseMax(0.0).cwiseMin(1.0);
}

Matrix DynamicsEnsemble::mean_transition(const Matrix& states, const Matrix& actions) const {
  Matrix acc = Matrix::Zero(states.rows(), states.cols());
  for (int i = 0; i < size(); ++i) acc += transition_distribution(i, states, actions).mean;
  return acc / static_cast<double>(size());
}

double DynamicsEnsemble::fit(nn::Mlp& net, nn::Adam& opt, const Matrix& input,
                             const Matrix& target) {
  const nn::ForwardPass pass = net.record(input);
  Matrix grad;
  const double loss = config_.mode == ModelMode::Probabilistic
                          ? nn::gaussian_nll(pass.output, target, &grad)
                          : nn::mean_squared_error(pass.output, target, &grad);
  nn::backward_and_step(net, pass, grad, opt);
  return loss;
}

std::vector<MemberLoss> DynamicsEnsemble::train(const TransitionBatch& batch, Rng& rng) {
  const Eigen::Index n = batch.size();
  if (n < 1) throw UsageError("dynamics: training batch is empty");
  std::vector<MemberLoss> losses;
  losses.reserve(members_.size());
  std::vector<Eigen::Index> rows(static_cast<std::size_t>(n));
  for (Member& m : members_) {
    for (Eigen::Index r = 0; r < n; ++r) {
      rows[static_cast<std::size_t>(r)] =
          config_.bootstrap ? static_cast<Eigen::Index>(rng.index(static_cast<std::size_t>(n))) : r;
    }
    const Matrix s = select_rows(batch.states, rows);
    const Matrix a = select_rows(batch.actions, rows);
    const Matrix s2 = select_rows(batch.next_states, rows);
    const Matrix r = select_rows(batch.rewards, rows);
    const Matrix d = select_rows(batch.dones, rows);

    MemberLoss loss;
    loss.transition = fit(m.transition, m.transition_opt, concat(s, a), s2 - s);
    loss.reward = fit(m.reward, m.reward_opt, concat(s, a, s2), r);
    loss.termination = fit(m.termination, m.termination_opt, s2, d);
    losses.push_back(loss);
  }
  return losses;
}

void DynamicsEnsemble::set_learning_rate(double lr) {
  if (!(lr > 0.0)) throw ConfigError("dynamics: learning rate must be positive");
  config_.adam.learning_rate = lr;
  for (Member& m : members_) {
    m.transition_opt.set_learning_rate(lr);
    m.reward_opt.set_learning_rate(lr);
    m.termination_opt.set_learning_rate(lr);
  }
}

void DynamicsEnsemble::save(std::ostream& out) const {
  out << "rave-dynamics 1\n";
  out << config_.ensemble_size << ' ' << to_string(config_.mode) << ' ' << config_.state_dim << ' '
      << config_.action_dim << ' ' << config_.hidden_width << ' ' << config_.transition_layers
      << ' ' << config_.reward_layers << ' ' << config_.termination_layers << ' '
      << to_string(config_.termination_sampling) << ' ' << config_.bootstrap << '\n';
  for (const Member& m : members_) {
    nn::save(out, m.transition);
    nn::save(out, m.reward);
    nn::save(out, m.termination);
    m.transition_opt.save(out);
    m.reward_opt.save(out);
    m.termination_opt.save(out);
  }
}

DynamicsEnsemble DynamicsEnsemble::load(std::istream& in) {
  std::string tag;
  int version = 0;
  in >> tag >> version;
  if (tag != "rave-dynamics" || version != 1) throw UsageError("dynamics: not a v1 record");
  DynamicsEnsemble e;
  std::string mode;
  std::string sampling;
  DynamicsConfig& c = e.config_;
  in >> c.ensemble_size >> mode >> c.state_dim >> c.action_dim >> c.hidden_width >>
      c.transition_layers >> c.reward_layers >> c.termination_layers >> sampling >> c.bootstrap;
  if (!in) throw UsageError("dynamics: malformed header");
  c.mode = model_mode_from_string(mode);
  c.termination_sampling = termination_sampling_from_string(sampling);
  c.validate();
  for (int i = 0; i < c.ensemble_size; ++i) {
    Member m;
    m.transition = nn::load_mlp(in);
    m.reward = nn::load_mlp(in);
    m.termination = nn::load_mlp(in);
    m.transition_opt = nn::Adam::load(in);
    m.reward_opt = nn::Adam::load(in);
    m.termination_opt = nn::Adam::load(in);
    e.members_.push_back(std::move(m));
  }
  c.adam = e.members_.front().transition_opt.config();
  return e;
}

}  // namespace rave::dynamics

#include "rave/expansion/value_expansion.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "rave/errors.hpp"

namespace rave::expansion {

std::string_view to_string(EstimatorKind kind) {
  switch (kind) {
    case EstimatorKind::TD0: return "td0";
    case EstimatorKind::MVE: return "mve";
    case EstimatorKind::STEVE: return "steve";
    case EstimatorKind::RAVE: return "rave";
  }
  return "td0";
}

EstimatorKind estimator_from_string(std::string_view name) {
  if (name == "td0" || name == "ddpg") return EstimatorKind::TD0;
  if (name == "mve") return EstimatorKind::MVE;
  if (name == "steve") return EstimatorKind::STEVE;
  if (name == "rave") return EstimatorKind::RAVE;
  throw ConfigError("unknown estimator: " + std::string(name));
}

void ExpansionConfig::validate() const {
  if (max_horizon < 0) throw ConfigError("expansion: max horizon must be >= 0");
  if (ensemble_size < 1) throw ConfigError("expansion: ensemble size must be >= 1");
  if (!(alpha >= 0.0)) throw ConfigError("expansion: alpha must be >= 0");
  if (!(error_scale > 0.0)) throw ConfigError("expansion: error scale Z must be > 0");
  if (!(gamma > 0.0 && gamma < 1.0)) throw ConfigError("expansion: gamma must lie in (0, 1)");
  if (!(weight_epsilon > 0.0)) throw ConfigError("expansion: weight epsilon must be > 0");
}

double continuation_mask(double origin_done, std::span<const double> terminations, int offset) {
  if (offset < 1 || static_cast<std::size_t>(offset - 1) > terminations.size()) {
    throw ConfigError("continuation_mask: offset outside the imagined horizon");
  }
  double mask = 1.0 - origin_done;
  for (int m = 0; m + 1 < offset; ++m) mask *= 1.0 - terminations[static_cast<std::size_t>(m)];
  return mask;
}

double expansion_value(double origin_reward, double origin_done, std::span<const double> rewards,
                       std::span<const double> terminations, double tail_value, double gamma) {
  if (terminations.size() != rewards.size()) {
    throw ConfigError("expansion_value: need one termination per imagined reward");
  }
  const std::size_t horizon = rewards.size();
  double value = origin_reward;
  double discount = 1.0;
  double mask = 1.0 - origin_done;
  for (std::size_t h = 0; h < horizon; ++h) {
    discount *= gamma;
    if (h > 0) mask *= 1.0 - terminations[h - 1];
    value += discount * mask * rewards[h];
  }
  discount *= gamma;
  if (horizon > 0) mask *= 1.0 - terminations[horizon - 1];
  value += discount * mask * tail_value;
  return value;
}

double expansion_value(const ImaginedTrajectory& t, double gamma) {
  return expansion_value(t.origin_reward, t.origin_done, t.rewards, t.terminations, t.tail_value,
                         gamma);
}

double td0_target(double reward, double done, double next_value, double gamma) {
  return reward + gamma * (1.0 - done) * next_value;
}

double mve_target(const ImaginedTrajectory& trajectory, double gamma) {
  if (trajectory.terminations.size() != trajectory.rewards.size()) {
    throw ConfigError("mve_target: malformed trajectory");
  }
  return expansion_value(trajectory, gamma);
}

namespace {

Matrix concat(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows(), a.cols() + b.cols());
  out << a, b;
  return out;
}

void check_models(const dynamics::DynamicsEnsemble& dynamics, const ValueModels& models,
                  const MemberTriple& m) {
  if (m.transition < 0 || m.transition >= dynamics.size() || m.reward < 0 ||
      m.reward >= dynamics.size()) {
    throw ConfigError("imagine: dynamics member out of range");
  }
  if (m.critic < 0 || static_cast<std::size_t>(m.critic) >= models.target_critics.size()) {
    throw ConfigError("imagine: critic member out of range");
  }
}

}  // namespace

ImaginedTrajectory imagine(const dynamics::DynamicsEnsemble& dynamics, const ValueModels& models,
                           const MemberTriple& members, const Origin& origin, int horizon,
                           bool sample, Rng& rng) {
  if (horizon < 0) throw ConfigError("imagine: horizon must be >= 0");
  check_models(dynamics, models, members);
  const int sd = dynamics.config().state_dim;
  if (static_cast<int>(origin.next_state.size()) != sd) throw ConfigError("imagine: state width");

  ImaginedTrajectory t;
  t.origin_reward = origin.reward;
  t.origin_done = origin.done;
  t.transition_member = members.transition;
  t.reward_member = members.reward;
  t.critic_member = members.critic;
  t.states.resize(horizon + 1, sd);
  t.actions.resize(horizon + 1, dynamics.config().action_dim);
  for (int d = 0; d < sd; ++d) t.states(0, d) = origin.next_state[static_cast<std::size_t>(d)];

  Matrix s = t.states.row(0);
  Matrix a = models.policy.forward(s);
  t.actions.row(0) = a;
  for (int h = 0; h < horizon; ++h) {
    Matrix next = dynamics.predict_transition(members.transition, s, a, sample, rng);
    const Matrix done = dynamics.predict_termination(members.transition, next, sample, rng);
    const Matrix reward = dynamics.predict_reward(members.reward, s, a, next, sample, rng);
    t.rewards.push_back(reward(0, 0));
    t.terminations.push_back(done(0, 0));
    s = std::move(next);
    a = models.policy.forward(s);
    t.states.row(h + 1) = s;
    t.actions.row(h + 1) = a;
  }
  const nn::Mlp& critic = models.target_critics[static_cast<std::size_t>(members.critic)];
  t.tail_value = critic.forward(concat(s, a))(0, 0);
  return t;
}

DveResult dve_rollout(const dynamics::DynamicsEnsemble& dynamics, const ValueModels& models,
                      const MemberTriple& members, const Origin& origin, int horizon, double gamma,
                      Rng& rng) {
  DveResult result{imagine(dynamics, models, members, origin, horizon, true, rng), 0.0};
  result.value = expansion_value(result.trajectory, gamma);
  return result;
}

CandidateMatrix::CandidateMatrix(int ensemble_size, int max_horizon)
    : n_(ensemble_size), max_horizon_(max_horizon) {
  if (ensemble_size < 1 || max_horizon < 0) throw ConfigError("candidate matrix: bad shape");
  combos_ = static_cast<std::size_t>(n_) * static_cast<std::size_t>(n_) * static_cast<std::size_t>(n_);
  values_.assign(combos_ * static_cast<std::size_t>(max_horizon_ + 1), 0.0);
}

std::size_t CandidateMatrix::combination_index(int i, int j, int k, int n) {
  return (static_cast<std::size_t>(i) * static_cast<std::size_t>(n) + static_cast<std::size_t>(j)) *
             static_cast<std::size_t>(n) +
         static_cast<std::size_t>(k);
}

double& CandidateMatrix::at(std::size_t c, int h) {
  return values_.at(static_cast<std::size_t>(h) * combos_ + c);
}

double CandidateMatrix::at(std::size_t c, int h) const {
  return values_.at(static_cast<std::size_t>(h) * combos_ + c);
}

std::span<const double> CandidateMatrix::horizon(int h) const {
  if (h < 0 || h > max_horizon_) throw ConfigError("candidate matrix: horizon out of range");
  return {values_.data() + static_cast<std::size_t>(h) * combos_, combos_};
}

std::span<double> CandidateMatrix::horizon(int h) {
  if (h < 0 || h > max_horizon_) throw ConfigError("candidate matrix: horizon out of range");
  return {values_.data() + static_cast<std::size_t>(h) * combos_, combos_};
}

dynamics::EnsembleStats CandidateMatrix::horizon_stats(int h) const {
  return dynamics::ensemble_stats(horizon(h));
}

std::vector<CandidateMatrix> build_candidates(const TransitionBatch& batch,
                                              const dynamics::DynamicsEnsemble& dynamics,
                                              const ValueModels& models,
                                              const ExpansionConfig& config, bool sample,
                                              Rng& rng) {
  config.validate();
  const int n = config.ensemble_size;
  const int hmax = config.max_horizon;
  if (dynamics.size() != n || static_cast<int>(models.target_critics.size()) != n) {
    throw ConfigError("build_candidates: dynamics and critic ensembles must both have N members");
  }
  const Eigen::Index b = batch.size();
  std::vector<CandidateMatrix> out(static_cast<std::size_t>(b), CandidateMatrix(n, hmax));

  // rewards_[j][h * B + row], terminations[h * B + row], values_[k][h * B + row]
  std::vector<std::vector<double>> rewards(static_cast<std::size_t>(n));
  std::vector<std::vector<double>> tails(static_cast<std::size_t>(n));
  std::vector<double> terminations;
  std::vector<double> r_buf(static_cast<std::size_t>(hmax));
  std::vector<double> d_buf(static_cast<std::size_t>(hmax));

  for (int i = 0; i < n; ++i) {
    // Imagine one H_max-step state-action sequence with (zeta_s,i, zeta_d,i);
    // every prefix serves the shorter horizons.
    std::vector<Matrix> states{batch.next_states};
    std::vector<Matrix> actions{models.policy.forward(batch.next_states)};
    terminations.assign(static_cast<std::size_t>(hmax * b), 0.0);
    for (int h = 0; h < hmax; ++h) {
      Matrix next = dynamics.predict_transition(i, states.back(), actions.back(), sample, rng);
      const Matrix d = dynamics.predict_termination(i, next, sample, rng);
      for (Eigen::Index r = 0; r < b; ++r) terminations[static_cast<std::size_t>(h * b + r)] = d(r, 0);
      actions.push_back(models.policy.forward(next));
      states.push_back(std::move(next));
    }

    Matrix all_states(b * (hmax + 1), states.front().cols());
    Matrix all_actions(b * (hmax + 1), actions.front().cols());
    for (int h = 0; h <= hmax; ++h) {
      all_states.middleRows(h * b, b) = states[static_cast<std::size_t>(h)];
      all_actions.middleRows(h * b, b) = actions[static_cast<std::size_t>(h)];
    }

    if (hmax > 0) {
      const Matrix from_s = all_states.topRows(hmax * b);
      const Matrix from_a = all_actions.topRows(hmax * b);
      const Matrix to_s = all_states.bottomRows(hmax * b);
      for (int j = 0; j < n; ++j) {
        const Matrix r = dynamics.predict_reward(j, from_s, from_a, to_s, sample, rng);
        rewards[static_cast<std::size_t>(j)].assign(r.data(), r.data() + r.size());
      }
    }
    const Matrix critic_input = concat(all_states, all_actions);
    for (int k = 0; k < n; ++k) {
      const Matrix q = models.target_critics[static_cast<std::size_t>(k)].forward(critic_input);
      tails[static_cast<std::size_t>(k)].assign(q.data(), q.data() + q.size());
    }

    for (Eigen::Index row = 0; row < b; ++row) {
      CandidateMatrix& m = out[static_cast<std::size_t>(row)];
      const double r_t = batch.rewards(row, 0);
      const double done = batch.dones(row, 0);
      for (int h = 0; h < hmax; ++h) d_buf[static_cast<std::size_t>(h)] = terminations[static_cast<std::size_t>(h * b + row)];
      for (int j = 0; j < n; ++j) {
        for (int h = 0; h < hmax; ++h) {
          r_buf[static_cast<std::size_t>(h)] = rewards[static_cast<std::size_t>(j)][static_cast<std::size_t>(h * b + row)];
        }
        for (int k = 0; k < n; ++k) {
          const std::size_t c = CandidateMatrix::combination_index(i, j, k, n);
          const std::vector<double>& q = tails[static_cast<std::size_t>(k)];
          for (int h = 0; h <= hmax; ++h) {
            const auto len = static_cast<std::size_t>(h);
            m.at(c, h) = expansion_value(r_t, done, std::span(r_buf).first(len),
                                         std::span(d_buf).first(len),
                                         q[static_cast<std::size_t>(h * b + row)], config.gamma);
          }
        }
      }
    }
  }
  return out;
}

std::vector<double> horizon_weights(std::span<const double> variances, double epsilon) {
  if (variances.empty()) throw UsageError("horizon_weights: no horizons");
  std::vector<double> w(variances.size());
  double total = 0.0;
  for (std::size_t h = 0; h < variances.size(); ++h) {
    w[h] = 1.0 / (variances[h] + epsilon);
    total += w[h];
  }
  for (double& x : w) x /= total;
  return w;
}

double inverse_variance_interpolation(std::span<const double> values,
                                      std::span<const double> variances, double epsilon) {
  if (values.size() != variances.size()) {
    throw ConfigError("inverse_variance_interpolation: size mismatch");
  }
  const std::vector<double> w = horizon_weights(variances, epsilon);
  double out = 0.0;
  for (std::size_t h = 0; h < values.size(); ++h) out += w[h] * values[h];
  return out;
}

namespace {

struct HorizonSummary {
  std::vector<double> means;
  std::vector<double> variances;
};

HorizonSummary summarize(const CandidateMatrix& m) {
  HorizonSummary s;
  for (int h = 0; h <= m.max_horizon(); ++h) {
    const dynamics::EnsembleStats st = m.horizon_stats(h);
    s.means.push_back(st.mean);
    s.variances.push_back(st.variance);
  }
  return s;
}

double lower_bound(double mean, double variance, double alpha) {
  return mean - alpha * std::sqrt(variance);
}

}  // namespace

double steve_target(const CandidateMatrix& matrix, double weight_epsilon) {
  const HorizonSummary s = summarize(matrix);
  return inverse_variance_interpolation(s.means, s.variances, weight_epsilon);
}

double clb(std::span<const double> values, double alpha) {
  if (values.empty()) throw UsageError("clb: no candidate values");
  const dynamics::EnsembleStats st = dynamics::ensemble_stats(values);
  return lower_bound(st.mean, st.variance, alpha);
}

double adaptive_alpha(std::span<const double> predicted, std::span<const double> observed,
                      double alpha, double error_scale) {
  if (predicted.size() != observed.size()) throw ConfigError("adaptive_alpha: size mismatch");
  if (!(error_scale > 0.0)) throw ConfigError("adaptive_alpha: Z must be positive");
  double sq = 0.0;
  for (std::size_t d = 0; d < predicted.size(); ++d) {
    sq += (predicted[d] - observed[d]) * (predicted[d] - observed[d]);
  }
  return std::max(0.0, alpha * (1.0 - sq / error_scale));
}

std::vector<double> adaptive_alpha(const dynamics::DynamicsEnsemble& dynamics, const Matrix& states,
                                   const Matrix& actions, const Matrix& next_states, double alpha,
                                   double error_scale) {
  const Matrix predicted = dynamics.mean_transition(states, actions);
  std::vector<double> out(static_cast<std::size_t>(states.rows()));
  for (Eigen::Index r = 0; r < states.rows(); ++r) {
    const Eigen::RowVectorXd p = predicted.row(r);
    const Eigen::RowVectorXd o = next_states.row(r);
    out[static_cast<std::size_t>(r)] = adaptive_alpha(std::span(p.data(), static_cast<std::size_t>(p.size())),
                                                      std::span(o.data(), static_cast<std::size_t>(o.size())),
                                                      alpha, error_scale);
  }
  return out;
}

double rave_target(const CandidateMatrix& matrix, double alpha, double weight_epsilon) {
  HorizonSummary s = summarize(matrix);
  std::vector<double> bounds(s.means.size());
  for (std::size_t h = 0; h < bounds.size(); ++h) bounds[h] = lower_bound(s.means[h], s.variances[h], alpha);
  return inverse_variance_interpolation(bounds, s.variances, weight_epsilon);
}

TargetBatch compute_targets(const TransitionBatch& batch,
                            const dynamics::DynamicsEnsemble* dynamics, const ValueModels& models,
                            const ExpansionConfig& config, Rng& rng) {
  config.validate();
  const Eigen::Index b = batch.size();
  if (b < 1) throw UsageError("compute_targets: empty batch");
  if (models.target_critics.empty()) throw ConfigError("compute_targets: no target critics");

  TargetBatch out;
  out.targets.resize(static_cast<std::size_t>(b));
  TargetDiagnostics& diag = out.diagnostics;
  diag.mean_weights.assign(static_cast<std::size_t>(config.max_horizon + 1), 0.0);

  if (config.kind == EstimatorKind::TD0) {
    const Matrix next_actions = models.policy.forward(batch.next_states);
    const Matrix input = concat(batch.next_states, next_actions);
    Matrix q = Matrix::Zero(b, 1);
    for (const nn::Mlp& critic : models.target_critics) q += critic.forward(input);
    const double members = static_cast<double>(models.target_critics.size());
    for (Eigen::Index r = 0; r < b; ++r) {
      out.targets[static_cast<std::size_t>(r)] =
          td0_target(batch.rewards(r, 0), batch.dones(r, 0), q(r, 0) / members, config.gamma);
    }
    diag.mean_weights[0] = 1.0;
    return out;
  }

  if (!dynamics) throw ConfigError("compute_targets: value expansion needs a dynamics ensemble");
  const bool sample = config.kind == EstimatorKind::RAVE &&
                      dynamics->mode() == dynamics::ModelMode::Probabilistic;
  const std::vector<CandidateMatrix> candidates =
      build_candidates(batch, *dynamics, models, config, sample, rng);

  if (config.kind == EstimatorKind::MVE) {
    for (Eigen::Index r = 0; r < b; ++r) {
      out.targets[static_cast<std::size_t>(r)] =
          candidates[static_cast<std::size_t>(r)].horizon_stats(config.max_horizon).mean;
    }
    diag.mean_weights.back() = 1.0;
    return out;
  }

  std::vector<double> alphas(static_cast<std::size_t>(b), 0.0);
  if (config.kind == EstimatorKind::RAVE) {
    if (config.adaptive_alpha) {
      alphas = adaptive_alpha(*dynamics, batch.states, batch.actions, batch.next_states,
                              config.alpha, config.error_scale);
    } else {
      alphas.assign(alphas.size(), config.alpha);
    }
  }

  for (Eigen::Index r = 0; r < b; ++r) {
    const auto row = static_cast<std::size_t>(r);
    const HorizonSummary s = summarize(candidates[row]);
    const std::vector<double> w = horizon_weights(s.variances, config.weight_epsilon);
    double target = 0.0;
    double subtraction = 0.0;
    for (std::size_t h = 0; h < w.size(); ++h) {
      const double value = config.kind == EstimatorKind::RAVE
                               ? lower_bound(s.means[h], s.variances[h], alphas[row])
                               : s.means[h];
      target += w[h] * value;
      subtraction += w[h] * (s.means[h] - value);
      diag.mean_weights[h] += w[h] / static_cast<double>(b);
    }
    out.targets[row] = target;
    diag.mean_alpha += alphas[row] / static_cast<double>(b);
    diag.mean_clb_subtraction += subtraction / static_cast<double>(b);
  }
  return out;
}

}  // namespace rave::expansion

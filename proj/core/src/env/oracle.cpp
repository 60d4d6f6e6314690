#include "rave/env/oracle.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "rave/errors.hpp"
#include "rave/rng.hpp"

namespace rave::env {

ScalarPolicy always_right() {
  return [](double) { return 1.0; };
}

ScalarPolicy always_left() {
  return [](double) { return -1.0; };
}

ScalarPolicy policy_by_id(const std::string& policy_id) {
  if (policy_id == "always_right") return always_right();
  if (policy_id == "always_left") return always_left();
  throw ConfigError("unknown oracle policy: " + policy_id);
}

OracleEstimate ground_truth_value(const ToyEnvConfig& config, const ScalarPolicy& policy,
                                  double start_position, double start_action,
                                  std::int64_t episodes, double gamma, std::uint64_t seed) {
  if (episodes < 1) throw ConfigError("oracle: need at least one episode");
  config.validate();
  Rng rng(seed);

  // Welford accumulation of the per-episode discounted return.
  double mean = 0.0;
  double m2 = 0.0;
  for (std::int64_t e = 0; e < episodes; ++e) {
    EnvState state{start_position, false, 0};
    double action = start_action;
    double discount = 1.0;
    double ret = 0.0;
    while (!state.done) {
      const ToyStep step = toy_transition(config, state, action, rng.normal());
      ret += discount * step.reward;
      discount *= gamma;
      state = step.state;
      if (!state.done) action = policy(state.position);
    }
    const double delta = ret - mean;
    mean += delta / static_cast<double>(e + 1);
    m2 += delta * (ret - mean);
  }
  const double n = static_cast<double>(episodes);
  const double std_error = episodes > 1 ? std::sqrt(m2 / (n - 1.0) / n) : 0.0;
  return {mean, std_error, episodes};
}

void write_oracle_row(std::ostream& out, const OracleRecord& r) {
  const auto old_precision = out.precision(17);
  out << r.policy_id << ',' << r.noise_scale << ',' << r.gamma << ',' << r.mean << ','
      << r.std_error << ',' << r.episodes << ',' << r.seed << ',' << r.start_action << '\n';
  out.precision(old_precision);
}

std::vector<OracleRecord> read_oracle_csv(std::istream& in) {
  std::vector<OracleRecord> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line.rfind("policy_id", 0) == 0) continue;
    std::stringstream ss(line);
    std::string field;
    std::vector<std::string> fields;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (fields.size() != 8) throw UsageError("oracle csv: expected 8 columns: " + line);
    OracleRecord r;
    r.policy_id = fields[0];
    r.noise_scale = std::stod(fields[1]);
    r.gamma = std::stod(fields[2]);
    r.mean = std::stod(fields[3]);
    r.std_error = std::stod(fields[4]);
    r.episodes = std::stoll(fields[5]);
    r.seed = std::stoull(fields[6]);
    r.start_action = std::stod(fields[7]);
    rows.push_back(r);
  }
  return rows;
}

std::optional<OracleRecord> OracleCache::find(const std::string& policy_id, double noise_scale,
                                              double gamma, double start_action,
                                              std::int64_t episodes, std::uint64_t seed) const {
  std::ifstream in(path_);
  if (!in) return std::nullopt;
  for (const OracleRecord& r : read_oracle_csv(in)) {
    if (r.policy_id == policy_id && r.noise_scale == noise_scale && r.gamma == gamma &&
        r.start_action == start_action && r.episodes == episodes && r.seed == seed) {
      return r;
    }
  }
  return std::nullopt;
}

OracleRecord OracleCache::get(const ToyEnvConfig& config, const std::string& policy_id,
                              double start_action, double gamma, std::int64_t episodes,
                              std::uint64_t seed) {
  if (auto hit = find(policy_id, config.noise_scale, gamma, start_action, episodes, seed)) {
    return *hit;
  }
  const OracleEstimate est = ground_truth_value(config, policy_by_id(policy_id), 0.0, start_action,
                                                episodes, gamma, seed);
  OracleRecord record{policy_id, config.noise_scale, gamma, start_action,
                      est.mean,  est.std_error,      est.episodes, seed};
  const bool fresh = !std::filesystem::exists(path_);
  if (path_.has_parent_path()) std::filesystem::create_directories(path_.parent_path());
  std::ofstream out(path_, std::ios::app);
  if (!out) throw std::runtime_error("oracle cache: cannot write " + path_.string());
  if (fresh) out << kOracleCsvHeader << '\n';
  write_oracle_row(out, record);
  return record;
}

}  // namespace rave::env

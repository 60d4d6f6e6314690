#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "rave/env/toy_env.hpp"

namespace rave::env {

// Maps a position to an action in [-1, 1].
using ScalarPolicy = std::function<double(double)>;

ScalarPolicy always_right();
ScalarPolicy always_left();

struct OracleEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  std::int64_t episodes = 0;
};

// Monte-Carlo estimate of Q(start_position, start_action) under `policy`:
// the mean discounted return of `episodes` rollouts that take start_action
// first and follow the policy afterwards. Step-capped episodes contribute
// the rewards collected up to the cap.
OracleEstimate ground_truth_value(const ToyEnvConfig& config, const ScalarPolicy& policy,
                                  double start_position, double start_action,
                                  std::int64_t episodes, double gamma, std::uint64_t seed);

struct OracleRecord {
  std::string policy_id;
  double noise_scale = 0.0;
  double gamma = 0.0;
  double start_action = 1.0;
  double mean = 0.0;
  double std_error = 0.0;
  std::int64_t episodes = 0;
  std::uint64_t seed = 0;
};

inline constexpr const char* kOracleCsvHeader =
    "policy_id,k,gamma,mean,stderr,n_episodes,seed,start_action";

void write_oracle_row(std::ostream& out, const OracleRecord& record);
std::vector<OracleRecord> read_oracle_csv(std::istream& in);

ScalarPolicy policy_by_id(const std::string& policy_id);

// CSV-backed cache keyed on (policy, k, gamma, start action, episodes, seed).
// Missing entries are computed on demand and appended to the file.
class OracleCache {
 public:
  explicit OracleCache(std::filesystem::path path) : path_(std::move(path)) {}

  OracleRecord get(const ToyEnvConfig& config, const std::string& policy_id, double start_action,
                   double gamma, std::int64_t episodes, std::uint64_t seed);

  std::optional<OracleRecord> find(const std::string& policy_id, double noise_scale, double gamma,
                                   double start_action, std::int64_t episodes,
                                   std::uint64_t seed) const;

 private:
  std::filesystem::path path_;
};

}  // namespace rave::env

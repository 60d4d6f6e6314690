#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iosfwd>
#include <string>
#include <vector>

namespace rave::harness {

// One evaluation-period summary. Averages cover the learner updates since
// the previous row.
struct MetricsRow {
  std::int64_t env_steps = 0;
  double train_return = 0.0;
  double eval_return = 0.0;
  double q_right = 0.0;  // Q(s0, +1), in environment reward units
  double q_left = 0.0;   // Q(s0, -1)
  double oracle_right = 0.0;
  double oracle_left = 0.0;
  double bias_right = 0.0;
  double bias_left = 0.0;
  double mean_alpha = 0.0;
  double mean_clb_subtraction = 0.0;
  std::vector<double> mean_weights;  // per horizon
  double critic_loss = 0.0;
  double actor_loss = 0.0;
  std::vector<double> dynamics_losses;  // per member
};

std::string metrics_header(int max_horizon, int ensemble_size);

// Floats are printed with 6 significant digits.
std::string format_metrics_row(const MetricsRow& row);

MetricsRow parse_metrics_row(const std::string& line, int max_horizon, int ensemble_size);

std::vector<MetricsRow> read_metrics_csv(const std::filesystem::path& path);

// Append-only CSV sink; flushes after every row.
class MetricsWriter {
 public:
  MetricsWriter(const std::filesystem::path& path, int max_horizon, int ensemble_size, bool append);
  void write(const MetricsRow& row);

 private:
  std::ofstream out_;
};

// signed: positive means overestimation
inline double evaluate_bias(double estimate, double oracle) { return estimate - oracle; }

}  // namespace rave::harness

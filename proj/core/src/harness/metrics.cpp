#include "rave/harness/metrics.hpp"

#include <cstdio>
#include <sstream>

#include "rave/errors.hpp"

namespace rave::harness {

namespace {

std::string g6(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

}  // namespace

std::string metrics_header(int max_horizon, int ensemble_size) {
  std::string h =
      "env_steps,train_return,eval_return,q_s0_right,q_s0_left,oracle_right,oracle_left,"
      "bias_right,bias_left,alpha_eff,clb_subtraction";
  for (int i = 0; i <= max_horizon; ++i) h += ",w_h" + std::to_string(i);
  h += ",critic_loss,actor_loss";
  for (int i = 0; i < ensemble_size; ++i) h += ",dyn_loss_" + std::to_string(i);
  return h;
}

std::string format_metrics_row(const MetricsRow& r) {
  std::string s = std::to_string(r.env_steps);
  for (double v : {r.train_return, r.eval_return, r.q_right, r.q_left, r.oracle_right,
                   r.oracle_left, r.bias_right, r.bias_left, r.mean_alpha, r.mean_clb_subtraction}) {
    s += ',' + g6(v);
  }
  for (double w : r.mean_weights) s += ',' + g6(w);
  s += ',' + g6(r.critic_loss) + ',' + g6(r.actor_loss);
  for (double l : r.dynamics_losses) s += ',' + g6(l);
  return s;
}

MetricsRow parse_metrics_row(const std::string& line, int max_horizon, int ensemble_size) {
  std::vector<std::string> f;
  std::stringstream ss(line);
  std::string item;
  while (std::getline(ss, item, ',')) f.push_back(item);
  const std::size_t expected = 11 + static_cast<std::size_t>(max_horizon + 1) + 2 +
                               static_cast<std::size_t>(ensemble_size);
  if (f.size() != expected) throw UsageError("metrics: row has " + std::to_string(f.size()) +
                                             " columns, expected " + std::to_string(expected));
  MetricsRow r;
  std::size_t c = 0;
  r.env_steps = std::stoll(f[c++]);
  for (double* v : {&r.train_return, &r.eval_return, &r.q_right, &r.q_left, &r.oracle_right,
                    &r.oracle_left, &r.bias_right, &r.bias_left, &r.mean_alpha,
                    &r.mean_clb_subtraction}) {
    *v = std::stod(f[c++]);
  }
  for (int h = 0; h <= max_horizon; ++h) r.mean_weights.push_back(std::stod(f[c++]));
  r.critic_loss = std::stod(f[c++]);
  r.actor_loss = std::stod(f[c++]);
  for (int i = 0; i < ensemble_size; ++i) r.dynamics_losses.push_back(std::stod(f[c++]));
  return r;
}

std::vector<MetricsRow> read_metrics_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("metrics: cannot open " + path.string());
  std::string header;
  if (!std::getline(in, header)) return {};
  int horizons = 0;
  int members = 0;
  std::stringstream hs(header);
  std::string col;
  while (std::getline(hs, col, ',')) {
    if (col.rfind("w_h", 0) == 0) ++horizons;
    if (col.rfind("dyn_loss_", 0) == 0) ++members;
  }
  std::vector<MetricsRow> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty()) rows.push_back(parse_metrics_row(line, horizons - 1, members));
  }
  return rows;
}

MetricsWriter::MetricsWriter(const std::filesystem::path& path, int max_horizon, int ensemble_size,
                             bool append) {
  out_.open(path, append ? std::ios::app : std::ios::trunc);
  if (!out_) throw std::runtime_error("metrics: cannot open " + path.string() + " for writing");
  if (!append) {
    out_ << metrics_header(max_horizon, ensemble_size) << '\n';
    out_.flush();
  }
  if (!out_) throw std::runtime_error("metrics: write failed for " + path.string());
}

void MetricsWriter::write(const MetricsRow& row) {
  out_ << format_metrics_row(row) << '\n';
  out_.flush();
  if (!out_) throw std::runtime_error("metrics: write failed");
}

}  // namespace rave::harness

#pragma once

#include <cstdint>
#include <iosfwd>

#include "rave/linalg.hpp"
#include "rave/nn/mlp.hpp"

namespace rave::nn {

struct AdamConfig {
  double learning_rate = 3e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

class Adam {
 public:
  Adam() = default;
  Adam(Eigen::Index parameter_count, AdamConfig config);

  void step(Vector& parameters, const Vector& gradient);

  std::int64_t steps() const { return steps_; }
  void set_learning_rate(double lr) { config_.learning_rate = lr; }
  const AdamConfig& config() const { return config_; }
  const Vector& first_moment() const { return m_; }
  const Vector& second_moment() const { return v_; }

  void save(std::ostream& out) const;
  static Adam load(std::istream& in);

 private:
  AdamConfig config_;
  std::int64_t steps_ = 0;
  Vector m_;
  Vector v_;
};

// Backward through a recorded pass and one Adam step on the network. Throws
// UsageError if the pass was never recorded. Returns the gradients so
// callers can chain into an upstream network.
Gradients backward_and_step(Mlp& net, const ForwardPass& pass, const Matrix& output_gradient,
                            Adam& optimizer);

}  // namespace rave::nn

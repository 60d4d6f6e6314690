#include "rave/nn/adam.hpp"

#include <cmath>
#include <istream>
#include <ostream>
#include <string>

#include "rave/errors.hpp"

namespace rave::nn {

Adam::Adam(Eigen::Index parameter_count, AdamConfig config)
    : config_(config), m_(Vector::Zero(parameter_count)), v_(Vector::Zero(parameter_count)) {
  if (config.learning_rate <= 0.0) throw ConfigError("adam: learning rate must be positive");
  if (!(config.beta1 >= 0.0 && config.beta1 < 1.0 && config.beta2 >= 0.0 && config.beta2 < 1.0)) {
    throw ConfigError("adam: betas must lie in [0, 1)");
  }
}

void Adam::step(Vector& parameters, const Vector& gradient) {
  if (parameters.size() != m_.size() || gradient.size() != m_.size()) {
    throw ConfigError("adam: parameter/gradient size does not match optimizer state");
  }
  ++steps_;
  const double b1 = config_.beta1;
  const double b2 = config_.beta2;
  m_ = b1 * m_ + (1.0 - b1) * gradient;
  v_ = b2 * v_ + (1.0 - b2) * gradient.cwiseAbs2();
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(steps_));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(steps_));
  const double step_size = config_.learning_rate / c1;
  parameters.array() -=
      step_size * m_.array() / ((v_.array() / c2).sqrt() + config_.epsilon);
}

void Adam::save(std::ostream& out) const {
  const auto old_precision = out.precision(17);
  out << "rave-adam 1\n";
  out << config_.learning_rate << ' ' << config_.beta1 << ' ' << config_.beta2 << ' '
      << config_.epsilon << '\n';
  out << steps_ << ' ' << m_.size() << '\n';
  for (Eigen::Index i = 0; i < m_.size(); ++i) out << m_[i] << ' ' << v_[i] << '\n';
  out.precision(old_precision);
}

Adam Adam::load(std::istream& in) {
  std::string tag;
  int version = 0;
  in >> tag >> version;
  if (tag != "rave-adam" || version != 1) throw UsageError("adam: not a rave-adam v1 record");
  AdamConfig config;
  in >> config.learning_rate >> config.beta1 >> config.beta2 >> config.epsilon;
  std::int64_t steps = 0;
  Eigen::Index n = 0;
  in >> steps >> n;
  if (!in || n < 0) throw UsageError("adam: malformed header");
  Adam adam(n, config);
  adam.steps_ = steps;
  for (Eigen::Index i = 0; i < n; ++i) in >> adam.m_[i] >> adam.v_[i];
  if (!in) throw UsageError("adam: truncated record");
  return adam;
}

Gradients backward_and_step(Mlp& net, const ForwardPass& pass, const Matrix& output_gradient,
                            Adam& optimizer) {
  Gradients grads = net.backward(pass, output_gradient);
  optimizer.step(net.parameters(), grads.parameters);
  return grads;
}

}  // namespace rave::nn

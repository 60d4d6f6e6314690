#include "rave/nn/mlp.hpp"

#include <cmath>
#include <istream>
#include <ostream>
#include <random>
#include <string>

#include "rave/errors.hpp"

namespace rave::nn {

std::string_view to_string(OutputHead head) {
  switch (head) {
    case OutputHead::Identity: return "identity";
    case OutputHead::Tanh: return "tanh";
    case OutputHead::Gaussian: return "gaussian";
  }
  return "identity";
}

OutputHead output_head_from_string(std::string_view name) {
  if (name == "identity") return OutputHead::Identity;
  if (name == "tanh") return OutputHead::Tanh;
  if (name == "gaussian") return OutputHead::Gaussian;
  throw ConfigError("unknown output head: " + std::string(name));
}

Mlp::Mlp(std::vector<int> widths, OutputHead head, std::uint64_t seed)
    : widths_(std::move(widths)), head_(head) {
  if (widths_.size() < 2) throw ConfigError("mlp: need at least input and output widths");
  for (int w : widths_) {
    if (w <= 0) throw ConfigError("mlp: layer widths must be positive");
  }

  Eigen::Index offset = 0;
  for (int l = 0; l < layer_count(); ++l) {
    const int in = widths_[static_cast<std::size_t>(l)];
    int out = widths_[static_cast<std::size_t>(l) + 1];
    if (l == layer_count() - 1 && head_ == OutputHead::Gaussian) out *= 2;
    layers_.push_back({offset, offset + Eigen::Index{in} * out, in, out});
    offset += Eigen::Index{in} * out + out;
  }
  params_ = Vector::Zero(offset);

  // Uniform fan-in initialisation.
  std::mt19937_64 engine(seed);
  for (const LayerOffsets& layer : layers_) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(layer.in));
    std::uniform_real_distribution<double> dist(-bound, bound);
    const Eigen::Index end = layer.bias + layer.out;
    for (Eigen::Index p = layer.weights; p < end; ++p) params_[p] = dist(engine);
  }
}

int Mlp::raw_output_width() const {
  return head_ == OutputHead::Gaussian ? 2 * output_width() : output_width();
}

Eigen::Map<Matrix> Mlp::weights(int layer) {
  const LayerOffsets& l = layers_.at(static_cast<std::size_t>(layer));
  return {params_.data() + l.weights, l.in, l.out};
}

Eigen::Map<const Matrix> Mlp::weights(int layer) const {
  const LayerOffsets& l = layers_.at(static_cast<std::size_t>(layer));
  return {params_.data() + l.weights, l.in, l.out};
}

Eigen::Map<Eigen::RowVectorXd> Mlp::bias(int layer) {
  const LayerOffsets& l = layers_.at(static_cast<std::size_t>(layer));
  return {params_.data() + l.bias, l.out};
}

Eigen::Map<const Eigen::RowVectorXd> Mlp::bias(int layer) const {
  const LayerOffsets& l = layers_.at(static_cast<std::size_t>(layer));
  return {params_.data() + l.bias, l.out};
}

void Mlp::apply_head(const Matrix& raw, Matrix& out) const {
  switch (head_) {
    case OutputHead::Identity:
      out = raw;
      break;
    case OutputHead::Tanh:
      out = raw.array().tanh().matrix();
      break;
    case OutputHead::Gaussian: {
      const int d = output_width();
      out.resize(raw.rows(), raw.cols());
      out.leftCols(d) = raw.leftCols(d);
      out.rightCols(d) = raw.rightCols(d).array().exp().cwiseMax(kMinVariance).cwiseMin(kMaxVariance).matrix();
      break;
    }
  }
}

Matrix Mlp::forward(const Matrix& batch) const {
  if (empty()) throw UsageError("mlp: forward on an empty network");
  if (batch.cols() != input_width()) {
    throw ConfigError("mlp: batch width " + std::to_string(batch.cols()) + " != input width " +
                      std::to_string(input_width()));
  }
  Matrix a = batch;
  Matrix z;
  for (int l = 0; l < layer_count(); ++l) {
    z.noalias() = a * weights(l);
    z.rowwise() += bias(l);
    if (l + 1 < layer_count()) {
      a = z.cwiseMax(0.0);
    }
  }
  Matrix out;
  apply_head(z, out);
  return out;
}

ForwardPass Mlp::record(const Matrix& batch) const {
  if (empty()) throw UsageError("mlp: record on an empty network");
  if (batch.cols() != input_width()) {
    throw ConfigError("mlp: batch width " + std::to_string(batch.cols()) + " != input width " +
                      std::to_string(input_width()));
  }
  ForwardPass pass;
  pass.inputs.reserve(static_cast<std::size_t>(layer_count()));
  pass.inputs.push_back(batch);
  Matrix z;
  for (int l = 0; l < layer_count(); ++l) {
    z.noalias() = pass.inputs.back() * weights(l);
    z.rowwise() += bias(l);
    if (l + 1 < layer_count()) pass.inputs.push_back(z.cwiseMax(0.0));
  }
  pass.raw_output = std::move(z);
  apply_head(pass.raw_output, pass.output);
  return pass;
}

Gradients Mlp::backward(const ForwardPass& pass, const Matrix& output_gradient) const {
  if (!pass.recorded()) throw UsageError("mlp: backward without a recorded forward pass");
  if (output_gradient.rows() != pass.output.rows() || output_gradient.cols() != pass.output.cols()) {
    throw ConfigError("mlp: output gradient shape does not match the recorded pass");
  }

  Matrix dz;
  switch (head_) {
    case OutputHead::Identity:
      dz = output_gradient;
      break;
    case OutputHead::Tanh:
      dz = (output_gradient.array() * (1.0 - pass.output.array().square())).matrix();
      break;
    case OutputHead::Gaussian: {
      const int d = output_width();
      dz.resize(output_gradient.rows(), output_gradient.cols());
      dz.leftCols(d) = output_gradient.leftCols(d);
      for (Eigen::Index r = 0; r < dz.rows(); ++r) {
        for (int c = 0; c < d; ++c) {
          const double raw_var = std::exp(pass.raw_output(r, d + c));
          const bool inside = raw_var >= kMinVariance && raw_var <= kMaxVariance;
          dz(r, d + c) = inside ? output_gradient(r, d + c) * raw_var : 0.0;
        }
      }
      break;
    }
  }

  Gradients grads{Vector::Zero(params_.size()), Matrix()};
  for (int l = layer_count() - 1; l >= 0; --l) {
    const LayerOffsets& lo = layers_[static_cast<std::size_t>(l)];
    const Matrix& a = pass.inputs[static_cast<std::size_t>(l)];
    Eigen::Map<Matrix> dw(grads.parameters.data() + lo.weights, lo.in, lo.out);
    dw.noalias() = a.transpose() * dz;
    Eigen::Map<Eigen::RowVectorXd>(grads.parameters.data() + lo.bias, lo.out) = dz.colwise().sum();
    Matrix da;
    da.noalias() = dz * weights(l).transpose();
    if (l > 0) {
      dz = (a.array() > 0.0).select(da, 0.0);
    } else {
      grads.input = std::move(da);
    }
  }
  return grads;
}

bool Mlp::congruent(const Mlp& other) const {
  return widths_ == other.widths_ && head_ == other.head_;
}

GaussianBatch split_gaussian(const Matrix& head_output) {
  if (head_output.cols() % 2 != 0) throw ConfigError("split_gaussian: odd column count");
  const Eigen::Index d = head_output.cols() / 2;
  return {head_output.leftCols(d), head_output.rightCols(d)};
}

void soft_update(Mlp& target, const Mlp& online, double tau) {
  if (!target.congruent(online)) throw ConfigError("soft_update: networks are not congruent");
  if (!(tau >= 0.0 && tau <= 1.0)) throw ConfigError("soft_update: tau must lie in [0, 1]");
  if (tau == 1.0) {
    target.parameters() = online.parameters();
  } else if (tau > 0.0) {
    target.parameters() = (1.0 - tau) * target.parameters() + tau * online.parameters();
  }
}

void save(std::ostream& out, const Mlp& net) {
  out << "rave-mlp 1\n";
  out << "head " << to_string(net.head()) << '\n';
  out << "widths " << net.widths().size();
  for (int w : net.widths()) out << ' ' << w;
  out << '\n';
  out << "params " << net.parameters().size() << '\n';
  const auto old_precision = out.precision(17);
  for (Eigen::Index i = 0; i < net.parameters().size(); ++i) out << net.parameters()[i] << '\n';
  out.precision(old_precision);
}

Mlp load_mlp(std::istream& in) {
  std::string tag;
  int version = 0;
  in >> tag >> version;
  if (tag != "rave-mlp" || version != 1) throw UsageError("load_mlp: not a rave-mlp v1 record");
  std::string key;
  std::string head_name;
  in >> key >> head_name;
  if (key != "head") throw UsageError("load_mlp: expected head");
  std::size_t count = 0;
  in >> key >> count;
  if (key != "widths" || count < 2) throw UsageError("load_mlp: expected widths");
  std::vector<int> widths(count);
  for (int& w : widths) in >> w;
  Mlp net(widths, output_head_from_string(head_name), 0);
  Eigen::Index n = 0;
  in >> key >> n;
  if (key != "params" || n != net.parameters().size()) {
    throw UsageError("load_mlp: parameter count does not match widths");
  }
  for (Eigen::Index i = 0; i < n; ++i) in >> net.parameters()[i];
  if (!in) throw UsageError("load_mlp: truncated record");
  return net;
}

}  // namespace rave::nn

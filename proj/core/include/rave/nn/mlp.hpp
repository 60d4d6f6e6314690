#pragma once

#include <cstdint>
#include <iosfwd>
#include <string_view>
#include <vector>

#include "rave/linalg.hpp"

namespace rave::nn {

// Output transform applied after the last linear layer. Hidden layers are
// always rectified-linear.
//
// Gaussian heads emit 2*out raw columns: a mean block followed by a
// log-variance block. forward() returns [mean | variance] where
// variance = clamp(exp(log_variance), kMinVariance, kMaxVariance).
enum class OutputHead { Identity, Tanh, Gaussian };

inline constexpr double kMinVariance = 1e-6;
inline constexpr double kMaxVariance = 1e6;

std::string_view to_string(OutputHead head);
OutputHead output_head_from_string(std::string_view name);

// Intermediates of one forward pass, consumed by Mlp::backward.
struct ForwardPass {
  std::vector<Matrix> inputs;  // input to each linear layer (post-ReLU)
  Matrix raw_output;           // last linear layer, before the head transform
  Matrix output;               // what forward() would return

  bool recorded() const { return !inputs.empty(); }
};

struct Gradients {
  Vector parameters;  // same layout as Mlp::parameters()
  Matrix input;       // dLoss/dInput, B x input_width
};

// Fully-connected network over row-major batches.
//
// All weights and biases live in one flat parameter vector, layer by layer:
// W_l (in x out, row-major) followed by b_l (out). Layer l computes
// z = a W_l + b_l.
class Mlp {
 public:
  Mlp() = default;

  // widths = {input, hidden..., output}; output is the logical width (the
  // Gaussian head doubles the last linear layer internally).
  Mlp(std::vector<int> widths, OutputHead head, std::uint64_t seed);

  int input_width() const { return widths_.front(); }
  int output_width() const { return widths_.back(); }
  int raw_output_width() const;
  int layer_count() const { return static_cast<int>(widths_.size()) - 1; }
  const std::vector<int>& widths() const { return widths_; }
  OutputHead head() const { return head_; }
  bool empty() const { return widths_.empty(); }

  Vector& parameters() { return params_; }
  const Vector& parameters() const { return params_; }

  Eigen::Map<Matrix> weights(int layer);
  Eigen::Map<const Matrix> weights(int layer) const;
  Eigen::Map<Eigen::RowVectorXd> bias(int layer);
  Eigen::Map<const Eigen::RowVectorXd> bias(int layer) const;

  // Pure; B x in -> B x out (B x 2out for Gaussian heads).
  Matrix forward(const Matrix& batch) const;

  ForwardPass record(const Matrix& batch) const;

  // Backpropagates dLoss/dOutput (same shape as ForwardPass::output). For
  // Gaussian heads the variance block is differentiated through the clamp,
  // which has zero slope outside [kMinVariance, kMaxVariance].
  Gradients backward(const ForwardPass& pass, const Matrix& output_gradient) const;

  bool congruent(const Mlp& other) const;

 private:
  struct LayerOffsets {
    Eigen::Index weights;
    Eigen::Index bias;
    int in;
    int out;
  };

  void apply_head(const Matrix& raw, Matrix& out) const;

  std::vector<int> widths_;
  OutputHead head_ = OutputHead::Identity;
  std::vector<LayerOffsets> layers_;
  Vector params_;
};

// Splits a Gaussian-head output into its mean and variance blocks.
struct GaussianBatch {
  Matrix mean;
  Matrix variance;
};
GaussianBatch split_gaussian(const Matrix& head_output);

// target <- (1 - tau) * target + tau * online, elementwise.
void soft_update(Mlp& target, const Mlp& online, double tau);

// Text checkpoint, see docs/checkpoint_format.md.
void save(std::ostream& out, const Mlp& net);
Mlp load_mlp(std::istream& in);

}  // namespace rave::nn

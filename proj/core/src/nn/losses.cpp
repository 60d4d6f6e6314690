#include "rave/nn/losses.hpp"

#include <cmath>
#include <numbers>

#include "rave/errors.hpp"

namespace rave::nn {

double gaussian_nll(double mean, double variance, double observed) {
  if (!(variance > 0.0)) throw DomainError("gaussian_nll: variance must be positive");
  const double diff = observed - mean;
  return 0.5 * std::log(2.0 * std::numbers::pi * variance) + diff * diff / (2.0 * variance);
}

NllGradient gaussian_nll_gradient(double mean, double variance, double observed) {
  if (!(variance > 0.0)) throw DomainError("gaussian_nll: variance must be positive");
  const double diff = observed - mean;
  return {-diff / variance, 0.5 / variance - diff * diff / (2.0 * variance * variance)};
}

double gaussian_nll(const Matrix& head_output, const Matrix& observed, Matrix* gradient) {
  const Eigen::Index d = observed.cols();
  if (head_output.rows() != observed.rows() || head_output.cols() != 2 * d) {
    throw ConfigError("gaussian_nll: head output must be B x 2d for targets B x d");
  }
  const double count = static_cast<double>(observed.size());
  if (count == 0) throw UsageError("gaussian_nll: empty batch");
  if (gradient) gradient->resize(head_output.rows(), head_output.cols());
  double total = 0.0;
  for (Eigen::Index r = 0; r < observed.rows(); ++r) {
    for (Eigen::Index c = 0; c < d; ++c) {
      const double mean = head_output(r, c);
      const double var = head_output(r, d + c);
      total += gaussian_nll(mean, var, observed(r, c));
      if (gradient) {
        const NllGradient g = gaussian_nll_gradient(mean, var, observed(r, c));
        (*gradient)(r, c) = g.mean / count;
        (*gradient)(r, d + c) = g.variance / count;
      }
    }
  }
  return total / count;
}

double mean_squared_error(const Matrix& prediction, const Matrix& target, Matrix* gradient) {
  if (prediction.rows() != target.rows() || prediction.cols() != target.cols()) {
    throw ConfigError("mean_squared_error: shape mismatch");
  }
  const double count = static_cast<double>(target.size());
  if (count == 0) throw UsageError("mean_squared_error: empty batch");
  const Matrix diff = prediction - target;
  if (gradient) *gradient = (2.0 / count) * diff;
  return diff.squaredNorm() / count;
}

}  // namespace rave::nn

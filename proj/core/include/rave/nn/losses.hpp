#pragma once

#include "rave/linalg.hpp"

namespace rave::nn {

// -log N(observed | mean, variance). Throws DomainError for variance <= 0.
double gaussian_nll(double mean, double variance, double observed);

struct NllGradient {
  double mean;
  double variance;
};
NllGradient gaussian_nll_gradient(double mean, double variance, double observed);

// Mean NLL over every element of a [mean | variance] head output. When
// gradient is non-null it receives dLoss/dOutput in the same layout.
double gaussian_nll(const Matrix& head_output, const Matrix& observed, Matrix* gradient = nullptr);

// Mean squared error over every element.
double mean_squared_error(const Matrix& prediction, const Matrix& target,
                          Matrix* gradient = nullptr);

}  // namespace rave::nn

#pragma once

#include <Eigen/Core>

namespace rave {

// Batches are row-major: one sample per row.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

}  // namespace rave

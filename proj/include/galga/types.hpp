#pragma once

#include <Eigen/Core>

namespace galga {

/// Row-major so that a point (or a spectrum) is one contiguous row.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

}  // namespace galga

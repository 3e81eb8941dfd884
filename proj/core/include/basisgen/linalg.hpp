#pragma once

#include <Eigen/Dense>

namespace basisgen {

/// Column-major dense matrix used for all linear algebra.
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Row-major matrix; rows are samples (flattened images or coefficient vectors).
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

}  // namespace basisgen

#pragma once

#include <Eigen/Core>

namespace posegen {

// Row-major matrices throughout: file formats are row-major and the nn code
// treats rows as tokens.
using MatF = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatD = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using VecF = Eigen::VectorXf;
using VecD = Eigen::VectorXd;

} // namespace posegen

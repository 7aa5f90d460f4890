#pragma once

#include <Eigen/Dense>

namespace aprox {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Index = Eigen::Index;

// Iterates beyond this norm are treated as diverged.
inline constexpr double kDivergenceNorm = 1e100;

}  // namespace aprox

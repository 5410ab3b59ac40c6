#pragma once

#include <Eigen/Dense>

namespace mgsta {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

} // namespace mgsta

#pragma once

#include <Eigen/Dense>

namespace lgp {

using Index = Eigen::Index;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

}  // namespace lgp

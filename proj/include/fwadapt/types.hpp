#pragma once

#include <Eigen/Dense>

namespace fwadapt {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

}  // namespace fwadapt

#pragma once

#include <complex>
#include <Eigen/Dense>

namespace em {

using Real    = double;
using Complex = std::complex<double>;
using Index   = Eigen::Index;

// Dense column-major storage throughout (Eigen default).
using Mat     = Eigen::MatrixXcd;
using Vec     = Eigen::VectorXcd;
using RealVec = Eigen::VectorXd;

} // namespace em

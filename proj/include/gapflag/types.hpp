#pragma once

#include <complex>

#include <Eigen/Dense>

namespace gapflag {

using Complex = std::complex<double>;
using RealVector = Eigen::VectorXd;
using RealMatrix = Eigen::MatrixXd;
using ComplexVector = Eigen::VectorXcd;
using ComplexMatrix = Eigen::MatrixXcd;

/// Tolerance for validating invariants of user-supplied values.
inline constexpr double kValidationTol = 1e-12;

/// Largest dimension accepted by exact (rational) volume routines.
inline constexpr int kMaxExactDim = 20;

}  // namespace gapflag

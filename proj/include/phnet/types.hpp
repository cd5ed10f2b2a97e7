// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace phnet {

using Scalar = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealMatrix = Eigen::MatrixXd;
using RealVector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Relative tolerance used by every PSD and invertibility test.
inline constexpr double kRelTol = 1e-10;

/// Input whose shapes or indices are inconsistent. Distinct from a failed
/// invariant, which is reported through a ValidationReport or certificate.
class StructuralError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Upstream numerical fault (e.g. a Gram matrix that is not positive definite).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace phnet

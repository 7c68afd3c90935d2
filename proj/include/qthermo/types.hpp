#pragma once

#include <Eigen/Dense>

#include <complex>
#include <stdexcept>
#include <string>

namespace qthermo {

using Real = double;
using Complex = std::complex<double>;
using Index = Eigen::Index;

using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealMatrix = Eigen::MatrixXd;
using RealVector = Eigen::VectorXd;

template <typename RealScalar>
using ComplexMatrixT = Eigen::Matrix<std::complex<RealScalar>, Eigen::Dynamic, Eigen::Dynamic>;

template <typename RealScalar>
using ComplexVectorT = Eigen::Matrix<std::complex<RealScalar>, Eigen::Dynamic, 1>;

/// Input that violates a documented precondition or invariant.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A computation left its numerically valid regime (positivity loss, level crossing, ...).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr double kPi = 3.14159265358979323846;

template <typename Derived>
Matrix commutator(const Eigen::MatrixBase<Derived>& a, const Matrix& b) {
  return a * b - b * a;
}

/// Largest elementwise deviation from Hermiticity, max |m - m^dagger|.
inline double hermiticity_defect(const Matrix& m) {
  return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

inline Matrix hermitian_part(const Matrix& m) { return 0.5 * (m + m.adjoint()); }

inline double max_abs(const Matrix& m) { return m.cwiseAbs().maxCoeff(); }

}  // namespace qthermo

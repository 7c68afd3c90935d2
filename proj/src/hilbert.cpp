#include "qthermo/hilbert.hpp"

#include <cmath>
#include <string>

namespace qthermo {

SpinBasis::SpinBasis(Index dimension) : dimension_(dimension) {
  if (dimension < 2) {
    throw InvalidArgument("basis dimension must be >= 2, got " + std::to_string(dimension));
  }
}

Index SpinBasis::fock_of_m(double m) const {
  const double n = m + spin();
  const auto index = static_cast<Index>(std::llround(n));
  if (std::abs(n - static_cast<double>(index)) > 1e-9 || index < 0 || index >= dimension_) {
    throw InvalidArgument("m = " + std::to_string(m) + " is not a level of this basis");
  }
  return index;
}

double localisation_spin_coupling(const PhysicalParams& params, const SpinBasis& basis) {
  return params.localisation * params.hbar / (params.mass * params.omega * basis.spin());
}

double thermal_spin_coupling(const PhysicalParams& params, const SpinBasis& basis) {
  return params.thermal_coupling / (2.0 * basis.spin());
}

OperatorSet build_operator_set(const SpinBasis& basis, const PhysicalParams& params) {
  params.validate();
  OperatorSet ops;
  ops.basis = basis;

  const auto ladder = build_ladder(basis);
  ops.a = ladder.lower;
  ops.a_dag = ladder.raise;
  ops.x_scale = std::sqrt(params.hbar / (2.0 * params.mass * params.omega));
  ops.p_scale = std::sqrt(params.hbar * params.mass * params.omega / 2.0);
  ops.x = ops.x_scale * (ops.a_dag + ops.a);
  ops.p = Complex(0, ops.p_scale) * (ops.a_dag - ops.a);

  const auto am = build_angular_momentum(basis);
  ops.jx = am.jx;
  ops.jy = am.jy;
  ops.jz = am.jz;
  ops.j2 = am.j2;

  const auto hp = hp_correspondence(basis);
  const double root_two_j = std::sqrt(2.0 * basis.spin());
  ops.a_hp = hp.jminus / root_two_j;
  ops.a_hp_dag = ops.a_hp.adjoint();
  ops.x_hp = ops.x_scale * (ops.a_hp + ops.a_hp_dag);

  Eigen::SelfAdjointEigenSolver<Matrix> solver(ops.x);
  ops.x_eigenvalues = solver.eigenvalues();
  ops.x_eigenvectors = solver.eigenvectors();
  return ops;
}

Matrix parity_operator(const SpinBasis& basis) {
  const Index n = basis.dimension();
  Matrix out = Matrix::Zero(n, n);
  for (Index k = 0; k < n; ++k) {
    out(k, k) = (k % 2 == 0) ? 1.0 : -1.0;
  }
  return out;
}

}  // namespace qthermo

#pragma once

// Truncated operator algebra on an N = 2j+1 dimensional space.
//
// The working basis is the Fock basis |n>, n = 0..N-1. Through the
// Holstein-Primakoff correspondence |n> is the spin state |j, m> with
// m = n - j, so the bosonic vacuum is the south pole |j, -j> and Jz = a†a - j.
// Spin coherent states are rotations of the north pole |j, j> (index N-1).

#include "qthermo/params.hpp"
#include "qthermo/types.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>

namespace qthermo {

class SpinBasis {
 public:
  /// Throws InvalidArgument for N < 2.
  explicit SpinBasis(Index dimension);

  Index dimension() const { return dimension_; }
  double spin() const { return 0.5 * static_cast<double>(dimension_ - 1); }

  /// Fock index <-> Jz eigenvalue, m = n - j.
  double m_of_fock(Index n) const { return static_cast<double>(n) - spin(); }
  Index fock_of_m(double m) const;

  /// Index of |j, j> in the working basis.
  Index north_pole() const { return dimension_ - 1; }

  bool operator==(const SpinBasis&) const = default;

 private:
  Index dimension_;
};

template <typename RealScalar = double>
struct Ladder {
  ComplexMatrixT<RealScalar> lower;  ///< a, with a(n-1, n) = sqrt(n)
  ComplexMatrixT<RealScalar> raise;  ///< a†
};

template <typename RealScalar = double>
Ladder<RealScalar> build_ladder(const SpinBasis& basis) {
  const Index n = basis.dimension();
  Ladder<RealScalar> out;
  out.lower = ComplexMatrixT<RealScalar>::Zero(n, n);
  for (Index k = 1; k < n; ++k) {
    out.lower(k - 1, k) = std::sqrt(static_cast<RealScalar>(k));
  }
  out.raise = out.lower.adjoint();
  return out;
}

template <typename RealScalar = double>
struct AngularMomentum {
  ComplexMatrixT<RealScalar> jx, jy, jz, j2;
  ComplexMatrixT<RealScalar> jplus, jminus;
};

/// Spin-j matrices in the Jz eigenbasis ordered m = -j, ..., +j.
template <typename RealScalar = double>
AngularMomentum<RealScalar> build_angular_momentum(const SpinBasis& basis) {
  using C = std::complex<RealScalar>;
  const Index n = basis.dimension();
  const RealScalar j = static_cast<RealScalar>(n - 1) / 2;
  AngularMomentum<RealScalar> out;
  out.jz = ComplexMatrixT<RealScalar>::Zero(n, n);
  out.jplus = ComplexMatrixT<RealScalar>::Zero(n, n);
  for (Index k = 0; k < n; ++k) {
    const RealScalar m = static_cast<RealScalar>(k) - j;
    out.jz(k, k) = m;
    if (k + 1 < n) {
      // (j - m)(j + m + 1) is exact in integers/half-integers; avoids j(j+1) - m(m+1) cancellation.
      out.jplus(k + 1, k) = std::sqrt((j - m) * (j + m + 1));
    }
  }
  out.jminus = out.jplus.adjoint();
  out.jx = (out.jplus + out.jminus) * C(RealScalar(0.5), 0);
  out.jy = (out.jplus - out.jminus) * C(0, RealScalar(-0.5));
  out.j2 = out.jx * out.jx + out.jy * out.jy + out.jz * out.jz;
  return out;
}

template <typename RealScalar = double>
struct HpRealization {
  ComplexMatrixT<RealScalar> jminus;  ///< sqrt(2j - a†a) a
  ComplexMatrixT<RealScalar> jplus;   ///< a† sqrt(2j - a†a)
  ComplexMatrixT<RealScalar> jz;      ///< a†a - j
};

/// Exact Holstein-Primakoff matrices built from the bosonic ladder.
template <typename RealScalar = double>
HpRealization<RealScalar> hp_correspondence(const SpinBasis& basis) {
  const Index n = basis.dimension();
  const RealScalar two_j = static_cast<RealScalar>(n - 1);
  const auto ladder = build_ladder<RealScalar>(basis);
  const ComplexMatrixT<RealScalar> number = ladder.raise * ladder.lower;
  ComplexMatrixT<RealScalar> root = ComplexMatrixT<RealScalar>::Zero(n, n);
  for (Index k = 0; k < n; ++k) {
    root(k, k) = std::sqrt(std::max(RealScalar(0), two_j - number(k, k).real()));
  }
  HpRealization<RealScalar> out;
  out.jminus = root * ladder.lower;
  out.jplus = out.jminus.adjoint();
  out.jz = number - ComplexMatrixT<RealScalar>::Identity(n, n) * (two_j / 2);
  return out;
}

/// Builds |Omega> = exp(-i phi Jz) exp(-i theta Jy) |j, j> from one cached
/// eigendecomposition of Jy.
template <typename RealScalar = double>
class CoherentStateGenerator {
 public:
  using ComplexVec = ComplexVectorT<RealScalar>;

  explicit CoherentStateGenerator(const SpinBasis& basis) : basis_(basis) {
    const auto am = build_angular_momentum<RealScalar>(basis);
    Eigen::SelfAdjointEigenSolver<ComplexMatrixT<RealScalar>> solver(am.jy);
    jy_values_ = solver.eigenvalues();
    jy_vectors_ = solver.eigenvectors();
    north_in_jy_ = jy_vectors_.row(basis.north_pole()).adjoint();
    m_values_.resize(basis.dimension());
    for (Index k = 0; k < basis.dimension(); ++k) {
      m_values_(k) = static_cast<RealScalar>(basis.m_of_fock(k));
    }
  }

  ComplexVec state(RealScalar theta, RealScalar phi) const {
    return apply_phase(phi, rotate(theta, false));
  }

  /// d|Omega>/dtheta = exp(-i phi Jz) (-i Jy) exp(-i theta Jy) |j, j>.
  ComplexVec theta_derivative(RealScalar theta, RealScalar phi) const {
    return apply_phase(phi, rotate(theta, true));
  }

  const SpinBasis& basis() const { return basis_; }

 private:
  ComplexVec rotate(RealScalar theta, bool differentiate) const {
    using C = std::complex<RealScalar>;
    ComplexVec coeff(north_in_jy_.size());
    for (Index k = 0; k < coeff.size(); ++k) {
      C factor = std::exp(C(0, -theta * jy_values_(k)));
      if (differentiate) {
        factor *= C(0, -jy_values_(k));
      }
      coeff(k) = factor * north_in_jy_(k);
    }
    return jy_vectors_ * coeff;
  }

  ComplexVec apply_phase(RealScalar phi, ComplexVec v) const {
    using C = std::complex<RealScalar>;
    for (Index k = 0; k < v.size(); ++k) {
      v(k) *= std::exp(C(0, -phi * m_values_(k)));
    }
    return v;
  }

  SpinBasis basis_;
  Eigen::Matrix<RealScalar, Eigen::Dynamic, 1> jy_values_;
  ComplexMatrixT<RealScalar> jy_vectors_;
  ComplexVec north_in_jy_;
  Eigen::Matrix<RealScalar, Eigen::Dynamic, 1> m_values_;
};

/// Spin coherent state pointing along (theta, phi). Throws InvalidArgument
/// unless theta in [0, pi] and phi in [0, 2 pi).
template <typename RealScalar = double>
ComplexVectorT<RealScalar> spin_coherent_state(const SpinBasis& basis, RealScalar theta,
                                               RealScalar phi) {
  const RealScalar pi = static_cast<RealScalar>(kPi);
  if (!(theta >= 0 && theta <= pi)) {
    throw InvalidArgument("spin_coherent_state: theta must lie in [0, pi]");
  }
  if (!(phi >= 0 && phi < 2 * pi)) {
    throw InvalidArgument("spin_coherent_state: phi must lie in [0, 2pi)");
  }
  return CoherentStateGenerator<RealScalar>(basis).state(theta, phi);
}

/// Every operator the simulation needs on one truncated space. Immutable
/// after construction.
struct OperatorSet {
  SpinBasis basis{2};

  // Bosonic truncation: x = sqrt(hbar/2 m omega)(a† + a), p = i sqrt(hbar m omega/2)(a† - a).
  Matrix a, a_dag, x, p;
  Matrix jx, jy, jz, j2;

  // Holstein-Primakoff images used by the dissipators:
  // a_hp = J-/sqrt(2j) = sqrt(1 - a†a/2j) a, x_hp = sqrt(hbar/2 m omega)(a_hp + a_hp†).
  Matrix a_hp, a_hp_dag, x_hp;

  // Spectral decomposition of x, x = V diag(lambda) V†.
  RealVector x_eigenvalues;
  Matrix x_eigenvectors;

  double x_scale = 0;  ///< sqrt(hbar / 2 m omega)
  double p_scale = 0;  ///< sqrt(hbar m omega / 2)

  /// Applies a scalar function to the spectrum of x.
  template <typename F>
  Matrix position_function(F&& f) const {
    RealVector values(x_eigenvalues.size());
    for (Index k = 0; k < values.size(); ++k) {
      values(k) = f(x_eigenvalues(k));
    }
    return x_eigenvectors * values.cast<Complex>().asDiagonal() * x_eigenvectors.adjoint();
  }
};

/// Coupling of -[Jx,[Jx,rho]] equal to -Lambda [x_hp,[x_hp,rho]], i.e. Lambda hbar / (m omega j).
double localisation_spin_coupling(const PhysicalParams& params, const SpinBasis& basis);

/// Coupling of L_{J-} equal to gamma L_{a_hp}, i.e. gamma / 2j.
double thermal_spin_coupling(const PhysicalParams& params, const SpinBasis& basis);

OperatorSet build_operator_set(const SpinBasis& basis, const PhysicalParams& params);

/// Parity (-1)^n, mapping x -> -x and p -> -p.
Matrix parity_operator(const SpinBasis& basis);

}  // namespace qthermo

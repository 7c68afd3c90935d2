#pragma once

// Independent reference values for the tests: closed forms and brute-force
// constructions that share no code path with the library.

#include "qthermo/types.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <random>

namespace oracle {

using qthermo::Complex;
using qthermo::Index;
using qthermo::Matrix;
using qthermo::RealVector;
using qthermo::Vector;

inline double binomial(int n, int k) {
  return std::exp(std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0));
}

/// <j,m|Omega> = e^{-i phi m} sqrt(C(2j, j-m)) cos^{j+m}(theta/2) sin^{j-m}(theta/2),
/// returned in the working basis (index n = m + j).
inline Vector binomial_coherent_state(Index dimension, double theta, double phi) {
  const int two_j = static_cast<int>(dimension - 1);
  const double j = 0.5 * two_j;
  Vector out(dimension);
  for (Index n = 0; n < dimension; ++n) {
    const double m = static_cast<double>(n) - j;
    const int down = static_cast<int>(std::lround(j - m));
    const int up = two_j - down;
    const double amp = std::sqrt(binomial(two_j, down)) * std::pow(std::cos(0.5 * theta), up) *
                       std::pow(std::sin(0.5 * theta), down);
    out(n) = std::polar(amp, -phi * m);
  }
  return out;
}

/// Truncated Glauber state sum_n alpha^n / sqrt(n!) |n>, renormalised.
inline Vector glauber_state(Index dimension, Complex alpha) {
  Vector out(dimension);
  Complex term = 1.0;
  for (Index n = 0; n < dimension; ++n) {
    if (n > 0) {
      term *= alpha / std::sqrt(static_cast<double>(n));
    }
    out(n) = term;
  }
  return out / out.norm();
}

/// Gibbs state of a diagonal Hamiltonian by direct exponentiation of the diagonal.
inline Matrix diagonal_gibbs(const RealVector& energies, double beta) {
  RealVector w = (-beta * (energies.array() - energies.minCoeff())).exp();
  w /= w.sum();
  return w.cast<Complex>().asDiagonal();
}

inline Vector random_state(Index dimension, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  Vector v(dimension);
  for (Index k = 0; k < dimension; ++k) {
    v(k) = Complex(normal(rng), normal(rng));
  }
  return v / v.norm();
}

/// Full-rank random density matrix G G† / Tr.
inline Matrix random_density(Index dimension, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  Matrix g(dimension, dimension);
  for (Index r = 0; r < dimension; ++r) {
    for (Index c = 0; c < dimension; ++c) {
      g(r, c) = Complex(normal(rng), normal(rng));
    }
  }
  Matrix rho = g * g.adjoint();
  return rho / rho.trace().real();
}

/// Brute-force Hermitian matrix function via eigendecomposition.
template <typename F>
Matrix hermitian_function(const Matrix& m, F f) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(0.5 * (m + m.adjoint()));
  RealVector v = solver.eigenvalues();
  for (Index k = 0; k < v.size(); ++k) {
    v(k) = f(v(k));
  }
  return solver.eigenvectors() * v.cast<Complex>().asDiagonal() * solver.eigenvectors().adjoint();
}

/// exp(-i H t / hbar) for Hermitian H.
inline Matrix propagator(const Matrix& h, double t, double hbar = 1.0) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(h);
  const Vector phases = (solver.eigenvalues().cast<Complex>() * Complex(0, -t / hbar)).array().exp();
  return solver.eigenvectors() * phases.asDiagonal() * solver.eigenvectors().adjoint();
}

inline double relative_entropy(const Matrix& rho, const Matrix& sigma) {
  const Matrix log_rho = hermitian_function(rho, [](double x) { return std::log(x); });
  const Matrix log_sigma = hermitian_function(sigma, [](double x) { return std::log(x); });
  return (rho * (log_rho - log_sigma)).trace().real();
}

}  // namespace oracle

#include "oracles.hpp"
#include "qthermo/hilbert.hpp"
#include "qthermo/phasespace.hpp"

#include <doctest.h>

#include <random>

using namespace qthermo;

TEST_CASE("spin basis rejects dimensions below two") {
  CHECK_THROWS_AS(SpinBasis(1), InvalidArgument);
  CHECK_THROWS_AS(SpinBasis(0), InvalidArgument);
  const SpinBasis b(6);
  CHECK(b.spin() == 2.5);
  CHECK(b.m_of_fock(0) == -2.5);
  CHECK(b.fock_of_m(2.5) == 5);
  CHECK_THROWS_AS(b.fock_of_m(0.0), InvalidArgument);
  CHECK_THROWS_AS(b.fock_of_m(3.5), InvalidArgument);
}

TEST_CASE("ladder operators") {
  const SpinBasis b(7);
  const auto l = build_ladder(b);

  SUBCASE("lowering annihilates the vacuum") {
    Vector vacuum = Vector::Zero(7);
    vacuum(0) = 1.0;
    CHECK((l.lower * vacuum).norm() == 0.0);
  }
  SUBCASE("number operator diagonal") {
    const Matrix n = l.raise * l.lower;
    for (Index k = 0; k < 7; ++k) {
      CHECK(n(k, k).real() == doctest::Approx(static_cast<double>(k)).epsilon(1e-14));
    }
  }
  SUBCASE("truncated commutator corner entry is 1 - N") {
    const Matrix c = l.lower * l.raise - l.raise * l.lower;
    CHECK(c(6, 6).real() == doctest::Approx(1.0 - 7.0).epsilon(1e-14));
    CHECK(c(0, 0).real() == doctest::Approx(1.0));
  }
  SUBCASE("raise is the adjoint of lower") { CHECK(max_abs(l.raise - l.lower.adjoint()) == 0.0); }
}

TEST_CASE("angular momentum algebra") {
  for (Index n : {2, 3, 6, 25}) {
    const SpinBasis b(n);
    const double j = b.spin();
    const auto am = build_angular_momentum(b);
    CHECK(max_abs(commutator(am.jx, am.jy) - Complex(0, 1) * am.jz) < 1e-12);
    CHECK(max_abs(commutator(am.jy, am.jz) - Complex(0, 1) * am.jx) < 1e-12);
    CHECK(max_abs(am.j2 - j * (j + 1) * Matrix::Identity(n, n)) < 1e-10);
    for (Index k = 0; k < n; ++k) {
      CHECK(am.jz(k, k).real() == b.m_of_fock(k));
    }
  }
}

TEST_CASE("operators are Hermitian for every dimension up to 64") {
  const PhysicalParams p;
  for (Index n = 2; n <= 64; ++n) {
    const OperatorSet ops = build_operator_set(SpinBasis(n), p);
    CHECK(hermiticity_defect(ops.x) <= 1e-12);
    CHECK(hermiticity_defect(ops.p) <= 1e-12);
    CHECK(hermiticity_defect(ops.jx) <= 1e-12);
    CHECK(hermiticity_defect(ops.jy) <= 1e-12);
    CHECK(hermiticity_defect(ops.jz) <= 1e-12);
    CHECK(hermiticity_defect(ops.x_hp) <= 1e-12);
  }
}

TEST_CASE("operator builders are deterministic") {
  const PhysicalParams p;
  const OperatorSet a = build_operator_set(SpinBasis(17), p);
  const OperatorSet b = build_operator_set(SpinBasis(17), p);
  CHECK((a.x.array() == b.x.array()).all());
  CHECK((a.jy.array() == b.jy.array()).all());
  CHECK((a.x_eigenvectors.array() == b.x_eigenvectors.array()).all());
}

TEST_CASE("extended precision builders keep the algebra") {
  const SpinBasis b(9);
  const auto am = build_angular_momentum<long double>(b);
  const ComplexMatrixT<long double> c =
      am.jx * am.jy - am.jy * am.jx - std::complex<long double>(0, 1) * am.jz;
  CHECK(static_cast<double>(c.cwiseAbs().maxCoeff()) < 1e-16);
}

TEST_CASE("Holstein-Primakoff realisation") {
  const SpinBasis b(25);
  const auto hp = hp_correspondence(b);
  const auto am = build_angular_momentum(b);
  const auto l = build_ladder(b);
  const double two_j = 2.0 * b.spin();

  CHECK(b.m_of_fock(0) == -b.spin());
  CHECK(max_abs(hp.jz - am.jz) < 1e-12);
  CHECK(max_abs(hp.jminus - am.jminus) < 1e-12);
  CHECK(max_abs(hp.jplus - am.jplus) < 1e-12);

  // Exact relative deviation of J-/sqrt(2j) from a on row n-1: 1 - sqrt(1 - (n-1)/2j).
  const Index rows = (25 + 3) / 4;
  for (Index n = 1; n <= rows; ++n) {
    const double ratio = hp.jminus(n - 1, n).real() / std::sqrt(two_j) / l.lower(n - 1, n).real();
    const double deviation = 1.0 - ratio;
    CHECK(deviation == doctest::Approx(1.0 - std::sqrt(1.0 - (n - 1) / two_j)).epsilon(1e-12));
    CHECK(deviation <= (n - 1) / two_j + 1e-15);
  }
}

TEST_CASE("spin coherent states") {
  const SpinBasis b(25);
  const double j = b.spin();

  SUBCASE("identity rotation gives the north pole") {
    const Vector v = spin_coherent_state(b, 0.0, 0.0);
    Vector north = Vector::Zero(25);
    north(b.north_pole()) = 1.0;
    CHECK((v - north).norm() < 1e-14);
  }
  SUBCASE("overlap with the north pole is cos^{4j}(theta/2)") {
    for (double theta : {0.1, 0.7, 1.3, 2.2, 3.0}) {
      const Vector v = spin_coherent_state(b, theta, 1.1);
      const double overlap = std::norm(v(b.north_pole()));
      CHECK(overlap == doctest::Approx(std::pow(std::cos(0.5 * theta), 4 * j)).epsilon(1e-10));
    }
  }
  SUBCASE("rotation construction agrees with the binomial expansion") {
    for (double theta : {0.3, 1.9, kPi}) {
      for (double phi : {0.0, 2.4, 5.9}) {
        const Vector v = spin_coherent_state(b, theta, phi);
        const Vector w = oracle::binomial_coherent_state(25, theta, phi);
        CHECK((v - w).norm() < 1e-10);
      }
    }
  }
  SUBCASE("normalised for random angles") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> th(0, kPi), ph(0, 2 * kPi);
    for (int k = 0; k < 20; ++k) {
      CHECK(spin_coherent_state(b, th(rng), ph(rng)).norm() == doctest::Approx(1.0).epsilon(1e-13));
    }
  }
  SUBCASE("theta derivative matches a central difference") {
    const CoherentStateGenerator<double> gen(b);
    const double h = 1e-5;
    const Vector fd = (gen.state(1.2 + h, 0.4) - gen.state(1.2 - h, 0.4)) / (2 * h);
    CHECK((gen.theta_derivative(1.2, 0.4) - fd).norm() < 1e-8);
  }
  SUBCASE("angles outside the chart are rejected") {
    CHECK_THROWS_AS(spin_coherent_state(b, -0.1, 0.0), InvalidArgument);
    CHECK_THROWS_AS(spin_coherent_state(b, 3.2, 0.0), InvalidArgument);
    CHECK_THROWS_AS(spin_coherent_state(b, 1.0, 2 * kPi), InvalidArgument);
    CHECK_THROWS_AS(spin_coherent_state(b, 1.0, -0.5), InvalidArgument);
  }
}

TEST_CASE("coherent states resolve the identity on the quadrature grid") {
  for (Index n : {5, 25}) {
    const PhaseSpace space(SpinBasis(n), n, 2 * n);
    const SphereGrid& g = space.grid();
    Matrix sum = Matrix::Zero(n, n);
    for (Index i = 0; i < g.n_theta(); ++i) {
      for (Index k = 0; k < g.n_phi(); ++k) {
        const Vector v = space.states().col(i * g.n_phi() + k);
        sum += g.theta_weights()(i) * g.phi_weight() * (v * v.adjoint());
      }
    }
    sum *= static_cast<double>(n) / (4 * kPi);
    CHECK(max_abs(sum - Matrix::Identity(n, n)) < 1e-12);
  }
}

TEST_CASE("position and momentum scales") {
  PhysicalParams p;
  p.mass = 2.0;
  p.omega = 3.0;
  p.hbar = 0.5;
  const OperatorSet ops = build_operator_set(SpinBasis(30), p);
  // Canonical commutator away from the truncation edge.
  const Matrix c = commutator(ops.x, ops.p);
  for (Index k = 0; k < 28; ++k) {
    CHECK(c(k, k).imag() == doctest::Approx(p.hbar).epsilon(1e-12));
  }
  // The dissipator position is sqrt(hbar/(m omega j)) Jx.
  const double j = ops.basis.spin();
  CHECK(max_abs(ops.x_hp - std::sqrt(p.hbar / (p.mass * p.omega * j)) * ops.jx) < 1e-12);
}

TEST_CASE("parity reverses position and momentum") {
  const OperatorSet ops = build_operator_set(SpinBasis(12), PhysicalParams{});
  const Matrix par = parity_operator(ops.basis);
  CHECK(max_abs(par * ops.x * par + ops.x) < 1e-14);
  CHECK(max_abs(par * ops.p * par + ops.p) < 1e-14);
}

TEST_CASE("position functions act on the spectrum of x") {
  const OperatorSet ops = build_operator_set(SpinBasis(20), PhysicalParams{});
  const Matrix x2 = ops.position_function([](double x) { return x * x; });
  const Matrix direct = oracle::hermitian_function(ops.x, [](double x) { return x * x; });
  CHECK(max_abs(x2 - direct) < 1e-12);
  CHECK(max_abs(x2 - ops.x * ops.x) < 1e-12);
}

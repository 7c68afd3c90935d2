#include "oracles.hpp"
#include "qthermo/dynamics.hpp"

#include <doctest.h>

#include <random>

using namespace qthermo;

namespace {

std::shared_ptr<const OperatorSet> make_ops(Index n, const PhysicalParams& p) {
  return std::make_shared<const OperatorSet>(build_operator_set(SpinBasis(n), p));
}

std::shared_ptr<MasterEquation> static_equation(std::shared_ptr<const OperatorSet> ops,
                                                const PhysicalParams& p, const Matrix& h,
                                                double tau) {
  return std::make_shared<MasterEquation>(ops, p, [h](double) { return h; }, tau);
}

PhysicalParams closed() {
  PhysicalParams p;
  p.localisation = 0.0;
  p.thermal_coupling = 0.0;
  return p;
}

// Final state of a closed harmonic run from a displaced state.
Matrix harmonic_final(Index steps) {
  PhysicalParams p = closed();
  p.energy_scale = 0.0;
  auto ops = make_ops(20, p);
  auto eq = make_master_equation(ops, p, PotentialSchedule::gaussian_to_double_well(2.0));
  EvolveOptions o;
  o.steps = steps;
  o.stride = steps;
  return evolve(pure_state(oracle::glauber_state(20, Complex(1.2, 0.3))), eq, o).final_state();
}

}  // namespace

TEST_CASE("physical parameter validation names the field") {
  PhysicalParams p;
  CHECK_NOTHROW(p.validate());
  p.mass = 0;
  CHECK_THROWS_WITH_AS(p.validate(), doctest::Contains("physical.mass"), InvalidArgument);
  p = PhysicalParams{};
  p.localisation = -1;
  CHECK_THROWS_WITH_AS(p.validate(), doctest::Contains("physical.localisation"), InvalidArgument);
  p = PhysicalParams{};
  p.occupation = -0.1;
  CHECK_THROWS_WITH_AS(p.validate(), doctest::Contains("physical.occupation"), InvalidArgument);
  p = PhysicalParams{};
  p.length_scale = 0;
  CHECK_THROWS_WITH_AS(p.validate(), doctest::Contains("physical.length_scale"), InvalidArgument);
}

TEST_CASE("occupation from inverse temperature follows Bose-Einstein") {
  PhysicalParams p;
  p.omega = 1.7;
  p.hbar = 0.8;
  for (double beta : {0.01, 0.5, 2.0, 30.0}) {
    const PhysicalParams q = p.with_inverse_temperature(beta);
    const double expected = 1.0 / (std::exp(beta * p.hbar * p.omega) - 1.0);
    CHECK(std::abs(q.occupation - expected) <= 1e-12 * std::max(1.0, expected));
    CHECK(q.inverse_temperature() == doctest::Approx(beta).epsilon(1e-12));
  }
  p.occupation = 0.0;
  CHECK(std::isinf(p.inverse_temperature()));
}

TEST_CASE("tilt profile") {
  const TiltProfile tilt(0.7, 2.0, 10.0);
  CHECK(tilt.value(0.0) == 0.0);
  CHECK(tilt.value(10.0) == 0.0);
  CHECK(tilt.value(5.0) == 0.7);
  CHECK(tilt.holding(5.0));
  CHECK_FALSE(tilt.holding(1.0));
  for (double t : {0.3, 1.0, 1.9, 8.5, 9.7}) {
    const double h = 1e-6;
    const double fd = (tilt.value(t + h) - tilt.value(t - h)) / (2 * h);
    CHECK(tilt.rate(t) == doctest::Approx(fd).epsilon(1e-6));
  }
  CHECK_THROWS_AS(TiltProfile(1.0, 6.0, 10.0), InvalidArgument);
  CHECK_THROWS_AS(TiltProfile(1.0, 0.0, 10.0), InvalidArgument);
}

TEST_CASE("schedule validation") {
  CHECK_THROWS_WITH_AS(PotentialSchedule::gaussian_to_double_well(0.0),
                       doctest::Contains("schedule.duration"), InvalidArgument);
  CHECK_THROWS_WITH_AS(PotentialSchedule::static_double_well(1.0, 0.5, 0.1),
                       doctest::Contains("schedule.c1"), InvalidArgument);
  CHECK_THROWS_WITH_AS(PotentialSchedule::static_double_well(1.0, -0.5, 0.0),
                       doctest::Contains("schedule.c2"), InvalidArgument);
  const auto s = PotentialSchedule::gaussian_to_double_well(4.0);
  CHECK(s.alpha(0.0) == 1.0);
  CHECK(s.alpha(4.0) == 0.0);
  CHECK(schedule_mode_from_string(to_string(ScheduleMode::tilt_controlled)) == ScheduleMode::tilt_controlled);
  CHECK_THROWS_AS(schedule_mode_from_string("sawtooth"), InvalidArgument);
}

TEST_CASE("Gaussian-to-double-well Hamiltonian") {
  const PhysicalParams p;
  const OperatorSet ops = build_operator_set(SpinBasis(25), p);
  const auto s = PotentialSchedule::gaussian_to_double_well(5.0);
  const Matrix kinetic = ops.p * ops.p / (2 * p.mass);
  const Matrix& v = ops.x_eigenvectors;

  SUBCASE("alpha = 1 potential is harmonic minus a Gaussian dip") {
    const Matrix pot = v.adjoint() * (hamiltonian_at(p, s, 0.0, ops) - kinetic) * v;
    for (Index k = 0; k < 25; ++k) {
      const double x = ops.x_eigenvalues(k);
      const double expected = 0.5 * x * x - p.energy_scale * std::exp(-x * x / 2);
      CHECK(pot(k, k).real() == doctest::Approx(expected).epsilon(1e-10));
    }
  }
  SUBCASE("alpha = 0 potential vanishes at the origin") {
    const Matrix pot = v.adjoint() * (hamiltonian_at(p, s, 5.0, ops) - kinetic) * v;
    for (Index k = 0; k < 25; ++k) {
      const double x = ops.x_eigenvalues(k);
      const double expected = 0.5 * x * x - p.energy_scale * (x * x / 2) * std::exp(-x * x / 2);
      CHECK(pot(k, k).real() == doctest::Approx(expected).epsilon(1e-10));
    }
    CHECK(gaussian_well_potential(p, 0.0, 0.0) == 0.0);
  }
  SUBCASE("Hermitian at random times") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0, 5);
    for (int k = 0; k < 10; ++k) {
      CHECK(hermiticity_defect(hamiltonian_at(p, s, u(rng), ops)) <= 1e-12);
    }
  }
  SUBCASE("rejects times outside the schedule") {
    CHECK_THROWS_AS(hamiltonian_at(p, s, -0.1, ops), InvalidArgument);
    CHECK_THROWS_AS(hamiltonian_at(p, s, 5.1, ops), InvalidArgument);
  }
  SUBCASE("rejects a corrupted position operator") {
    OperatorSet bad = ops;
    bad.x(0, 1) += 0.1;
    CHECK_THROWS_AS(hamiltonian_at(p, s, 1.0, bad), InvalidArgument);
  }
}

TEST_CASE("Lindblad generator") {
  const PhysicalParams p;
  auto ops = make_ops(15, p);
  const Matrix h = hamiltonian_at(p, PotentialSchedule::gaussian_to_double_well(1.0), 0.3, *ops);
  std::mt19937_64 rng(11);

  SUBCASE("trace preserving") {
    for (int k = 0; k < 5; ++k) {
      const Matrix rho = oracle::random_density(15, rng);
      CHECK(std::abs(lindblad_rhs(rho, h, p, *ops).trace()) < 1e-12);
    }
  }
  SUBCASE("vacuum is the zero-temperature fixed point") {
    PhysicalParams q = p;
    q.localisation = 0.0;
    q.occupation = 0.0;
    const Matrix number = ops->a_dag * ops->a;
    Matrix vacuum = Matrix::Zero(15, 15);
    vacuum(0, 0) = 1.0;
    CHECK(max_abs(lindblad_rhs(vacuum, q.hbar * q.omega * number, q, *ops)) == 0.0);
  }
  SUBCASE("Gibbs state of the harmonic trap is stationary") {
    PhysicalParams q = p;
    q.localisation = 0.0;
    const double beta = q.inverse_temperature();
    RealVector energies(15);
    for (Index k = 0; k < 15; ++k) {
      energies(k) = q.hbar * q.omega * (k + 0.5);
    }
    const Matrix gibbs = oracle::diagonal_gibbs(energies, beta);
    CHECK(max_abs(lindblad_rhs(gibbs, harmonic_hamiltonian(q, *ops), q, *ops)) <= 1e-10);
    CHECK(max_abs(gibbs_state(harmonic_hamiltonian(q, *ops), beta) - gibbs) < 1e-14);
  }
  SUBCASE("zero couplings leave only the commutator") {
    const Matrix rho = oracle::random_density(15, rng);
    CHECK(max_abs(lindblad_rhs(rho, h, closed(), *ops) - unitary_rhs(rho, h, 1.0)) == 0.0);
  }
}

TEST_CASE("density matrix validation") {
  Matrix rho = Matrix::Identity(3, 3) / 3.0;
  CHECK_NOTHROW(validate_density_matrix(rho));
  Matrix bad = rho;
  bad(0, 1) = 0.1;
  CHECK_THROWS_AS(validate_density_matrix(bad), InvalidArgument);
  bad = rho * 1.1;
  CHECK_THROWS_AS(validate_density_matrix(bad), InvalidArgument);
  bad = Matrix::Zero(2, 2);
  bad(0, 0) = 1.5;
  bad(1, 1) = -0.5;
  CHECK_THROWS_AS(validate_density_matrix(bad), InvalidArgument);
}

TEST_CASE("evolution with a null generator leaves the state unchanged") {
  const PhysicalParams p = closed();
  auto ops = make_ops(10, p);
  std::mt19937_64 rng(2);
  const Matrix rho0 = oracle::random_density(10, rng);
  Matrix rho = hermitian_part(rho0);
  rho /= rho.trace().real();
  EvolveOptions o;
  o.steps = 50;
  o.stride = 5;
  const Trajectory traj = evolve(rho, static_equation(ops, p, Matrix::Zero(10, 10), 3.0), o);
  CHECK((traj.final_state().array() == rho.array()).all());
  CHECK(traj.size() == 11);
  CHECK(traj.times.front() == 0.0);
  CHECK(traj.times.back() == 3.0);
}

TEST_CASE("closed harmonic motion oscillates at the trap frequency") {
  PhysicalParams p = closed();
  p.energy_scale = 0.0;
  p.omega = 1.3;
  auto ops = make_ops(30, p);
  auto eq = make_master_equation(ops, p, PotentialSchedule::gaussian_to_double_well(20.0));
  EvolveOptions o;
  o.steps = 4000;
  const Trajectory traj = evolve(pure_state(oracle::glauber_state(30, Complex(1.5, 0.0))), eq, o);

  std::vector<double> crossings;
  double prev = (traj.states[0] * ops->x).trace().real();
  for (std::size_t k = 1; k < traj.size(); ++k) {
    const double cur = (traj.states[k] * ops->x).trace().real();
    if ((prev < 0) != (cur < 0)) {
      const double f = prev / (prev - cur);
      crossings.push_back(traj.times[k - 1] + f * (traj.times[k] - traj.times[k - 1]));
    }
    prev = cur;
  }
  REQUIRE(crossings.size() >= 4);
  const double half_period = (crossings.back() - crossings.front()) / (crossings.size() - 1);
  const double frequency = kPi / half_period;
  CHECK(std::abs(frequency - p.omega) / p.omega < 1e-3);
}

TEST_CASE("RK4 converges at fourth order") {
  const Matrix coarse = harmonic_final(100);
  const Matrix fine = harmonic_final(200);
  const Matrix reference = harmonic_final(400);
  const double e1 = (coarse - reference).norm();
  const double e2 = (fine - reference).norm();
  const double order = std::log2(e1 / e2);
  CHECK(order >= 3.5);
  CHECK(order <= 4.5);
}

TEST_CASE("trajectory invariants on an open run") {
  const PhysicalParams p;
  auto ops = make_ops(25, p);
  auto eq = make_master_equation(ops, p, PotentialSchedule::gaussian_to_double_well(5.0));
  EvolveOptions o;
  o.steps = 1000;
  o.stride = 10;
  const Matrix rho0 = pure_state(oracle::glauber_state(25, Complex(0.8, -0.4)));
  const Trajectory traj = evolve(rho0, eq, o);
  CHECK(traj.diagnostics.max_trace_correction <= 1e-9);
  CHECK(traj.diagnostics.max_hermiticity_defect <= 1e-9);
  CHECK(traj.diagnostics.max_purity <= 1 + 1e-9);
  CHECK(traj.diagnostics.warnings.empty());
  for (const Matrix& rho : traj.states) {
    CHECK_NOTHROW(validate_density_matrix(rho, 1e-10, -1e-8));
  }
  SUBCASE("bit-identical on repeat") {
    const Trajectory again = evolve(rho0, eq, o);
    CHECK((again.final_state().array() == traj.final_state().array()).all());
  }
}

TEST_CASE("closed evolution conserves purity") {
  const PhysicalParams p = closed();
  auto ops = make_ops(20, p);
  auto eq = make_master_equation(ops, p, PotentialSchedule::gaussian_to_double_well(5.0));
  std::mt19937_64 rng(9);
  const Matrix rho0 = oracle::random_density(20, rng);
  EvolveOptions o;
  o.steps = 2000;
  o.stride = 100;
  const Trajectory traj = evolve(rho0, eq, o);
  for (const Matrix& rho : traj.states) {
    CHECK(std::abs(purity(rho) - purity(rho0)) <= 1e-8);
  }
}

TEST_CASE("thermalisation decreases relative entropy to the Gibbs state") {
  PhysicalParams p;
  p.localisation = 0.0;
  p.thermal_coupling = 0.2;
  p.occupation = 0.5;
  auto ops = make_ops(14, p);
  const Matrix h = harmonic_hamiltonian(p, *ops);
  RealVector energies(14);
  for (Index k = 0; k < 14; ++k) {
    energies(k) = k + 0.5;
  }
  const Matrix gibbs = oracle::diagonal_gibbs(energies, p.inverse_temperature());
  const Matrix rho0 = 0.9 * pure_state(oracle::glauber_state(14, Complex(1.0, 0.5))) +
                      0.1 * Matrix::Identity(14, 14) / 14.0;
  EvolveOptions o;
  o.steps = 1000;
  o.stride = 50;
  const Trajectory traj = evolve(rho0, static_equation(ops, p, h, 10.0), o);
  double previous = oracle::relative_entropy(traj.states[0], gibbs);
  for (std::size_t k = 1; k < traj.size(); ++k) {
    const double d = oracle::relative_entropy(traj.states[k], gibbs);
    CHECK(d <= previous + 1e-12);
    previous = d;
  }
  CHECK(previous < oracle::relative_entropy(rho0, gibbs));
}

TEST_CASE("integrator argument and positivity errors") {
  PhysicalParams p;
  p.localisation = 50.0;
  auto ops = make_ops(12, p);
  auto eq = make_master_equation(ops, p, PotentialSchedule::gaussian_to_double_well(10.0));
  const Matrix rho0 = pure_state(oracle::glauber_state(12, Complex(1.0, 0.0)));
  EvolveOptions o;
  o.steps = 0;
  CHECK_THROWS_AS(evolve(rho0, eq, o), InvalidArgument);
  o.steps = 10;
  o.stride = 3;
  CHECK_THROWS_AS(evolve(rho0, eq, o), InvalidArgument);
  o.stride = 1;
  CHECK_THROWS_WITH_AS(evolve(rho0, eq, o), doctest::Contains("dt ="), NumericalError);
}

TEST_CASE("steady state of the full generator") {
  const PhysicalParams p;
  auto ops = make_ops(12, p);
  auto eq = make_master_equation(ops, p, PotentialSchedule::gaussian_to_double_well(1.0));
  const Matrix ss = steady_state(*eq, 0.0);
  CHECK(std::abs(ss.trace() - Complex(1.0)) < 1e-12);
  CHECK(max_abs(eq->rhs(0.0, ss)) < 1e-10);
  CHECK(min_eigenvalue(ss) > -1e-12);
}

TEST_CASE("time-dependent thermal coupling") {
  const PhysicalParams p;
  auto ops = make_ops(6, p);
  auto eq = static_equation(ops, p, Matrix::Zero(6, 6), 2.0);
  eq->set_thermal_coupling([](double t) { return t < 1.0 ? 0.1 : 0.7; });
  CHECK(eq->params_at(0.5).thermal_coupling == 0.1);
  CHECK(eq->params_at(1.5).thermal_coupling == 0.7);
  CHECK(eq->params().thermal_coupling == p.thermal_coupling);
}

#include "qthermo/dynamics.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace qthermo {

namespace {

constexpr double kTimeSlack = 1e-12;

}  // namespace

// --- TiltProfile ------------------------------------------------------------

TiltProfile::TiltProfile(double amplitude, double ramp, double duration)
    : amplitude_(amplitude), ramp_(ramp), duration_(duration) {
  if (!std::isfinite(amplitude)) {
    throw InvalidArgument("tilt amplitude must be finite");
  }
  if (!(duration > 0)) {
    throw InvalidArgument("tilt duration must be > 0");
  }
  if (!(ramp > 0) || ramp > 0.5 * duration * (1 + kTimeSlack)) {
    throw InvalidArgument("tilt ramp must lie in (0, duration/2]");
  }
}

double TiltProfile::value(double t) const {
  if (t <= 0.0 || t >= duration_) {
    return 0.0;
  }
  if (t < ramp_) {
    return amplitude_ * 0.5 * (1.0 - std::cos(kPi * t / ramp_));
  }
  if (t > duration_ - ramp_) {
    return amplitude_ * 0.5 * (1.0 - std::cos(kPi * (duration_ - t) / ramp_));
  }
  return amplitude_;
}

double TiltProfile::rate(double t) const {
  if (t <= 0.0 || t >= duration_) {
    return 0.0;
  }
  if (t < ramp_) {
    return amplitude_ * 0.5 * kPi / ramp_ * std::sin(kPi * t / ramp_);
  }
  if (t > duration_ - ramp_) {
    return -amplitude_ * 0.5 * kPi / ramp_ * std::sin(kPi * (duration_ - t) / ramp_);
  }
  return 0.0;
}

// --- PotentialSchedule -------------------------------------------------------

PotentialSchedule PotentialSchedule::gaussian_to_double_well(double duration) {
  PotentialSchedule s;
  s.duration = duration;
  s.mode = ScheduleMode::gaussian_to_double_well;
  s.validate();
  return s;
}

PotentialSchedule PotentialSchedule::static_double_well(double duration, double c1, double c2) {
  PotentialSchedule s;
  s.duration = duration;
  s.mode = ScheduleMode::static_double_well;
  s.c1 = c1;
  s.c2 = c2;
  s.validate();
  return s;
}

PotentialSchedule PotentialSchedule::tilt_controlled(double c1, double c2,
                                                     const TiltProfile& tilt) {
  PotentialSchedule s;
  s.duration = tilt.duration();
  s.mode = ScheduleMode::tilt_controlled;
  s.c1 = c1;
  s.c2 = c2;
  s.tilt = tilt;
  s.validate();
  return s;
}

PotentialSchedule PotentialSchedule::static_harmonic(double duration) {
  PotentialSchedule s;
  s.duration = duration;
  s.mode = ScheduleMode::static_harmonic;
  s.validate();
  return s;
}

void PotentialSchedule::validate() const {
  if (!(duration > 0) || !std::isfinite(duration)) {
    throw InvalidArgument("schedule.duration must be > 0");
  }
  if (mode == ScheduleMode::static_double_well || mode == ScheduleMode::tilt_controlled) {
    if (!(c1 < 0)) {
      throw InvalidArgument("schedule.c1 must be < 0");
    }
    if (!(c2 > 0)) {
      throw InvalidArgument("schedule.c2 must be > 0");
    }
  }
  if (mode == ScheduleMode::tilt_controlled &&
      std::abs(tilt.duration() - duration) > kTimeSlack * duration) {
    throw InvalidArgument("schedule.tilt duration must match schedule.duration");
  }
}

std::string to_string(ScheduleMode mode) {
  switch (mode) {
    case ScheduleMode::gaussian_to_double_well:
      return "gaussian_to_double_well";
    case ScheduleMode::static_double_well:
      return "static_double_well";
    case ScheduleMode::tilt_controlled:
      return "tilt_controlled";
    case ScheduleMode::static_harmonic:
      return "static_harmonic";
  }
  return "unknown";
}

ScheduleMode schedule_mode_from_string(const std::string& name) {
  if (name == "gaussian_to_double_well") return ScheduleMode::gaussian_to_double_well;
  if (name == "static_double_well") return ScheduleMode::static_double_well;
  if (name == "tilt_controlled") return ScheduleMode::tilt_controlled;
  if (name == "static_harmonic") return ScheduleMode::static_harmonic;
  throw InvalidArgument("schedule.mode: unknown mode '" + name + "'");
}

// --- Hamiltonians ------------------------------------------------------------

Matrix kinetic_energy(const PhysicalParams& params, const OperatorSet& ops) {
  return ops.p * ops.p / (2.0 * params.mass);
}

Matrix harmonic_hamiltonian(const PhysicalParams& params, const OperatorSet& ops) {
  const Index n = ops.basis.dimension();
  Matrix h = Matrix::Zero(n, n);
  for (Index k = 0; k < n; ++k) {
    h(k, k) = params.hbar * params.omega * (static_cast<double>(k) + 0.5);
  }
  return h;
}

double gaussian_well_potential(const PhysicalParams& params, double alpha, double x) {
  const double w2 = params.length_scale * params.length_scale;
  return -params.energy_scale * (alpha + 0.5 * (1.0 - alpha) * x * x / w2) *
         std::exp(-x * x / (2.0 * w2));
}

Matrix hamiltonian_at(const PhysicalParams& params, const PotentialSchedule& schedule, double t,
                      const OperatorSet& ops) {
  if (t < -kTimeSlack * schedule.duration || t > schedule.duration * (1 + kTimeSlack)) {
    std::ostringstream msg;
    msg << "hamiltonian_at: t = " << t << " outside [0, " << schedule.duration << "]";
    throw InvalidArgument(msg.str());
  }
  if (hermiticity_defect(ops.x) > 1e-12) {
    throw InvalidArgument("hamiltonian_at: x is not Hermitian (corrupted operator set)");
  }
  if (schedule.mode == ScheduleMode::static_harmonic) {
    return harmonic_hamiltonian(params, ops);
  }
  const Matrix kinetic = kinetic_energy(params, ops);
  switch (schedule.mode) {
    case ScheduleMode::gaussian_to_double_well: {
      const double alpha = std::clamp(schedule.alpha(t), 0.0, 1.0);
      const double k = 0.5 * params.mass * params.omega * params.omega;
      return kinetic + ops.position_function([&](double x) {
               return k * x * x + gaussian_well_potential(params, alpha, x);
             });
    }
    case ScheduleMode::static_double_well:
    case ScheduleMode::tilt_controlled: {
      Matrix h = kinetic + ops.position_function([&](double x) {
                   const double x2 = x * x;
                   return schedule.c1 * x2 + schedule.c2 * x2 * x2;
                 });
      if (schedule.mode == ScheduleMode::tilt_controlled) {
        h += schedule.tilt.value(t) * ops.x;
      }
      return h;
    }
    case ScheduleMode::static_harmonic:
      break;
  }
  throw InvalidArgument("hamiltonian_at: unknown schedule mode");
}

// --- Generator ---------------------------------------------------------------

Matrix unitary_rhs(const Matrix& rho, const Matrix& hamiltonian, double hbar) {
  return Complex(0, -1.0 / hbar) * (hamiltonian * rho - rho * hamiltonian);
}

Matrix lindblad_rhs(const Matrix& rho, const Matrix& hamiltonian, const PhysicalParams& params,
                    const OperatorSet& ops) {
  Matrix out = unitary_rhs(rho, hamiltonian, params.hbar);
  if (params.localisation != 0.0) {
    const Matrix& x = ops.x_hp;
    const Matrix inner = x * rho - rho * x;
    out.noalias() -= params.localisation * (x * inner - inner * x);
  }
  if (params.thermal_coupling != 0.0) {
    const Matrix& a = ops.a_hp;
    const Matrix& ad = ops.a_hp_dag;
    const double down = params.thermal_coupling * (params.occupation + 1.0);
    const double up = params.thermal_coupling * params.occupation;
    const Matrix rate = down * (ad * a) + up * (a * ad);
    out.noalias() += down * (a * rho * ad);
    if (up != 0.0) {
      out.noalias() += up * (ad * rho * a);
    }
    out.noalias() -= 0.5 * (rate * rho + rho * rate);
  }
  return out;
}

MasterEquation::MasterEquation(std::shared_ptr<const OperatorSet> ops, PhysicalParams params,
                               HamiltonianFn hamiltonian, double duration)
    : ops_(std::move(ops)),
      params_(params),
      hamiltonian_(std::move(hamiltonian)),
      duration_(duration) {
  if (!ops_) {
    throw InvalidArgument("MasterEquation: missing operator set");
  }
  params_.validate();
  if (!(duration > 0)) {
    throw InvalidArgument("MasterEquation: duration must be > 0");
  }
}

void MasterEquation::set_thermal_coupling(CouplingFn gamma) { thermal_coupling_ = std::move(gamma); }

PhysicalParams MasterEquation::params_at(double t) const {
  if (!thermal_coupling_) {
    return params_;
  }
  PhysicalParams p = params_;
  p.thermal_coupling = thermal_coupling_(t);
  return p;
}

Matrix MasterEquation::rhs(double t, const Matrix& rho) const {
  return lindblad_rhs(rho, hamiltonian(t), params_at(t), *ops_);
}

std::shared_ptr<MasterEquation> make_master_equation(std::shared_ptr<const OperatorSet> ops,
                                                     const PhysicalParams& params,
                                                     const PotentialSchedule& schedule) {
  schedule.validate();
  auto h = [ops, params, schedule](double t) { return hamiltonian_at(params, schedule, t, *ops); };
  return std::make_shared<MasterEquation>(ops, params, h, schedule.duration);
}

// --- States ------------------------------------------------------------------

double min_eigenvalue(const Matrix& rho) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(hermitian_part(rho), Eigen::EigenvaluesOnly);
  return solver.eigenvalues()(0);
}

double purity(const Matrix& rho) { return (rho * rho).trace().real(); }

void validate_density_matrix(const Matrix& rho, double tolerance, double eigenvalue_floor) {
  if (rho.rows() != rho.cols() || rho.rows() < 1) {
    throw InvalidArgument("density matrix must be square and non-empty");
  }
  if (!rho.allFinite()) {
    throw InvalidArgument("density matrix has non-finite entries");
  }
  if (hermiticity_defect(rho) > tolerance) {
    throw InvalidArgument("density matrix is not Hermitian");
  }
  if (std::abs(rho.trace() - Complex(1.0)) > tolerance) {
    throw InvalidArgument("density matrix trace differs from 1");
  }
  if (min_eigenvalue(rho) < eigenvalue_floor) {
    throw InvalidArgument("density matrix has a negative eigenvalue");
  }
}

Matrix gibbs_state(const Matrix& hamiltonian, double beta) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(hermitian_part(hamiltonian));
  const RealVector& energies = solver.eigenvalues();
  RealVector weights = (-beta * (energies.array() - energies(0))).exp();
  weights /= weights.sum();
  return solver.eigenvectors() * weights.cast<Complex>().asDiagonal() *
         solver.eigenvectors().adjoint();
}

Matrix pure_state(const Vector& psi) {
  const Vector v = psi / psi.norm();
  return v * v.adjoint();
}

Matrix steady_state(const MasterEquation& equation, double t) {
  const Index n = equation.ops().basis.dimension();
  const Index n2 = n * n;
  const Matrix h = equation.hamiltonian(t);
  const PhysicalParams params = equation.params_at(t);

  Matrix liouvillian(n2, n2);
  Matrix unit = Matrix::Zero(n, n);
  for (Index col = 0; col < n; ++col) {
    for (Index row = 0; row < n; ++row) {
      unit(row, col) = 1.0;
      const Matrix image = lindblad_rhs(unit, h, params, equation.ops());
      liouvillian.col(col * n + row) = Eigen::Map<const Vector>(image.data(), n2);
      unit(row, col) = 0.0;
    }
  }
  // The (0,0) population equation is redundant (trace preservation); replace it by Tr rho = 1.
  liouvillian.row(0).setZero();
  for (Index k = 0; k < n; ++k) {
    liouvillian(0, k * n + k) = 1.0;
  }
  Vector rhs = Vector::Zero(n2);
  rhs(0) = 1.0;
  const Vector solution = liouvillian.partialPivLu().solve(rhs);
  Matrix rho = hermitian_part(Eigen::Map<const Matrix>(solution.data(), n, n));
  return rho / rho.trace().real();
}

// --- Integrator --------------------------------------------------------------

Trajectory evolve(const Matrix& rho0, std::shared_ptr<const MasterEquation> equation,
                  const EvolveOptions& options) {
  if (!equation) {
    throw InvalidArgument("evolve: missing master equation");
  }
  if (options.steps < 1) {
    throw InvalidArgument("integrator.steps must be >= 1");
  }
  if (options.stride < 1 || options.steps % options.stride != 0) {
    throw InvalidArgument("integrator.stride must be >= 1 and divide integrator.steps");
  }
  validate_density_matrix(rho0, 1e-8);

  const double tau = equation->duration();
  const double dt = tau / static_cast<double>(options.steps);

  Trajectory traj;
  traj.step = dt;
  traj.stride = options.stride;
  traj.equation = equation;
  const std::size_t samples = static_cast<std::size_t>(options.steps / options.stride) + 1;
  traj.times.reserve(samples);
  traj.states.reserve(samples);

  EvolutionDiagnostics& diag = traj.diagnostics;
  Index trace_warnings = 0;

  Matrix rho = rho0;
  traj.times.push_back(0.0);
  traj.states.push_back(rho);
  diag.min_eigenvalue = min_eigenvalue(rho);
  diag.max_purity = purity(rho);

  Matrix h_now = equation->hamiltonian(0.0);
  PhysicalParams p_now = equation->params_at(0.0);
  const OperatorSet& ops = equation->ops();

  for (Index k = 0; k < options.steps; ++k) {
    const double t = static_cast<double>(k) * dt;
    const double t_mid = t + 0.5 * dt;
    const double t_next = (k + 1 == options.steps) ? tau : static_cast<double>(k + 1) * dt;

    const Matrix h_mid = equation->hamiltonian(t_mid);
    const Matrix h_next = equation->hamiltonian(t_next);
    const PhysicalParams p_mid = equation->params_at(t_mid);
    const PhysicalParams p_next = equation->params_at(t_next);

    const Matrix k1 = lindblad_rhs(rho, h_now, p_now, ops);
    const Matrix k2 = lindblad_rhs(rho + (0.5 * dt) * k1, h_mid, p_mid, ops);
    const Matrix k3 = lindblad_rhs(rho + (0.5 * dt) * k2, h_mid, p_mid, ops);
    const Matrix k4 = lindblad_rhs(rho + dt * k3, h_next, p_next, ops);
    const Matrix increment = (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    // A vanishing increment leaves the state untouched; corrections only undo integrator error.
    if (!increment.isZero(0.0)) {
      rho += increment;
      diag.max_hermiticity_defect = std::max(diag.max_hermiticity_defect, hermiticity_defect(rho));
      rho = hermitian_part(rho);
      const double trace = rho.trace().real();
      const double correction = std::abs(trace - 1.0);
      diag.max_trace_correction = std::max(diag.max_trace_correction, correction);
      if (correction > options.trace_warning) {
        ++trace_warnings;
      }
      rho /= trace;
    }

    const double lowest = min_eigenvalue(rho);
    diag.min_eigenvalue = std::min(diag.min_eigenvalue, lowest);
    if (lowest < options.positivity_floor) {
      std::ostringstream msg;
      msg << "positivity lost at t = " << t_next << ": smallest eigenvalue " << lowest
          << " with dt = " << dt << " (" << options.steps
          << " steps); increase integrator.steps";
      throw NumericalError(msg.str());
    }
    diag.max_purity = std::max(diag.max_purity, purity(rho));

    if ((k + 1) % options.stride == 0) {
      traj.times.push_back(t_next);
      traj.states.push_back(rho);
    }
    h_now = h_next;
    p_now = p_next;
  }

  if (trace_warnings > 0) {
    std::ostringstream msg;
    msg << "trace renormalisation exceeded " << options.trace_warning << " on " << trace_warnings
        << " steps (max " << diag.max_trace_correction << ")";
    diag.warnings.push_back(msg.str());
  }
  return traj;
}

}  // namespace qthermo

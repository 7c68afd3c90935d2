#include "qthermo/protocols.hpp"

#include "qthermo/grading.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <sstream>

namespace qthermo {

std::string to_string(ProtocolKind kind) {
  switch (kind) {
    case ProtocolKind::classical_tilt:
      return "classical_tilt";
    case ProtocolKind::classical_tilt_with_cooling:
      return "classical_tilt_with_cooling";
    case ProtocolKind::quantum_sta:
      return "quantum_sta";
  }
  return "unknown";
}

ProtocolKind protocol_kind_from_string(const std::string& name) {
  if (name == "classical_tilt") return ProtocolKind::classical_tilt;
  if (name == "classical_tilt_with_cooling") return ProtocolKind::classical_tilt_with_cooling;
  if (name == "quantum_sta") return ProtocolKind::quantum_sta;
  throw InvalidArgument("protocol.kind: unknown protocol '" + name + "'");
}

ProtocolSpec ProtocolSpec::classical(double duration) {
  ProtocolSpec s;
  s.kind = ProtocolKind::classical_tilt;
  s.duration = duration;
  s.tilt_amplitude = 0.9;
  s.ramp_fraction = 0.25;
  return s;
}

ProtocolSpec ProtocolSpec::classical_with_cooling(double duration) {
  ProtocolSpec s = classical(duration);
  s.kind = ProtocolKind::classical_tilt_with_cooling;
  return s;
}

ProtocolSpec ProtocolSpec::quantum_sta(double duration) {
  ProtocolSpec s;
  s.kind = ProtocolKind::quantum_sta;
  s.duration = duration;
  s.ramp_fraction = 0.3;
  return s;
}

void ProtocolSpec::validate() const {
  if (!(duration > 0) || !std::isfinite(duration)) {
    throw InvalidArgument("protocol.duration must be > 0");
  }
  if (!(c1 < 0)) {
    throw InvalidArgument("protocol.c1 must be < 0");
  }
  if (!(c2 > 0)) {
    throw InvalidArgument("protocol.c2 must be > 0");
  }
  if (!(ramp_fraction > 0 && ramp_fraction <= 0.5)) {
    throw InvalidArgument("protocol.ramp_fraction must lie in (0, 0.5]");
  }
  if (tilt_amplitude && !std::isfinite(*tilt_amplitude)) {
    throw InvalidArgument("protocol.tilt_amplitude must be finite");
  }
  if (kind != ProtocolKind::quantum_sta && !tilt_amplitude) {
    throw InvalidArgument("protocol.tilt_amplitude is required for " + to_string(kind));
  }
  if (!(cooling_coupling >= 0) || !std::isfinite(cooling_coupling)) {
    throw InvalidArgument("protocol.cooling_coupling must be >= 0");
  }
  if (!(gap_floor > 0)) {
    throw InvalidArgument("protocol.gap_floor must be > 0");
  }
}

// --- Hamiltonians --------------------------------------------------------------

double double_well_potential(double c1, double c2, double x) {
  const double x2 = x * x;
  return c1 * x2 + c2 * x2 * x2;
}

Matrix double_well_hamiltonian(const PhysicalParams& params, double c1, double c2,
                               const OperatorSet& ops) {
  if (!(c1 < 0)) {
    throw InvalidArgument("double well needs c1 < 0");
  }
  if (!(c2 > 0)) {
    throw InvalidArgument("double well needs c2 > 0");
  }
  return kinetic_energy(params, ops) +
         ops.position_function([&](double x) { return double_well_potential(c1, c2, x); });
}

Matrix tilt_hamiltonian(const Matrix& base, double alpha, const OperatorSet& ops) {
  if (alpha == 0.0) {
    return base;
  }
  return base + alpha * ops.x;
}

EigenDecomposition eigen_decompose(const Matrix& hamiltonian) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(hermitian_part(hamiltonian));
  EigenDecomposition out;
  out.energies = solver.eigenvalues();
  out.vectors = solver.eigenvectors();
  for (Index k = 0; k < out.vectors.cols(); ++k) {
    Index top = 0;
    out.vectors.col(k).cwiseAbs().maxCoeff(&top);
    const Complex c = out.vectors(top, k);
    out.vectors.col(k) *= std::conj(c) / std::abs(c);
  }
  out.min_gap = std::numeric_limits<double>::infinity();
  for (Index k = 0; k + 1 < out.energies.size(); ++k) {
    out.min_gap = std::min(out.min_gap, out.energies(k + 1) - out.energies(k));
  }
  return out;
}

const EigenDecomposition& EigenTracker::update(const Matrix& hamiltonian, double t) {
  EigenDecomposition next = eigen_decompose(hamiltonian);
  if (current_) {
    const RealVector overlaps = (current_->vectors.adjoint() * next.vectors).diagonal().cwiseAbs();
    Index worst = 0;
    const double lowest = overlaps.minCoeff(&worst);
    min_overlap_ = std::min(min_overlap_, lowest);
    if (lowest <= threshold_) {
      std::ostringstream msg;
      msg << "eigenbasis reordering at t = " << t << ": level " << worst
          << " overlaps its predecessor by " << lowest;
      throw NumericalError(msg.str());
    }
  }
  min_gap_ = std::min(min_gap_, next.min_gap);
  current_ = std::move(next);
  return *current_;
}

StaTerm sta_hamiltonian(const Matrix& h0, const Matrix& h0_rate, double hbar, double t,
                        double gap_floor) {
  const EigenDecomposition eig = eigen_decompose(h0);
  const Index n = eig.energies.size();
  for (Index k = 0; k + 1 < n; ++k) {
    if (eig.energies(k + 1) - eig.energies(k) <= gap_floor) {
      std::ostringstream msg;
      msg << "degenerate crossing between levels " << k << " and " << k + 1 << " at t = " << t
          << " (gap " << eig.energies(k + 1) - eig.energies(k) << ")";
      throw NumericalError(msg.str());
    }
  }
  StaTerm out;
  out.min_gap = eig.min_gap;
  const Matrix m = eig.vectors.adjoint() * h0_rate * eig.vectors;
  Matrix c = Matrix::Zero(n, n);
  for (Index j = 0; j < n; ++j) {
    for (Index i = 0; i < n; ++i) {
      if (i != j) {
        c(i, j) = Complex(0, hbar) * m(i, j) / (eig.energies(j) - eig.energies(i));
      }
    }
  }
  const Matrix h = eig.vectors * c * eig.vectors.adjoint();
  out.hermiticity_defect = hermiticity_defect(h);
  out.h = hermitian_part(h);
  return out;
}

StaTerm sta_hamiltonian(const std::function<Matrix(double)>& h0_at, double t, double dt,
                        double hbar, double gap_floor) {
  if (!(dt > 0)) {
    throw InvalidArgument("sta_hamiltonian: dt must be > 0");
  }
  const Matrix rate = (h0_at(t + dt) - h0_at(t - dt)) / (2.0 * dt);
  return sta_hamiltonian(h0_at(t), rate, hbar, t, gap_floor);
}

// --- Wells and calibration ---------------------------------------------------

WellStates well_states(const Matrix& h_free, const OperatorSet& ops) {
  const EigenDecomposition eig = eigen_decompose(h_free);
  const Vector plus = (eig.vectors.col(0) + eig.vectors.col(1)) / std::sqrt(2.0);
  const Vector minus = (eig.vectors.col(0) - eig.vectors.col(1)) / std::sqrt(2.0);
  const double x_plus = plus.dot(ops.x * plus).real();
  WellStates out;
  if (x_plus > 0) {
    out.right = plus;
    out.left = minus;
  } else {
    out.right = minus;
    out.left = plus;
  }
  return out;
}

namespace {

double doublet_splitting(const Matrix& h) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(h, Eigen::EigenvaluesOnly);
  return solver.eigenvalues()(1) - solver.eigenvalues()(0);
}

double excess_phase(const Matrix& h_free, const OperatorSet& ops, double hbar,
                    const TiltProfile& tilt, double base_splitting) {
  constexpr int kSamples = 400;
  const double h = tilt.duration() / kSamples;
  double sum = 0.0;
  for (int k = 0; k <= kSamples; ++k) {
    const double t = k * h;
    const double weight = (k == 0 || k == kSamples) ? 0.5 : 1.0;
    sum += weight * (doublet_splitting(tilt_hamiltonian(h_free, tilt.value(t), ops)) - base_splitting);
  }
  return sum * h / hbar;
}

}  // namespace

double calibrate_sta_amplitude(const Matrix& h_free, const OperatorSet& ops, double hbar,
                               double duration, double ramp, double target) {
  if (!(target > 0)) {
    throw InvalidArgument("calibrate_sta_amplitude: target phase must be > 0");
  }
  const double base = doublet_splitting(h_free);
  auto phase = [&](double amplitude) {
    return excess_phase(h_free, ops, hbar, TiltProfile(amplitude, ramp, duration), base);
  };
  double lo = 0.0;
  double hi = 0.05;
  int expansions = 0;
  while (phase(hi) < target) {
    lo = hi;
    hi *= 2.0;
    if (++expansions > 30) {
      throw NumericalError("calibrate_sta_amplitude: no tilt reaches the target phase");
    }
  }
  for (int iter = 0; iter < 50 && hi - lo > 1e-13 * hi; ++iter) {
    const double mid = 0.5 * (lo + hi);
    (phase(mid) < target ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

// --- Runs --------------------------------------------------------------------

namespace {

void record_max(std::atomic<double>& slot, double value) {
  double seen = slot.load();
  while (value > seen && !slot.compare_exchange_weak(seen, value)) {
  }
}

std::function<Matrix(double)> build_hamiltonian(const ProtocolSpec& spec,
                                                const PhysicalParams& params,
                                                std::shared_ptr<const OperatorSet> ops,
                                                const TiltProfile& tilt,
                                                std::shared_ptr<std::atomic<double>> defect) {
  auto h_free = std::make_shared<const Matrix>(double_well_hamiltonian(params, spec.c1, spec.c2, *ops));
  if (spec.kind != ProtocolKind::quantum_sta) {
    return [ops, h_free, tilt](double t) { return tilt_hamiltonian(*h_free, tilt.value(t), *ops); };
  }
  const double hbar = params.hbar;
  const double floor = spec.gap_floor * params.hbar * params.omega;
  return [ops, h_free, tilt, hbar, floor, defect](double t) {
    const Matrix h0 = tilt_hamiltonian(*h_free, tilt.value(t), *ops);
    const double rate = tilt.rate(t);
    if (rate == 0.0) {
      return h0;
    }
    const StaTerm sta = sta_hamiltonian(h0, rate * ops->x, hbar, t, floor);
    if (defect) {
      record_max(*defect, sta.hermiticity_defect);
    }
    return Matrix(h0 + sta.h);
  };
}

TiltProfile resolve_tilt(const ProtocolSpec& spec, const Matrix& h_free, const PhysicalParams& params,
                         const OperatorSet& ops) {
  const double ramp = spec.ramp_fraction * spec.duration;
  const double amplitude = spec.tilt_amplitude
                               ? *spec.tilt_amplitude
                               : calibrate_sta_amplitude(h_free, ops, params.hbar, spec.duration, ramp);
  return TiltProfile(amplitude, ramp, spec.duration);
}

}  // namespace

std::function<Matrix(double)> protocol_hamiltonian(const ProtocolSpec& spec,
                                                   const PhysicalParams& params,
                                                   std::shared_ptr<const OperatorSet> ops,
                                                   const TiltProfile& tilt) {
  spec.validate();
  return build_hamiltonian(spec, params, std::move(ops), tilt, nullptr);
}

ProtocolRun run_protocol(const ProtocolSpec& spec, const PhysicalParams& params,
                         std::shared_ptr<const OperatorSet> ops, const ProtocolOptions& options) {
  if (!ops) {
    throw InvalidArgument("run_protocol: missing operator set");
  }
  spec.validate();
  params.validate();

  ProtocolRun run;
  run.spec = spec;
  run.h_free = double_well_hamiltonian(params, spec.c1, spec.c2, *ops);
  run.wells = well_states(run.h_free, *ops);
  run.tilt = resolve_tilt(spec, run.h_free, params, *ops);
  run.spec.tilt_amplitude = run.tilt.amplitude();

  auto defect = std::make_shared<std::atomic<double>>(0.0);
  auto equation = std::make_shared<MasterEquation>(
      ops, params, build_hamiltonian(run.spec, params, ops, run.tilt, defect), spec.duration);
  if (spec.kind == ProtocolKind::classical_tilt_with_cooling) {
    const TiltProfile tilt = run.tilt;
    const double base = params.thermal_coupling;
    const double cool = spec.cooling_coupling;
    equation->set_thermal_coupling([tilt, base, cool](double t) { return tilt.holding(t) ? cool : base; });
  }

  const Matrix rho0 = options.initial_state ? *options.initial_state : pure_state(run.wells.right);
  run.trajectory = evolve(rho0, equation, options.evolve);
  run.warnings = run.trajectory.diagnostics.warnings;
  if (defect->load() > 1e-10) {
    std::ostringstream msg;
    msg << "counter-diabatic term Hermiticity defect up to " << defect->load();
    run.warnings.push_back(msg.str());
  }
  return run;
}

// --- Speed limit ---------------------------------------------------------------

QslEstimate qsl_time(const Trajectory& traj) {
  if (traj.size() < 2) {
    throw InvalidArgument("qsl_time: trajectory needs at least two samples");
  }
  if (!traj.equation) {
    throw InvalidArgument("qsl_time: trajectory carries no master equation");
  }
  QslEstimate out;
  const double f = std::clamp(fidelity(traj.states.front(), traj.final_state()), 0.0, 1.0);
  out.bures_angle = std::acos(std::sqrt(f));

  double integral = 0.0;
  double previous = 0.0;
  for (std::size_t k = 0; k < traj.size(); ++k) {
    const Matrix rate = hermitian_part(traj.equation->rhs(traj.times[k], traj.states[k]));
    Eigen::SelfAdjointEigenSolver<Matrix> solver(rate, Eigen::EigenvaluesOnly);
    const double norm = solver.eigenvalues().cwiseAbs().maxCoeff();
    if (k > 0) {
      integral += 0.5 * (norm + previous) * (traj.times[k] - traj.times[k - 1]);
    }
    previous = norm;
  }
  const double tau = traj.times.back() - traj.times.front();
  out.mean_generator_norm = integral / tau;

  const double s = std::sin(out.bures_angle);
  if (s * s < 1e-14 || out.mean_generator_norm == 0.0) {
    out.tau_qsl = 0.0;
    return out;
  }
  out.tau_qsl = s * s / out.mean_generator_norm;
  return out;
}

}  // namespace qthermo

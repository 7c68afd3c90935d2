#pragma once

#include "qthermo/hilbert.hpp"
#include "qthermo/params.hpp"
#include "qthermo/types.hpp"

#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace qthermo {

/// Tilt amplitude alpha(t): raised-cosine ramp over [0, ramp], hold, and a
/// mirrored ramp down so that alpha(0) = alpha(duration) = 0.
class TiltProfile {
 public:
  TiltProfile() = default;
  /// Throws InvalidArgument unless 0 < ramp <= duration / 2.
  TiltProfile(double amplitude, double ramp, double duration);

  double value(double t) const;
  double rate(double t) const;  ///< d alpha / dt

  double amplitude() const { return amplitude_; }
  double ramp() const { return ramp_; }
  double duration() const { return duration_; }
  bool holding(double t) const { return t >= ramp_ && t <= duration_ - ramp_; }

 private:
  double amplitude_ = 0.0;
  double ramp_ = 1.0;
  double duration_ = 2.0;
};

enum class ScheduleMode {
  gaussian_to_double_well,  ///< harmonic trap + Gaussian dip, alpha(t) = 1 - t/tau
  static_double_well,       ///< p²/2m + c1 x² + c2 x⁴
  tilt_controlled,          ///< static double well + alpha_C(t) x
  static_harmonic,          ///< hbar omega (a†a + 1/2)
};

struct PotentialSchedule {
  double duration = 1.0;
  ScheduleMode mode = ScheduleMode::gaussian_to_double_well;
  double c1 = -1.0;
  double c2 = 0.1;
  TiltProfile tilt;

  static PotentialSchedule gaussian_to_double_well(double duration);
  static PotentialSchedule static_double_well(double duration, double c1, double c2);
  static PotentialSchedule tilt_controlled(double c1, double c2, const TiltProfile& tilt);
  static PotentialSchedule static_harmonic(double duration);

  /// Deformation parameter 1 - t/tau of the Gaussian-to-double-well mode.
  double alpha(double t) const { return 1.0 - t / duration; }

  void validate() const;
};

std::string to_string(ScheduleMode mode);
ScheduleMode schedule_mode_from_string(const std::string& name);

/// Kinetic term p²/2m.
Matrix kinetic_energy(const PhysicalParams& params, const OperatorSet& ops);

/// Number-operator form of the static trap, hbar omega (a†a + 1/2).
Matrix harmonic_hamiltonian(const PhysicalParams& params, const OperatorSet& ops);

/// Scalar Gaussian-to-double-well potential at deformation alpha.
double gaussian_well_potential(const PhysicalParams& params, double alpha, double x);

/// H_s(t) for the schedule; potentials are applied through the spectrum of x.
/// Throws InvalidArgument for t outside [0, tau] or a non-Hermitian x.
Matrix hamiltonian_at(const PhysicalParams& params, const PotentialSchedule& schedule, double t,
                      const OperatorSet& ops);

/// -(i/hbar)[H, rho] - Lambda [x,[x,rho]] + gamma[(nbar+1) L_a(rho) + nbar L_a†(rho)]
/// with x, a taken from their Holstein-Primakoff images.
Matrix lindblad_rhs(const Matrix& rho, const Matrix& hamiltonian, const PhysicalParams& params,
                    const OperatorSet& ops);

/// -(i/hbar)[H, rho].
Matrix unitary_rhs(const Matrix& rho, const Matrix& hamiltonian, double hbar);

/// Time-dependent generator: a Hamiltonian schedule plus the couplings in
/// force at each time. Shared read-only by trajectories and post-processing.
class MasterEquation {
 public:
  using HamiltonianFn = std::function<Matrix(double)>;
  using CouplingFn = std::function<double(double)>;

  MasterEquation(std::shared_ptr<const OperatorSet> ops, PhysicalParams params,
                 HamiltonianFn hamiltonian, double duration);

  /// Overrides gamma as a function of time (cooling segments).
  void set_thermal_coupling(CouplingFn gamma);

  Matrix hamiltonian(double t) const { return hamiltonian_(t); }
  PhysicalParams params_at(double t) const;
  const PhysicalParams& params() const { return params_; }
  const OperatorSet& ops() const { return *ops_; }
  std::shared_ptr<const OperatorSet> shared_ops() const { return ops_; }
  double duration() const { return duration_; }

  Matrix rhs(double t, const Matrix& rho) const;

 private:
  std::shared_ptr<const OperatorSet> ops_;
  PhysicalParams params_;
  HamiltonianFn hamiltonian_;
  CouplingFn thermal_coupling_;
  double duration_;
};

/// Generator for a potential schedule with constant couplings.
std::shared_ptr<MasterEquation> make_master_equation(std::shared_ptr<const OperatorSet> ops,
                                                     const PhysicalParams& params,
                                                     const PotentialSchedule& schedule);

/// Throws InvalidArgument unless rho is a density matrix within the given tolerances.
void validate_density_matrix(const Matrix& rho, double tolerance = 1e-10,
                             double eigenvalue_floor = -1e-8);

double purity(const Matrix& rho);
double min_eigenvalue(const Matrix& rho);

/// exp(-beta H) / Z.
Matrix gibbs_state(const Matrix& hamiltonian, double beta);

/// Projector |psi><psi| of a normalised copy of psi.
Matrix pure_state(const Vector& psi);

/// Stationary state of the generator at time t, from the null space of the
/// Liouvillian superoperator with the trace fixed to one.
Matrix steady_state(const MasterEquation& equation, double t);

/// Correction and positivity bookkeeping of one integration.
struct EvolutionDiagnostics {
  double max_trace_correction = 0.0;       ///< max |Tr rho - 1| before renormalisation
  double max_hermiticity_defect = 0.0;     ///< max |rho - rho†| before re-Hermitisation
  double min_eigenvalue = 1.0;
  double max_purity = 0.0;
  std::vector<std::string> warnings;
};

struct Trajectory {
  std::vector<double> times;
  std::vector<Matrix> states;
  double step = 0.0;   ///< integrator dt
  Index stride = 1;    ///< integrator steps per stored sample
  std::shared_ptr<const MasterEquation> equation;
  EvolutionDiagnostics diagnostics;

  std::size_t size() const { return states.size(); }
  double spacing() const { return step * static_cast<double>(stride); }
  const Matrix& final_state() const { return states.back(); }
};

struct EvolveOptions {
  Index steps = 1000;
  Index stride = 1;
  double positivity_floor = -1e-6;   ///< abort below this eigenvalue
  double trace_warning = 1e-9;       ///< corrections above this are recorded as warnings
};

/// Fixed-step RK4 of the master equation on [0, tau] with dt = tau/steps.
/// Every step is re-Hermitised and trace-normalised; corrections are logged
/// in the diagnostics. Throws NumericalError on positivity loss.
Trajectory evolve(const Matrix& rho0, std::shared_ptr<const MasterEquation> equation,
                  const EvolveOptions& options);

}  // namespace qthermo

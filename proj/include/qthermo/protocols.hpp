#pragma once

// Double-well state transfer: the free double well, the linear tilt control,
// the counter-diabatic (STA) correction and the speed-limit time of a run.

#include "qthermo/dynamics.hpp"
#include "qthermo/hilbert.hpp"
#include "qthermo/types.hpp"

#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace qthermo {

enum class ProtocolKind { classical_tilt, classical_tilt_with_cooling, quantum_sta };

std::string to_string(ProtocolKind kind);
ProtocolKind protocol_kind_from_string(const std::string& name);

struct ProtocolSpec {
  ProtocolKind kind = ProtocolKind::quantum_sta;
  double duration = 10.0;
  double c1 = -0.25;
  double c2 = 0.007;
  /// Tilt plateau. For quantum_sta an unset amplitude is calibrated so the
  /// doublet picks up an excess phase of pi.
  std::optional<double> tilt_amplitude;
  double ramp_fraction = 0.3;      ///< ramp length / duration, in (0, 0.5]
  double cooling_coupling = 0.3;   ///< gamma during the hold (cooling variant)
  double gap_floor = 1e-8;         ///< minimum level spacing, units of hbar omega

  static ProtocolSpec classical(double duration);
  static ProtocolSpec classical_with_cooling(double duration);
  static ProtocolSpec quantum_sta(double duration);

  /// Throws InvalidArgument naming the offending field.
  void validate() const;
};

/// Scalar potential c1 x² + c2 x⁴.
double double_well_potential(double c1, double c2, double x);

/// p²/2m + c1 x² + c2 x⁴. Throws InvalidArgument unless c1 < 0 < c2.
Matrix double_well_hamiltonian(const PhysicalParams& params, double c1, double c2,
                               const OperatorSet& ops);

/// base + alpha x.
Matrix tilt_hamiltonian(const Matrix& base, double alpha, const OperatorSet& ops);

/// Ascending spectrum with phase-fixed eigenvectors (largest component real positive).
struct EigenDecomposition {
  RealVector energies;
  Matrix vectors;
  double min_gap = 0.0;
};

EigenDecomposition eigen_decompose(const Matrix& hamiltonian);

/// Follows an eigenbasis along a schedule and rejects level reordering:
/// every eigenvector must overlap its predecessor by more than `threshold`.
class EigenTracker {
 public:
  explicit EigenTracker(double threshold = 0.5) : threshold_(threshold) {}

  /// Throws NumericalError on a reordering.
  const EigenDecomposition& update(const Matrix& hamiltonian, double t);

  double min_overlap() const { return min_overlap_; }
  double min_gap() const { return min_gap_; }

 private:
  double threshold_;
  std::optional<EigenDecomposition> current_;
  double min_overlap_ = 1.0;
  double min_gap_ = std::numeric_limits<double>::infinity();
};

struct StaTerm {
  Matrix h;                         ///< Hermitised counter-diabatic term
  double hermiticity_defect = 0.0;  ///< before Hermitisation
  double min_gap = 0.0;
};

/// i hbar sum_{i != j} <i|dH0/dt|j> / (E_j - E_i) |i><j| for a known dH0/dt.
/// Throws NumericalError naming the pair and time when a gap is below gap_floor.
StaTerm sta_hamiltonian(const Matrix& h0, const Matrix& h0_rate, double hbar, double t,
                        double gap_floor);

/// Same with dH0/dt by central difference (H0(t+dt) - H0(t-dt)) / 2dt.
StaTerm sta_hamiltonian(const std::function<Matrix(double)>& h0_at, double t, double dt,
                        double hbar, double gap_floor);

/// Localised doublet combinations (|E0> +/- |E1>)/sqrt2 of a double well.
struct WellStates {
  Vector right;  ///< <x> > 0
  Vector left;   ///< <x> < 0
};

WellStates well_states(const Matrix& h_free, const OperatorSet& ops);

/// Tilt plateau for which integral (Delta(t) - Delta(0)) dt / hbar = excess_phase,
/// Delta the doublet splitting of h_free + alpha(t) x.
double calibrate_sta_amplitude(const Matrix& h_free, const OperatorSet& ops, double hbar,
                               double duration, double ramp, double excess_phase = kPi);

struct ProtocolOptions {
  EvolveOptions evolve;
  /// Starting state; the right-well state when empty.
  std::optional<Matrix> initial_state;
};

struct ProtocolRun {
  ProtocolSpec spec;
  TiltProfile tilt;
  Matrix h_free;
  WellStates wells;
  Trajectory trajectory;
  std::vector<std::string> warnings;
};

ProtocolRun run_protocol(const ProtocolSpec& spec, const PhysicalParams& params,
                         std::shared_ptr<const OperatorSet> ops, const ProtocolOptions& options);

/// Hamiltonian of a protocol at time t (with the STA term for quantum_sta).
std::function<Matrix(double)> protocol_hamiltonian(const ProtocolSpec& spec,
                                                   const PhysicalParams& params,
                                                   std::shared_ptr<const OperatorSet> ops,
                                                   const TiltProfile& tilt);

inline constexpr const char* kQslBound = "bures_angle_mean_operator_norm";

struct QslEstimate {
  double tau_qsl = 0.0;
  double bures_angle = 0.0;
  double mean_generator_norm = 0.0;  ///< (1/tau) integral of ||d rho/dt||_op
  std::string bound = kQslBound;
};

/// tau_QSL = sin²(B) / mean ||d rho/dt||_op with B = arccos sqrt F(rho_0, rho_tau).
QslEstimate qsl_time(const Trajectory& traj);

}  // namespace qthermo

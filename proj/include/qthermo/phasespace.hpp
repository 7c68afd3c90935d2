#pragma once

// Spin phase-space thermodynamics: Husimi-Q over SU(2) coherent states, the
// Wehrl entropy and its production/flux rates for the localisation and
// thermal channels.

#include "qthermo/dynamics.hpp"
#include "qthermo/hilbert.hpp"
#include "qthermo/types.hpp"

#include <memory>
#include <utility>
#include <vector>

namespace qthermo {

/// Q values at or below this floor contribute nothing to ln Q and 1/Q integrands.
inline constexpr double kHusimiFloor = 1e-14;

/// Gauss-Legendre nodes (ascending) and weights on [-1, 1].
std::pair<RealVector, RealVector> gauss_legendre(Index n);

/// Periodic spectral differentiation matrix on n uniform nodes of [0, 2 pi).
/// Exact for trigonometric polynomials of degree < n/2.
RealMatrix periodic_derivative_matrix(Index n);

/// Product quadrature on the sphere: Gauss-Legendre in cos(theta), uniform in phi.
class SphereGrid {
 public:
  /// Throws InvalidArgument (with the minimum counts) for n_theta < 2j+1 or n_phi < 4j+2.
  SphereGrid(const SpinBasis& basis, Index n_theta, Index n_phi);

  static Index min_theta_nodes(const SpinBasis& basis) { return basis.dimension(); }
  static Index min_phi_nodes(const SpinBasis& basis) { return 2 * basis.dimension(); }

  Index n_theta() const { return theta_.size(); }
  Index n_phi() const { return phi_.size(); }
  Index size() const { return n_theta() * n_phi(); }

  const RealVector& theta() const { return theta_; }
  const RealVector& phi() const { return phi_; }
  /// Weights in cos(theta); they carry the sin(theta) of the measure.
  const RealVector& theta_weights() const { return theta_weights_; }
  double phi_weight() const { return 2.0 * kPi / static_cast<double>(n_phi()); }

  /// Sum over nodes of w * f for an n_theta x n_phi table, i.e. the integral over dOmega.
  double integrate(const RealMatrix& values) const;

  const RealMatrix& phi_derivative() const { return phi_derivative_; }
  const SpinBasis& basis() const { return basis_; }

 private:
  SpinBasis basis_;
  RealVector theta_, phi_, theta_weights_;
  RealMatrix phi_derivative_;
};

SphereGrid build_sphere_grid(const SpinBasis& basis, Index n_theta, Index n_phi);

/// A sphere grid with its coherent states cached, column i * n_phi + k for node (i, k).
class PhaseSpace {
 public:
  explicit PhaseSpace(SphereGrid grid);
  PhaseSpace(const SpinBasis& basis, Index n_theta, Index n_phi);

  const SphereGrid& grid() const { return grid_; }
  const SpinBasis& basis() const { return grid_.basis(); }
  const Matrix& states() const { return states_; }
  const Matrix& theta_derivatives() const { return theta_derivatives_; }

 private:
  SphereGrid grid_;
  Matrix states_;
  Matrix theta_derivatives_;
};

/// Q(Omega) = <Omega|rho|Omega> with its angular derivatives, as n_theta x n_phi tables.
struct HusimiField {
  RealMatrix q;
  RealMatrix dq_dtheta;
  RealMatrix dq_dphi;
  double time = 0.0;
  std::shared_ptr<const PhaseSpace> space;

  /// (N / 4 pi) * integral of Q.
  double normalisation() const;
};

/// Husimi function on the grid. The theta derivative uses the derivative
/// coherent states, the phi derivative the spectral matrix.
HusimiField husimi_q(const Matrix& rho, std::shared_ptr<const PhaseSpace> space, double t = 0.0,
                     bool with_derivatives = true);

/// S_Q = -(N / 4 pi) * integral of Q ln Q.
double wehrl_entropy(const HusimiField& field);

struct ChannelRates {
  double production = 0.0;  ///< Pi
  double flux = 0.0;        ///< Phi
};

/// Pi^lc = Lambda (N/4pi) * integral |J_x(Q)|^2 / Q and Phi^lc = 0, with Lambda
/// the spin-channel coupling of the simulated dissipator.
ChannelRates localisation_rates(const HusimiField& field, const PhysicalParams& params);

/// Pi^th and Phi^th of the thermal channel with the spin-channel coupling.
ChannelRates thermal_rates(const HusimiField& field, const PhysicalParams& params);

struct EntropyRecord {
  double t = 0.0;
  double entropy = 0.0;       ///< S_Q
  double entropy_rate = 0.0;  ///< dS_Q/dt from the trajectory
  double unitary_rate = 0.0;  ///< dS_U/dt
  double pi_lc = 0.0;
  double phi_lc = 0.0;
  double pi_th = 0.0;
  double phi_th = 0.0;
  double residual = 0.0;  ///< |dS_Q/dt - (dS_U/dt + Pi^lc + Pi^th - Phi^th)|

  double max_rate() const;
};

/// Unitary Wehrl rate at rho under H: central difference of S_Q after exact
/// propagation by +/- dt_u.
double unitary_entropy_rate(const Matrix& rho, const Matrix& hamiltonian, double hbar,
                            double dt_u, const std::shared_ptr<const PhaseSpace>& space);

/// Decomposition at interior sample k (1 <= k <= last - 1), central differences.
EntropyRecord decompose_entropy_rate(const Trajectory& traj, std::size_t k,
                                     const std::shared_ptr<const PhaseSpace>& space);

/// One record per stored sample; the two end samples use one-sided
/// second-order differences.
std::vector<EntropyRecord> entropy_series(const Trajectory& traj,
                                          const std::shared_ptr<const PhaseSpace>& space);

}  // namespace qthermo

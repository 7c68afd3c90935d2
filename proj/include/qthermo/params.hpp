#pragma once

#include <optional>

namespace qthermo {

/// Physical constants and couplings of one simulation. Units are whatever the
/// caller picks; the defaults are the dimensionless desk-scale set.
struct PhysicalParams {
  double mass = 1.0;
  double omega = 1.0;              ///< trap frequency, also sets the Fock-basis length
  double hbar = 1.0;
  double energy_scale = 5.0;       ///< depth of the Gaussian dip
  double length_scale = 1.0;       ///< width of the Gaussian dip
  double localisation = 0.01;      ///< Lambda
  double thermal_coupling = 0.05;  ///< gamma
  double occupation = 1.0;         ///< nbar

  /// Throws InvalidArgument naming the first offending field.
  void validate() const;

  /// Bose-Einstein occupation (e^{beta hbar omega} - 1)^{-1}.
  static double occupation_from_beta(double beta, double hbar, double omega);

  /// Copy with `occupation` derived from an inverse temperature.
  PhysicalParams with_inverse_temperature(double beta) const;

  /// beta with nbar = (e^{beta hbar omega} - 1)^{-1}; infinite for nbar = 0.
  double inverse_temperature() const;
};

}  // namespace qthermo

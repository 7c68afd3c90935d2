#pragma once

// Protocol grading G = gS * gQ * gT.

#include "qthermo/phasespace.hpp"
#include "qthermo/protocols.hpp"
#include "qthermo/types.hpp"

#include <optional>
#include <string>
#include <vector>

namespace qthermo {

inline constexpr const char* kFidelityConvention = "uhlmann_squared";

struct FidelityResult {
  double value = 0.0;
  double clamp = 0.0;  ///< magnitude of negative eigenvalues set to 0
};

/// Uhlmann fidelity (Tr sqrt(sqrt(rho) sigma sqrt(rho)))², in [0, 1].
FidelityResult fidelity_checked(const Matrix& rho, const Matrix& sigma);
double fidelity(const Matrix& rho, const Matrix& sigma);

struct SpeedScore {
  double value = 0.0;
  std::optional<std::string> notice;
};

/// max{0, 1 - 0.1 log10(tau / tau_qsl)}; 0 with a notice when tau_qsl = 0.
/// Throws InvalidArgument for tau <= 0 or tau_qsl < 0.
SpeedScore speed_score(double tau, double tau_qsl);

/// exp(-sigma_ir).
double thermodynamic_score(double sigma_ir);

/// Integral of Pi^lc + Pi^th over the records by the trapezoid rule. Throws
/// InvalidArgument for fewer than two records or a non-uniform time grid.
double sigma_ir(const std::vector<EntropyRecord>& records);

/// Left-well state evolved under the free double well with the base
/// dissipators for the protocol duration.
Matrix target_state(const ProtocolSpec& spec, const PhysicalParams& params,
                    std::shared_ptr<const OperatorSet> ops, const EvolveOptions& options);

struct GradingReport {
  double tau = 0.0;
  double tau_qsl = 0.0;
  double fidelity = 0.0;
  double sigma_ir = 0.0;
  double g_speed = 0.0;
  double g_fidelity = 0.0;
  double g_thermo = 0.0;
  double grade = 0.0;
  std::string kind;
  std::string digest;
  std::string fidelity_convention = kFidelityConvention;
  std::string qsl_bound = kQslBound;
  std::vector<std::string> notices;
};

/// Report from the three raw ingredients.
GradingReport compose_report(double tau, double tau_qsl, double fidelity_value, double sigma,
                             const std::string& kind = {}, const std::string& digest = {});

GradingReport grade(const ProtocolRun& run, const std::vector<EntropyRecord>& records,
                    const Matrix& target, const std::string& digest = {});

}  // namespace qthermo

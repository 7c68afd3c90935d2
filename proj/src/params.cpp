#include "qthermo/params.hpp"

#include "qthermo/types.hpp"

#include <cmath>
#include <limits>

namespace qthermo {

namespace {

void require(bool ok, const char* field, const char* rule) {
  if (!ok) {
    throw InvalidArgument(std::string("physical.") + field + " " + rule);
  }
}

}  // namespace

void PhysicalParams::validate() const {
  require(std::isfinite(mass) && mass > 0, "mass", "must be > 0");
  require(std::isfinite(omega) && omega > 0, "omega", "must be > 0");
  require(std::isfinite(hbar) && hbar > 0, "hbar", "must be > 0");
  require(std::isfinite(length_scale) && length_scale > 0, "length_scale", "must be > 0");
  require(std::isfinite(energy_scale) && energy_scale >= 0, "energy_scale", "must be >= 0");
  require(std::isfinite(localisation) && localisation >= 0, "localisation", "must be >= 0");
  require(std::isfinite(thermal_coupling) && thermal_coupling >= 0, "thermal_coupling",
          "must be >= 0");
  require(std::isfinite(occupation) && occupation >= 0, "occupation", "must be >= 0");
}

double PhysicalParams::occupation_from_beta(double beta, double hbar, double omega) {
  if (!(beta > 0)) {
    throw InvalidArgument("physical.beta must be > 0");
  }
  return 1.0 / std::expm1(beta * hbar * omega);
}

PhysicalParams PhysicalParams::with_inverse_temperature(double beta) const {
  PhysicalParams out = *this;
  out.occupation = occupation_from_beta(beta, hbar, omega);
  return out;
}

double PhysicalParams::inverse_temperature() const {
  if (occupation == 0.0) {
    return std::numeric_limits<double>::infinity();
  }
  return std::log1p(1.0 / occupation) / (hbar * omega);
}

}  // namespace qthermo

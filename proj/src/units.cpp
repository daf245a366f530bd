#include "qpot/units.hpp"

#include <cmath>
#include <numbers>

#include "qpot/errors.hpp"

namespace qpot {

void PhysicalParams::validate() const {
  if (!(mass > 0)) throw ConfigError("mass must be positive");
  if (!(c4 > 0)) throw ConfigError("c4 must be positive");
  if (!(sigma > 0)) throw ConfigError("sigma must be positive");
  if (!(z0 > 0)) throw ConfigError("z0 must be positive");
  if (!(delta > 0)) throw ConfigError("delta must be positive");
  if (!(z0 > delta)) throw ConfigError("z0 must lie above the absorber edge delta");
  if (c1 == 0.0 && c2 == 0.0) throw ConfigError("c1 and c2 cannot both vanish");
  if (!(hbar > 0)) throw ConfigError("hbar must be positive");
  if (absorber_strength && *absorber_strength < 0)
    throw ConfigError("absorber_strength must be non-negative");
  if (trap_omega_override && *trap_omega_override < 0)
    throw ConfigError("trap_omega must be non-negative");
}

double PhysicalParams::trap_omega() const {
  if (trap_omega_override) return *trap_omega_override;
  return hbar / (2.0 * mass * sigma * sigma);
}

double PhysicalParams::trap_center() const {
  return trap_center_override ? *trap_center_override : z0;
}

double PhysicalParams::absorber() const {
  if (absorber_strength) return *absorber_strength;
  return c4 / std::pow(delta, 4);
}

double PhysicalParams::profile_length() const {
  return std::sqrt(2.0 * mass * c4) / hbar;
}

double PhysicalParams::profile_wavelength(double z) const {
  return 2.0 * std::numbers::pi * z * z / profile_length();
}

PhysicalParams PhysicalParams::with_envelope(double new_z0, double new_sigma) const {
  PhysicalParams out = *this;
  out.z0 = new_z0;
  out.sigma = new_sigma;
  return out;
}

UnitScale UnitScale::for_params(const PhysicalParams& params) {
  UnitScale scale;
  scale.mass_unit = params.mass;
  return scale;
}

double UnitScale::energy_unit() const {
  return mass_unit * length_unit * length_unit / (time_unit * time_unit);
}

double UnitScale::hbar_internal(double hbar_si) const {
  return hbar_si * time_unit / (mass_unit * length_unit * length_unit);
}

}  // namespace qpot

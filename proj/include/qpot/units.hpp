#pragma once

#include <optional>

namespace qpot {

/// Reduced Planck constant, CODATA 2018 (J s).
inline constexpr double kHbar = 1.054571817e-34;

inline constexpr double kMicrometre = 1e-6;
inline constexpr double kMillisecond = 1e-3;

/// Physical description of one atom-surface experiment, in SI units.
///
/// The engineered profile is P(z) = z [c1 cos(L/z) + c2 sin(L/z)] with
/// L = sqrt(2 m C4) / hbar. The Gaussian envelope (and, by default, the
/// harmonic trap) is centred at z0 with standard deviation sigma.
struct PhysicalParams {
  double mass = 1.44e-25;  // kg (87Rb)
  double c4 = 9.1e-56;     // J m^4 (87Rb near silicon)
  double z0 = 2.3e-6;      // m
  double sigma = 1e-6;     // m
  double c1 = 1.0;
  double c2 = 0.0;
  double delta = 0.15e-6;  // m, absorber edge
  /// Magnitude of the imaginary potential at z = 0. Defaults to |C4/delta^4|.
  std::optional<double> absorber_strength;
  /// Trap angular frequency. Defaults to hbar / (2 m sigma^2).
  std::optional<double> trap_omega_override;
  /// Trap centre. Defaults to z0.
  std::optional<double> trap_center_override;
  double hbar = kHbar;

  /// Throws ConfigError when an invariant is violated.
  void validate() const;

  double trap_omega() const;
  double trap_center() const;
  double absorber() const;
  /// sqrt(2 m C4) / hbar, the length scale of the profile phase.
  double profile_length() const;
  /// Local wavelength 2 pi z^2 / L of the engineered profile at z.
  double profile_wavelength(double z) const;

  /// Copy with a new envelope mean and width; trap and absorber overrides kept.
  PhysicalParams with_envelope(double new_z0, double new_sigma) const;
};

/// Internal scaling: lengths in length_unit, times in time_unit and masses in
/// mass_unit. Energies are measured in mass_unit length_unit^2 / time_unit^2.
struct UnitScale {
  double length_unit = kMicrometre;
  double time_unit = kMillisecond;
  double mass_unit = 1.44e-25;

  static UnitScale for_params(const PhysicalParams& params);

  double energy_unit() const;
  double hbar_internal(double hbar_si) const;

  double length_to_internal(double metres) const { return metres / length_unit; }
  double length_to_si(double internal) const { return internal * length_unit; }
  double time_to_internal(double seconds) const { return seconds / time_unit; }
  double time_to_si(double internal) const { return internal * time_unit; }
  double mass_to_internal(double kg) const { return kg / mass_unit; }
  double mass_to_si(double internal) const { return internal * mass_unit; }
  double energy_to_internal(double joules) const { return joules / energy_unit(); }
  double energy_to_si(double internal) const { return internal * energy_unit(); }
};

}  // namespace qpot

#pragma once

#include <complex>
#include <variant>
#include <vector>

#include "qpot/field.hpp"
#include "qpot/units.hpp"

namespace qpot {

/// Coefficients of the engineered profile and its Gaussian envelope.
struct ProfileSpec {
  double c1 = 1.0;
  double c2 = 0.0;
  bool use_abs = false;  // use |P(z)| instead of P(z)
  double z0 = 2.3e-6;
  double sigma = 1e-6;

  static ProfileSpec from(const PhysicalParams& params, bool use_abs = false);
};

/// z [c1 cos(L/z) + c2 sin(L/z)], L = sqrt(2 m C4)/hbar. Throws DomainError for z <= 0.
double engineered_profile(double z, const PhysicalParams& params, const ProfileSpec& spec);

/// Analytic dP/dz (sign-corrected when use_abs is set).
double engineered_profile_derivative(double z, const PhysicalParams& params, const ProfileSpec& spec);

/// The bracket c1 cos(L/z) + c2 sin(L/z) and its z-derivative.
struct ProfileBracket {
  double value;
  double derivative;
};
ProfileBracket profile_bracket(double z, const PhysicalParams& params, const ProfileSpec& spec);

/// Zeros of P(z) on (z_lo, z_hi), ascending.
std::vector<double> profile_nodes(const PhysicalParams& params, const ProfileSpec& spec, double z_lo, double z_hi);

struct OdeCheck {
  double max_residual = 0.0;
  std::vector<double> checked;
  std::vector<double> excluded;  // samples within 2h of a node
};

/// Relative residual |P'' + (2 m C4 / hbar^2 z^4) P| / max(|P''|, |(2 m C4/hbar^2 z^4) P|)
/// with P'' from a three-point central difference at spacing h.
OdeCheck verify_profile_ode(const PhysicalParams& params, const ProfileSpec& spec, const std::vector<double>& z_samples,
                            double h);

/// P(z) exp(-(z - z0)^2 / 4 sigma^2), normalized, exactly zero at z <= 0.
Wavefunction engineered_packet(const Grid1D& grid, const PhysicalParams& params, const ProfileSpec& spec);

/// Normalized exp(-(z - z0)^2 / 4 sigma^2) with psi = 0 at z <= 0.
/// Reports a warning when more than 1e-6 of the Gaussian mass lies outside the grid.
Wavefunction gaussian_packet(const Grid1D& grid, double z0, double sigma);

/// Probability of an (untruncated) Gaussian density outside [z_min, z_max].
double gaussian_mass_outside(const Grid1D& grid, double z0, double sigma);

struct LinearPhase {
  double slope;  // K, 1/m
};
struct InversePhase {
  double amplitude;     // m; phi = amplitude / z + offset
  double offset = 0.0;  // rad
};
using PhaseProfile = std::variant<LinearPhase, InversePhase>;

/// psi(z) -> psi(z) [a e^{i phi(z)} + b e^{-i phi(z)}].
/// b = a gives 2a cos(phi); b = -a gives 2ia sin(phi).
struct ImprintSpec {
  PhaseProfile phase;
  std::complex<double> a{0.5, 0.0};
  std::complex<double> b{0.5, 0.0};
};

double imprint_phase(const PhaseProfile& profile, double z);

/// Pointwise imprint followed by normalization. Throws ConstructionError on zero norm.
Wavefunction phase_imprint(const Wavefunction& psi, const ImprintSpec& spec);

/// Coefficients (a, b) for which a e^{i phi} + b e^{-i phi} = c1 cos(phi) + c2 sin(phi).
std::pair<std::complex<double>, std::complex<double>> imprint_coefficients(double c1, double c2);

/// The two-stage preparation: sin(Kz) from a linear phase stage, then the
/// c1 cos(L/z) + c2 sin(L/z) factor from an inverse-distance stage.
Wavefunction preparation_sequence(const Wavefunction& psi, double slope_k, const PhysicalParams& params,
                                  const ProfileSpec& spec, bool include_inverse_stage = true);

/// |<a|b>|^2 / (<a|a><b|b>). Throws GridError on grid mismatch.
double fidelity(const Wavefunction& a, const Wavefunction& b);

}  // namespace qpot

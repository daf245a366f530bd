#include "qpot/wavepacket.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <type_traits>
#include <numbers>
#include <sstream>

#include "qpot/diagnostics.hpp"
#include "qpot/errors.hpp"

namespace qpot {

namespace {

double envelope(double z, double z0, double sigma) {
  const double d = z - z0;
  return std::exp(-d * d / (4.0 * sigma * sigma));
}

Wavefunction normalized_or_throw(const Wavefunction& psi, const char* what) {
  try {
    return normalize(psi);
  } catch (const NormalizationError&) {
    throw ConstructionError(what);
  }
}

}  // namespace

ProfileSpec ProfileSpec::from(const PhysicalParams& params, bool use_abs) {
  return ProfileSpec{params.c1, params.c2, use_abs, params.z0, params.sigma};
}

ProfileBracket profile_bracket(double z, const PhysicalParams& params, const ProfileSpec& spec) {
  if (!(z > 0)) throw DomainError("engineered profile requires z > 0");
  const double length = params.profile_length();
  const double theta = length / z;
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  const double dtheta = length / (z * z);  // -d(theta)/dz
  return {spec.c1 * c + spec.c2 * s, (spec.c1 * s - spec.c2 * c) * dtheta};
}

double engineered_profile(double z, const PhysicalParams& params, const ProfileSpec& spec) {
  const double p = z * profile_bracket(z, params, spec).value;
  return spec.use_abs ? std::abs(p) : p;
}

double engineered_profile_derivative(double z, const PhysicalParams& params, const ProfileSpec& spec) {
  const auto [alpha, dalpha] = profile_bracket(z, params, spec);
  const double dp = alpha + z * dalpha;
  if (spec.use_abs && z * alpha < 0) return -dp;
  return dp;
}

std::vector<double> profile_nodes(const PhysicalParams& params, const ProfileSpec& spec, double z_lo, double z_hi) {
  // c1 cos(t) + c2 sin(t) = R cos(t - beta) vanishes at t = beta + pi/2 + n pi.
  std::vector<double> nodes;
  if (!(z_hi > z_lo) || !(z_hi > 0)) return nodes;
  const double length = params.profile_length();
  const double beta = std::atan2(spec.c2, spec.c1);
  const double theta_lo = length / z_hi;
  const double theta_hi = z_lo > 0 ? length / z_lo : std::numeric_limits<double>::infinity();
  const double first = beta + std::numbers::pi / 2;
  auto n = static_cast<long long>(std::ceil((theta_lo - first) / std::numbers::pi));
  for (;; ++n) {
    const double theta = first + static_cast<double>(n) * std::numbers::pi;
    if (theta <= 0 || theta <= theta_lo) continue;
    if (theta >= theta_hi) break;
    nodes.push_back(length / theta);
    if (nodes.size() > 100000) break;
  }
  std::sort(nodes.begin(), nodes.end());
  return nodes;
}

OdeCheck verify_profile_ode(const PhysicalParams& params, const ProfileSpec& spec, const std::vector<double>& z_samples,
                            double h) {
  OdeCheck out;
  const double length = params.profile_length();
  ProfileSpec signed_spec = spec;
  signed_spec.use_abs = false;
  for (double z : z_samples) {
    if (!(z - 2 * h > 0)) throw DomainError("ODE check samples must satisfy z > 2h");
    if (!profile_nodes(params, signed_spec, z - 2 * h, z + 2 * h).empty()) {
      out.excluded.push_back(z);
      continue;
    }
    const double p = engineered_profile(z, params, signed_spec);
    const double d2 = (engineered_profile(z + h, params, signed_spec) - 2 * p +
                       engineered_profile(z - h, params, signed_spec)) / (h * h);
    const double coupling = length * length / std::pow(z, 4) * p;
    const double scale = std::max(std::abs(d2), std::abs(coupling));
    const double rel = scale > 0 ? std::abs(d2 + coupling) / scale : 0.0;
    out.max_residual = std::max(out.max_residual, rel);
    out.checked.push_back(z);
  }
  if (!out.excluded.empty()) {
    std::ostringstream msg;
    msg << out.excluded.size() << " ODE sample(s) excluded near profile nodes";
    warn(msg.str());
  }
  return out;
}

Wavefunction engineered_packet(const Grid1D& grid, const PhysicalParams& params, const ProfileSpec& spec) {
  if (spec.c1 == 0.0 && spec.c2 == 0.0) throw ConfigError("c1 and c2 cannot both vanish");
  Wavefunction psi(grid);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double z = grid.z(i);
    if (z <= 0) continue;
    psi.values[i] = engineered_profile(z, params, spec) * envelope(z, spec.z0, spec.sigma);
  }
  return normalized_or_throw(psi, "engineered packet has zero norm on this grid");
}

double gaussian_mass_outside(const Grid1D& grid, double z0, double sigma) {
  const double s = std::sqrt(2.0) * sigma;
  return 0.5 * std::erfc((z0 - grid.z_min()) / s) + 0.5 * std::erfc((grid.z_max() - z0) / s);
}

Wavefunction gaussian_packet(const Grid1D& grid, double z0, double sigma) {
  if (!(z0 > 0) || !(sigma > 0)) throw ConfigError("Gaussian packet needs z0 > 0 and sigma > 0");
  const double beyond = 0.5 * std::erfc((grid.z_max() - z0) / (std::sqrt(2.0) * sigma));
  if (beyond > 1e-6) {
    std::ostringstream msg;
    msg << "Gaussian packet truncated: mass " << beyond << " lies beyond z_max";
    warn(msg.str());
  }
  Wavefunction psi(grid);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double z = grid.z(i);
    if (z <= 0) continue;
    psi.values[i] = envelope(z, z0, sigma);
  }
  return normalized_or_throw(psi, "Gaussian packet has zero norm on this grid");
}

double imprint_phase(const PhaseProfile& profile, double z) {
  return std::visit(
      [z](const auto& p) -> double {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, LinearPhase>) {
          return p.slope * z;
        } else {
          if (!(z > 0)) throw DomainError("inverse phase profile requires z > 0");
          return p.amplitude / z + p.offset;
        }
      },
      profile);
}

Wavefunction phase_imprint(const Wavefunction& psi, const ImprintSpec& spec) {
  if (std::norm(spec.a) + std::norm(spec.b) <= 0) throw ConfigError("imprint needs |a|^2 + |b|^2 > 0");
  const bool inverse = std::holds_alternative<InversePhase>(spec.phase);
  Wavefunction out = psi;
  for (std::size_t i = 0; i < psi.size(); ++i) {
    const double z = psi.grid.z(i);
    if (inverse && z <= 0) {
      out.values[i] = 0.0;
      continue;
    }
    const double phi = imprint_phase(spec.phase, z);
    const complex e = std::polar(1.0, phi);
    out.values[i] = psi.values[i] * (spec.a * e + spec.b * std::conj(e));
  }
  return normalized_or_throw(out, "imprinted packet has zero norm");
}

std::pair<std::complex<double>, std::complex<double>> imprint_coefficients(double c1, double c2) {
  return {complex(c1, -c2) * 0.5, complex(c1, c2) * 0.5};
}

Wavefunction preparation_sequence(const Wavefunction& psi, double slope_k, const PhysicalParams& params,
                                  const ProfileSpec& spec, bool include_inverse_stage) {
  Wavefunction out = phase_imprint(psi, ImprintSpec{LinearPhase{slope_k}, {0.5, 0.0}, {-0.5, 0.0}});
  if (!include_inverse_stage) return out;
  const auto [a, b] = imprint_coefficients(spec.c1, spec.c2);
  return phase_imprint(out, ImprintSpec{InversePhase{params.profile_length(), 0.0}, a, b});
}

double fidelity(const Wavefunction& a, const Wavefunction& b) {
  const complex ab = overlap(a, b);
  const double na = a.norm_squared();
  const double nb = b.norm_squared();
  if (!(na > 0) || !(nb > 0)) throw NormalizationError("fidelity of a zero-norm state");
  return std::norm(ab) / (na * nb);
}

}  // namespace qpot

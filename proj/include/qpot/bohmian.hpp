#pragma once

#include <cstddef>
#include <vector>

#include "qpot/field.hpp"
#include "qpot/units.hpp"
#include "qpot/wavepacket.hpp"

namespace qpot {

/// Madelung (hydrodynamic) view of a wavefunction: psi = sqrt(rho) exp(iS/hbar).
struct MadelungFields {
  RealField density;   // 1/m
  RealField phase;     // S, J s, unwrapped left to right
  RealField velocity;  // m/s, masked where rho is negligible
};

/// Second-derivative stencil used for the quantum potential.
enum class Stencil {
  central3,    // (f[i+1] - 2 f[i] + f[i-1]) / h^2
  richardson,  // one Richardson step on spacings h and 2h (fourth order)
};

/// Velocity is masked where rho < density_floor * max(rho).
MadelungFields madelung_decompose(const Wavefunction& psi, double mass, double hbar, double density_floor = 1e-12);

/// Q = -(hbar^2 / 2m) (sqrt rho)'' / sqrt rho, per particle (J).
///
/// Masked: points without a full stencil, points where sqrt(rho) falls below
/// amplitude_floor * max sqrt(rho), kink-shaped minima of sqrt(rho) (nodes of a
/// signed amplitude falling between grid points), and a guard band of two
/// points around each. Throws EmptyFieldError when nothing survives.
QField quantum_potential(const RealField& rho, double mass, double hbar, Stencil stencil = Stencil::richardson,
                         double amplitude_floor = 1e-6);

/// Net potential Q + V_CP left by the Gaussian truncation of the engineered
/// profile:
///   (hbar^2 / 4 m sigma^2) [1 + 2 (z - z0) P'/P - (z - z0)^2 / (2 sigma^2)].
/// Throws NodeSingularity when |c1 cos + c2 sin| < 1e-6 sqrt(c1^2 + c2^2).
double residual_potential(double z, const PhysicalParams& params, const ProfileSpec& spec);

/// The same residual written through the profile bracket alpha(z):
///   -(hbar^2/2m) [(-6 + 4 z0/z - 4 (z - z0) alpha'/alpha) / zeta + 4 (z - z0)^2 / zeta^2]
/// for an envelope exp(-(z - z0)^2 / zeta). zeta <= 0 selects 4 sigma^2.
double residual_potential_expanded(double z, const PhysicalParams& params, const ProfileSpec& spec, double zeta = 0.0);

/// Density-weighted fields of the engineered packet, all sampled on the grid.
struct WeightedFields {
  RealField weighted_q;         // rho Q, J/m
  RealField weighted_residual;  // rho (Q + V_CP), J/m, with the unmodified V_CP
  RealField density;            // 1/m
};

WeightedFields weighted_fields(const Grid1D& grid, const PhysicalParams& params, const ProfileSpec& spec);

/// Peak magnitudes of the weighted fields over the packet support
/// {z >= delta, rho >= support_floor * max rho}.
struct WeightedPeaks {
  double weighted_q;
  double weighted_residual;
  double ratio() const { return weighted_residual / weighted_q; }
};
WeightedPeaks weighted_peaks(const WeightedFields& fields, const PhysicalParams& params, double support_floor = 1e-6);

/// Velocity field at one instant.
struct VelocitySnapshot {
  double time;  // s
  RealField velocity;
};

struct Trajectory {
  std::vector<double> times;      // s
  std::vector<double> positions;  // m
};

/// Integrates dz/dt = u(z, t) with classical RK4, u interpolated linearly in z
/// and t between stored snapshots. Each snapshot interval is split into
/// `substeps` RK4 steps. Throws TrajectoryLost when a stage samples a masked point.
Trajectory trajectory_integrate(const std::vector<VelocitySnapshot>& snapshots, double z_start, std::size_t substeps = 4);

/// Integrates several starting points concurrently; results are in input order.
std::vector<Trajectory> trajectory_bundle(const std::vector<VelocitySnapshot>& snapshots,
                                          const std::vector<double>& starts, std::size_t workers = 0,
                                          std::size_t substeps = 4);

/// max |d rho/dt + d(rho u)/dz| / max |d rho/dt| over valid points with z >= z_lower,
/// using a time-centred flux. Returns 0 when both terms vanish.
double continuity_residual(const MadelungFields& before, const MadelungFields& after, double dt, double z_lower);

}  // namespace qpot

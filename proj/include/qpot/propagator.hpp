#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "qpot/field.hpp"
#include "qpot/potentials.hpp"
#include "qpot/units.hpp"

namespace qpot {

struct EvolveConfig {
  double dt = 1e-7;       // s
  double t_final = 5e-3;  // s
  std::size_t snapshot_stride = 1000;  // steps between density snapshots (0 disables)
  std::size_t record_stride = 1;       // steps between norm samples
  bool store_wavefunctions = false;    // keep the full state at each snapshot
  // Leading steps taken as two backward-Euler half steps each. CN alone never
  // damps the stiff modes seeded by a kink or wall jump; without this the
  // observed dt order is erratic.
  std::size_t startup_steps = 2;

  void validate() const;
  std::size_t steps() const;
};

struct DensitySnapshot {
  double time;  // s
  std::vector<double> density;  // 1/m
};

struct ExperimentRecord {
  Grid1D grid;
  PhysicalParams params;
  std::vector<double> times;  // s
  std::vector<double> norms;  // ||psi(t)||
  std::vector<double> absorbed_fraction;
  std::vector<DensitySnapshot> snapshots;
  std::vector<Wavefunction> states;  // filled when store_wavefunctions is set

  /// Absorbed fraction at the last sample with time <= t (linear interpolation between samples).
  double absorbed_at(double t) const;
};

/// Crank-Nicolson propagator for H = -(hbar^2/2m) d^2/dz^2 + V_real + i V_imag
/// with psi = 0 at both grid ends. The tridiagonal left-hand side is factored
/// once; each advance is a forward/backward sweep. Arithmetic runs in the
/// internal unit system (um, ms, particle mass).
class CrankNicolson {
 public:
  CrankNicolson(const ComplexPotential& potential, const PhysicalParams& params, double dt);

  /// Advances psi in place by one step. Throws NumericsError on non-finite output.
  void advance(std::span<complex> psi);
  /// Backward Euler over dt/2: solves (1 + i dt H / 2 hbar) x = psi. Not unitary.
  void damp(std::span<complex> psi);
  double dt() const { return dt_; }
  const Grid1D& grid() const { return grid_; }

 private:
  Grid1D grid_;
  double dt_;
  complex off_;                 // i tau * offdiag(H)
  std::vector<complex> diag_;   // i tau * diag(H), interior points
  std::vector<complex> upper_;  // factored upper coefficients
  std::vector<complex> pivot_;  // inverse pivots
  std::vector<complex> rhs_;

  void solve_into(std::span<complex> psi);
};

/// One Crank-Nicolson step (dt may be negative).
Wavefunction step(const Wavefunction& psi, const ComplexPotential& potential, const PhysicalParams& params, double dt);

ExperimentRecord evolve(const Wavefunction& psi0, const ComplexPotential& potential, const PhysicalParams& params,
                        const EvolveConfig& config);

/// <psi|H|psi> / <psi|psi> with the discrete Hamiltonian used by the propagator (J).
double energy_expectation(const Wavefunction& psi, const ComplexPotential& potential, const PhysicalParams& params);

struct ConvergenceRow {
  double dt;  // s
  double dz;  // m
  double absorbed;
};

struct ConvergenceReport {
  std::vector<ConvergenceRow> dt_ladder;
  std::vector<ConvergenceRow> dz_ladder;
  double dt_order;  // NaN when differences vanish
  double dz_order;
};

/// Builds the initial state and potential for a grid.
using ProblemFactory = std::function<std::pair<Wavefunction, ComplexPotential>(const Grid1D&)>;

/// Observed order log2(|a1 - a2| / |a2 - a3|) for a ladder refined by halving.
double observed_order(double coarse, double medium, double fine);

/// Runs evolve over dt * {2, 1, 1/2} on the base grid and over three nested
/// grids at the base dt: {2dz, dz, dz/2} when the base grid has an even number
/// of intervals, {dz, dz/2, dz/4} otherwise. Reports absorbed_fraction(t_final)
/// and the observed orders.
ConvergenceReport convergence_report(const ProblemFactory& factory, const Grid1D& base_grid,
                                     const PhysicalParams& params, const EvolveConfig& config,
                                     std::size_t workers = 1);

}  // namespace qpot

#pragma once

#include <vector>

#include "qpot/field.hpp"
#include "qpot/units.hpp"

namespace qpot {

/// Real and imaginary potential samples (J) on a grid.
/// The Hamiltonian term is real_part + i * imag_part with imag_part <= 0.
struct ComplexPotential {
  Grid1D grid;
  std::vector<double> real_part;
  std::vector<double> imag_part;

  explicit ComplexPotential(const Grid1D& g) : grid(g), real_part(g.size(), 0.0), imag_part(g.size(), 0.0) {}
};

/// -C4 / z^4. Throws DomainError for z <= 0.
double casimir_polder(double z, const PhysicalParams& params);

/// Casimir-Polder potential held at its z = delta value on [0, delta).
RealField modified_cp_field(const Grid1D& grid, const PhysicalParams& params);

/// Magnitude of the absorbing potential: a linear ramp from the absorber
/// strength at z = 0 down to zero at z = delta, zero above.
RealField absorber_field(const Grid1D& grid, const PhysicalParams& params);

/// 1/2 m omega^2 (z - z_trap)^2.
RealField harmonic_field(const Grid1D& grid, const PhysicalParams& params);

ComplexPotential total_potential(const Grid1D& grid, const PhysicalParams& params, bool include_trap = true);

}  // namespace qpot

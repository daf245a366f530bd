#include "qpot/potentials.hpp"

#include <algorithm>
#include <cmath>

#include "qpot/errors.hpp"

namespace qpot {

double casimir_polder(double z, const PhysicalParams& params) {
  if (!(z > 0)) throw DomainError("Casimir-Polder potential requires z > 0");
  const double z2 = z * z;
  return -params.c4 / (z2 * z2);
}

RealField modified_cp_field(const Grid1D& grid, const PhysicalParams& params) {
  RealField field(grid);
  const double plateau = casimir_polder(params.delta, params);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double z = grid.z(i);
    field.values[i] = z >= params.delta ? casimir_polder(z, params) : plateau;
  }
  return field;
}

RealField absorber_field(const Grid1D& grid, const PhysicalParams& params) {
  const double strength = params.absorber();
  if (strength < 0) throw ConfigError("absorber_strength must be non-negative");
  RealField field(grid);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double z = grid.z(i);
    if (z < params.delta) field.values[i] = strength * (params.delta - std::max(z, 0.0)) / params.delta;
  }
  return field;
}

RealField harmonic_field(const Grid1D& grid, const PhysicalParams& params) {
  RealField field(grid);
  const double omega = params.trap_omega();
  const double k = 0.5 * params.mass * omega * omega;
  const double centre = params.trap_center();
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double d = grid.z(i) - centre;
    field.values[i] = k * d * d;
  }
  return field;
}

ComplexPotential total_potential(const Grid1D& grid, const PhysicalParams& params, bool include_trap) {
  ComplexPotential v(grid);
  const auto cp = modified_cp_field(grid, params);
  const auto absorber = absorber_field(grid, params);
  v.real_part = cp.values;
  if (include_trap) {
    const auto trap = harmonic_field(grid, params);
    for (std::size_t i = 0; i < grid.size(); ++i) v.real_part[i] += trap.values[i];
  }
  for (std::size_t i = 0; i < grid.size(); ++i) v.imag_part[i] = -absorber.values[i];
  return v;
}

}  // namespace qpot

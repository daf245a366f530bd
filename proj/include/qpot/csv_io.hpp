#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "qpot/bohmian.hpp"
#include "qpot/experiments.hpp"
#include "qpot/field.hpp"
#include "qpot/potentials.hpp"
#include "qpot/propagator.hpp"

namespace qpot {

/// Round-trip-exact decimal text ("%.17g"); NaN prints as "nan".
std::string csv_number(double value);

/// z_um,re_psi,im_psi,density   (psi in m^-1/2, density in 1/m)
void write_packet(std::ostream& out, const Wavefunction& psi);
/// Reads write_packet output. The z column must be uniformly spaced.
Wavefunction read_packet(std::istream& in);

/// z_um,real_J,imag_J
void write_potential(std::ostream& out, const ComplexPotential& potential);
/// z_um,value_J
void write_real_field(std::ostream& out, const RealField& field, const std::string& column);

/// t_ms,norm,absorbed_fraction
void write_record(std::ostream& out, const ExperimentRecord& record);
/// z_um,density for one snapshot
void write_density(std::ostream& out, const Grid1D& grid, const std::vector<double>& density);

/// z_um,rho,rhoQ_over_hbar,rho_residual_over_hbar   (rho in 1/m; weighted columns in 1/(m s))
void write_fig2(std::ostream& out, const WeightedFields& fields, double hbar);

/// t_ms,gaussian_absorbed,engineered_absorbed,ratio   (ratio empty below the floor)
void write_comparison(std::ostream& out, const ComparisonResult& result, double ratio_floor);

/// z0_um,sigma_rule,sigma_um,averaged_ratio,gaussian_absorbed,engineered_absorbed,status,message
void write_sweep(std::ostream& out, const std::vector<SweepRow>& rows);

/// kz0,slope_per_um,fidelity,fidelity_linear_only,imprinted_absorbed,ideal_absorbed,absorption_ratio
void write_preparation(std::ostream& out, const std::vector<PreparationRow>& rows);

/// ladder,dt_ms,dz_um,absorbed_fraction   followed by the observed orders
void write_convergence(std::ostream& out, const ConvergenceReport& report);

}  // namespace qpot

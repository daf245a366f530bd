#include "qpot/csv_io.hpp"

#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>

#include "qpot/errors.hpp"

namespace qpot {

namespace {

double um(double metres) { return metres / kMicrometre; }
double ms(double seconds) { return seconds / kMillisecond; }

std::string quoted(const std::string& text) {
  std::string out = "\"";
  for (char c : text) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

double parse_cell(const std::string& cell, std::size_t line) {
  try {
    std::size_t used = 0;
    const double v = std::stod(cell, &used);
    if (used != cell.size()) throw std::invalid_argument(cell);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("packet CSV line " + std::to_string(line) + ": bad number '" + cell + "'");
  }
}

}  // namespace

std::string csv_number(double value) {
  if (std::isnan(value)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

void write_packet(std::ostream& out, const Wavefunction& psi) {
  out << "z_um,re_psi,im_psi,density\n";
  for (std::size_t i = 0; i < psi.size(); ++i) {
    const complex v = psi.values[i];
    out << csv_number(um(psi.grid.z(i))) << ',' << csv_number(v.real()) << ',' << csv_number(v.imag()) << ','
        << csv_number(std::norm(v)) << '\n';
  }
}

Wavefunction read_packet(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != "z_um,re_psi,im_psi,density")
    throw ConfigError("packet CSV must start with the header z_um,re_psi,im_psi,density");
  std::vector<double> z;
  std::vector<complex> values;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::stringstream row(line);
    std::string cell[4];
    for (auto& c : cell)
      if (!std::getline(row, c, ',')) throw ConfigError("packet CSV line " + std::to_string(line_no) + ": expected 4 columns");
    z.push_back(parse_cell(cell[0], line_no) * kMicrometre);
    values.emplace_back(parse_cell(cell[1], line_no), parse_cell(cell[2], line_no));
  }
  if (z.size() < 2) throw GridError("packet CSV needs at least two rows");
  const Grid1D grid(z.front(), z.back(), z.size());
  for (std::size_t i = 0; i < z.size(); ++i)
    if (std::abs(z[i] - grid.z(i)) > 1e-9 * grid.dz()) throw GridError("packet CSV z column is not uniformly spaced");
  Wavefunction psi(grid);
  psi.values = std::move(values);
  return psi;
}

void write_potential(std::ostream& out, const ComplexPotential& potential) {
  out << "z_um,real_J,imag_J\n";
  for (std::size_t i = 0; i < potential.grid.size(); ++i)
    out << csv_number(um(potential.grid.z(i))) << ',' << csv_number(potential.real_part[i]) << ','
        << csv_number(potential.imag_part[i]) << '\n';
}

void write_real_field(std::ostream& out, const RealField& field, const std::string& column) {
  out << "z_um," << column << '\n';
  for (std::size_t i = 0; i < field.grid.size(); ++i)
    out << csv_number(um(field.grid.z(i))) << ',' << csv_number(field.values[i]) << '\n';
}

void write_record(std::ostream& out, const ExperimentRecord& record) {
  out << "t_ms,norm,absorbed_fraction\n";
  for (std::size_t k = 0; k < record.times.size(); ++k)
    out << csv_number(ms(record.times[k])) << ',' << csv_number(record.norms[k]) << ','
        << csv_number(record.absorbed_fraction[k]) << '\n';
}

void write_density(std::ostream& out, const Grid1D& grid, const std::vector<double>& density) {
  if (density.size() != grid.size()) throw GridError("density does not match grid");
  out << "z_um,density\n";
  for (std::size_t i = 0; i < grid.size(); ++i) out << csv_number(um(grid.z(i))) << ',' << csv_number(density[i]) << '\n';
}

void write_fig2(std::ostream& out, const WeightedFields& fields, double hbar) {
  out << "z_um,rho,rhoQ_over_hbar,rho_residual_over_hbar\n";
  const Grid1D& grid = fields.density.grid;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double rho = fields.density.values[i];
    const bool empty = rho == 0.0;
    const double wq = empty ? 0.0 : fields.weighted_q.values[i] / hbar;
    const double wr = empty ? 0.0 : fields.weighted_residual.values[i] / hbar;
    out << csv_number(um(grid.z(i))) << ',' << csv_number(rho) << ',' << csv_number(wq) << ',' << csv_number(wr)
        << '\n';
  }
}

void write_comparison(std::ostream& out, const ComparisonResult& result, double ratio_floor) {
  out << "t_ms,gaussian_absorbed,engineered_absorbed,ratio\n";
  const auto& t = result.reference.times;
  for (std::size_t k = 0; k < t.size(); ++k) {
    const double a_ref = result.reference.absorbed_fraction[k];
    const double a_cand = result.candidate.absorbed_fraction[k];
    out << csv_number(ms(t[k])) << ',' << csv_number(a_ref) << ',' << csv_number(a_cand) << ',';
    if (a_ref >= ratio_floor && a_cand >= ratio_floor) out << csv_number(a_ref / a_cand);
    out << '\n';
  }
}

void write_sweep(std::ostream& out, const std::vector<SweepRow>& rows) {
  out << "z0_um,sigma_rule,sigma_um,averaged_ratio,gaussian_absorbed,engineered_absorbed,status,message\n";
  for (const auto& r : rows)
    out << csv_number(um(r.z0)) << ',' << r.rule.label() << ',' << csv_number(um(r.sigma)) << ','
        << csv_number(r.averaged_ratio) << ',' << csv_number(r.reference_absorbed) << ','
        << csv_number(r.candidate_absorbed) << ',' << (r.ok ? "ok" : "failed") << ',' << quoted(r.message) << '\n';
}

void write_preparation(std::ostream& out, const std::vector<PreparationRow>& rows) {
  out << "kz0,slope_per_um,fidelity,fidelity_linear_only,imprinted_absorbed,ideal_absorbed,absorption_ratio\n";
  for (const auto& r : rows)
    out << csv_number(r.kz0) << ',' << csv_number(r.slope_k * kMicrometre) << ',' << csv_number(r.fidelity) << ','
        << csv_number(r.fidelity_linear_only) << ',' << csv_number(r.imprinted_absorbed) << ','
        << csv_number(r.ideal_absorbed) << ',' << csv_number(r.absorption_ratio) << '\n';
}

void write_convergence(std::ostream& out, const ConvergenceReport& report) {
  out << "ladder,dt_ms,dz_um,absorbed_fraction\n";
  for (const auto& r : report.dt_ladder)
    out << "dt," << csv_number(ms(r.dt)) << ',' << csv_number(um(r.dz)) << ',' << csv_number(r.absorbed) << '\n';
  for (const auto& r : report.dz_ladder)
    out << "dz," << csv_number(ms(r.dt)) << ',' << csv_number(um(r.dz)) << ',' << csv_number(r.absorbed) << '\n';
  out << "dt_order,,," << csv_number(report.dt_order) << '\n';
  out << "dz_order,,," << csv_number(report.dz_order) << '\n';
}

}  // namespace qpot

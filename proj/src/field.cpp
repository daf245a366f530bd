#include "qpot/field.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "qpot/errors.hpp"

namespace qpot {

Wavefunction::Wavefunction(const Grid1D& g, std::vector<complex> v) : grid(g), values(std::move(v)) {
  if (values.size() != grid.size()) throw GridError("wavefunction size does not match grid");
}

double Wavefunction::norm_squared() const { return trapezoid(density(), grid.dz()); }

double Wavefunction::norm() const { return std::sqrt(norm_squared()); }

std::vector<double> Wavefunction::density() const {
  std::vector<double> rho(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) rho[i] = std::norm(values[i]);
  return rho;
}

RealField::RealField(const Grid1D& g, std::vector<double> v)
    : grid(g), values(std::move(v)), valid(grid.size(), true) {
  if (values.size() != grid.size()) throw GridError("field size does not match grid");
}

std::size_t RealField::valid_count() const {
  std::size_t n = 0;
  for (bool v : valid) n += v ? 1 : 0;
  return n;
}

void RealField::invalidate(std::size_t i) {
  valid[i] = false;
  values[i] = std::numeric_limits<double>::quiet_NaN();
}

Wavefunction normalize(const Wavefunction& psi) {
  const double n2 = psi.norm_squared();
  if (!(n2 > 0) || !std::isfinite(n2)) throw NormalizationError("cannot normalize a state with zero norm");
  Wavefunction out = psi;
  const double scale = 1.0 / std::sqrt(n2);
  for (auto& v : out.values) v *= scale;
  return out;
}

Moments moments(const Wavefunction& psi) {
  const auto rho = psi.density();
  const double dz = psi.grid.dz();
  const double n2 = trapezoid(rho, dz);
  if (!(n2 > 0)) throw NormalizationError("moments of a zero-norm state");
  std::vector<double> w1(rho.size()), w2(rho.size());
  for (std::size_t i = 0; i < rho.size(); ++i) {
    const double z = psi.grid.z(i);
    w1[i] = z * rho[i];
    w2[i] = z * z * rho[i];
  }
  const double mean = trapezoid(w1, dz) / n2;
  const double var = trapezoid(w2, dz) / n2 - mean * mean;
  return {mean, std::sqrt(std::max(var, 0.0)), std::sqrt(n2)};
}

void require_same_grid(const Grid1D& a, const Grid1D& b) {
  if (!(a == b)) throw GridError("fields live on different grids");
}

complex overlap(const Wavefunction& a, const Wavefunction& b) {
  require_same_grid(a.grid, b.grid);
  const std::size_t n = a.size();
  complex sum = 0.5 * (std::conj(a.values[0]) * b.values[0] + std::conj(a.values[n - 1]) * b.values[n - 1]);
  for (std::size_t i = 1; i + 1 < n; ++i) sum += std::conj(a.values[i]) * b.values[i];
  return sum * a.grid.dz();
}

}  // namespace qpot

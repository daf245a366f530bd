#pragma once

#include <complex>
#include <vector>

#include "qpot/grid.hpp"

namespace qpot {

using complex = std::complex<double>;

/// Complex amplitude samples (units m^-1/2) on a Grid1D.
struct Wavefunction {
  Grid1D grid;
  std::vector<complex> values;

  explicit Wavefunction(const Grid1D& g) : grid(g), values(g.size()) {}
  Wavefunction(const Grid1D& g, std::vector<complex> v);

  std::size_t size() const { return values.size(); }
  /// Integral of |psi|^2 by the trapezoid rule.
  double norm_squared() const;
  double norm() const;
  std::vector<double> density() const;
};

/// Real samples on a Grid1D with a per-point validity mask.
/// Invalid points hold NaN and must not be read as data.
struct RealField {
  Grid1D grid;
  std::vector<double> values;
  std::vector<bool> valid;

  explicit RealField(const Grid1D& g) : grid(g), values(g.size(), 0.0), valid(g.size(), true) {}
  RealField(const Grid1D& g, std::vector<double> v);

  std::size_t size() const { return values.size(); }
  std::size_t valid_count() const;
  void invalidate(std::size_t i);
};

/// Quantum potential samples (J per particle) with node-exclusion mask.
using QField = RealField;

struct Moments {
  double mean;  // m
  double std;   // m
  double norm;  // sqrt of the integrated density
};

/// Rescales psi to unit trapezoid norm. Throws NormalizationError on zero norm.
Wavefunction normalize(const Wavefunction& psi);

Moments moments(const Wavefunction& psi);

/// <psi_a|psi_b> by the trapezoid rule. Throws GridError on grid mismatch.
complex overlap(const Wavefunction& a, const Wavefunction& b);

void require_same_grid(const Grid1D& a, const Grid1D& b);

}  // namespace qpot

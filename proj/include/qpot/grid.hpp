#pragma once

#include <cstddef>
#include <span>

#include "qpot/units.hpp"

namespace qpot {

/// Uniform grid on [z_min, z_max] (metres) with n_points samples, endpoints included.
class Grid1D {
 public:
  Grid1D(double z_max, std::size_t n_points);
  Grid1D(double z_min, double z_max, std::size_t n_points);

  /// z_max >= max(10 um, z0 + 6 sigma), spacing about 2.5 nm with delta an even
  /// number of intervals from the wall (4001 points for the defaults).
  static Grid1D default_for(const PhysicalParams& params);

  double z_min() const { return z_min_; }
  double z_max() const { return z_max_; }
  std::size_t size() const { return n_; }
  double dz() const { return dz_; }
  double z(std::size_t i) const { return z_min_ + static_cast<double>(i) * dz_; }

  /// Index of the grid point closest to z, clamped to the grid.
  std::size_t nearest_index(double z) const;

  /// Same interval, spacing halved (nested: every old point is kept).
  Grid1D refined() const;
  /// Same interval, spacing doubled. Requires an odd number of points.
  Grid1D coarsened() const;

  /// True when dz is at most a tenth of the profile wavelength at z = delta.
  bool resolves_profile(const PhysicalParams& params) const;

  bool operator==(const Grid1D& other) const = default;

 private:
  double z_min_;
  double z_max_;
  std::size_t n_;
  double dz_;
};

/// Trapezoid-rule integral of uniformly spaced samples.
double trapezoid(std::span<const double> values, double dz);

}  // namespace qpot

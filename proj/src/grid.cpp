#include "qpot/grid.hpp"

#include <algorithm>
#include <cmath>

#include "qpot/errors.hpp"

namespace qpot {

namespace {
constexpr double kDefaultExtent = 10e-6;
constexpr double kTargetSpacing = 2.5e-9;
}  // namespace

Grid1D::Grid1D(double z_max, std::size_t n_points) : Grid1D(0.0, z_max, n_points) {}

Grid1D::Grid1D(double z_min, double z_max, std::size_t n_points)
    : z_min_(z_min), z_max_(z_max), n_(n_points) {
  if (n_points < 2) throw GridError("grid needs at least two points");
  if (!(z_max > z_min)) throw GridError("grid requires z_max > z_min");
  dz_ = (z_max - z_min) / static_cast<double>(n_points - 1);
}

Grid1D Grid1D::default_for(const PhysicalParams& params) {
  // delta sits on a node of this grid and of its halved and doubled versions:
  // the plateau and absorber kinks there would otherwise spoil second-order
  // convergence in dz.
  auto per_delta = static_cast<std::size_t>(std::ceil(params.delta / kTargetSpacing - 1e-9));
  per_delta += per_delta % 2;
  const double spacing = params.delta / static_cast<double>(per_delta);
  const double extent = std::max(kDefaultExtent, params.z0 + 6.0 * params.sigma);
  auto intervals = static_cast<std::size_t>(std::ceil(extent / spacing - 1e-9));
  intervals += intervals % 2;
  return Grid1D(0.0, static_cast<double>(intervals) * spacing, intervals + 1);
}

std::size_t Grid1D::nearest_index(double z) const {
  const double s = std::round((z - z_min_) / dz_);
  if (s <= 0) return 0;
  return std::min(static_cast<std::size_t>(s), n_ - 1);
}

Grid1D Grid1D::refined() const { return Grid1D(z_min_, z_max_, 2 * (n_ - 1) + 1); }

Grid1D Grid1D::coarsened() const {
  if ((n_ - 1) % 2 != 0) throw GridError("coarsening needs an even number of intervals");
  return Grid1D(z_min_, z_max_, (n_ - 1) / 2 + 1);
}

bool Grid1D::resolves_profile(const PhysicalParams& params) const {
  return dz_ <= params.profile_wavelength(params.delta) / 10.0;
}

double trapezoid(std::span<const double> values, double dz) {
  if (values.size() < 2) return 0.0;
  double sum = 0.5 * (values.front() + values.back());
  for (std::size_t i = 1; i + 1 < values.size(); ++i) sum += values[i];
  return sum * dz;
}

}  // namespace qpot

#include "qpot/bohmian.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <numbers>
#include <thread>

#include "qpot/errors.hpp"
#include "qpot/potentials.hpp"

namespace qpot {

namespace {

constexpr std::size_t kGuardBand = 2;

double second_difference(const std::vector<double>& f, std::size_t i, double h, Stencil stencil) {
  const double d1 = (f[i + 1] - 2.0 * f[i] + f[i - 1]) / (h * h);
  if (stencil == Stencil::central3) return d1;
  const double d2 = (f[i + 2] - 2.0 * f[i] + f[i - 2]) / (4.0 * h * h);
  return (4.0 * d1 - d2) / 3.0;
}

std::size_t stencil_reach(Stencil stencil) { return stencil == Stencil::central3 ? 1 : 2; }

double wrap_angle(double x) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  x = std::fmod(x + std::numbers::pi, two_pi);
  if (x < 0) x += two_pi;
  return x - std::numbers::pi;
}

}  // namespace

MadelungFields madelung_decompose(const Wavefunction& psi, double mass, double hbar, double density_floor) {
  const Grid1D& grid = psi.grid;
  const std::size_t n = grid.size();
  MadelungFields out{RealField(grid, psi.density()), RealField(grid), RealField(grid)};
  const double rho_max = *std::max_element(out.density.values.begin(), out.density.values.end());
  const double cutoff = density_floor * rho_max;

  bool started = false;
  double previous_raw = 0.0;
  double unwrapped = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!(out.density.values[i] > cutoff) || rho_max <= 0) {
      out.phase.invalidate(i);
      continue;
    }
    const double raw = std::arg(psi.values[i]);
    unwrapped = started ? unwrapped + wrap_angle(raw - previous_raw) : raw;
    started = true;
    previous_raw = raw;
    out.phase.values[i] = hbar * unwrapped;
  }

  const double dz = grid.dz();
  for (std::size_t i = 0; i < n; ++i) {
    if (i == 0 || i + 1 == n || !out.phase.valid[i]) {
      out.velocity.invalidate(i);
      continue;
    }
    const complex slope = (psi.values[i + 1] - psi.values[i - 1]) / (2.0 * dz);
    const double current = std::imag(std::conj(psi.values[i]) * slope);
    out.velocity.values[i] = hbar / mass * current / out.density.values[i];
  }
  return out;
}

QField quantum_potential(const RealField& rho, double mass, double hbar, Stencil stencil, double amplitude_floor) {
  const std::size_t n = rho.size();
  const double h = rho.grid.dz();
  std::vector<double> amp(n);
  for (std::size_t i = 0; i < n; ++i) amp[i] = std::sqrt(std::max(rho.values[i], 0.0));
  const double amp_max = *std::max_element(amp.begin(), amp.end());

  std::vector<bool> seed(n, false);
  for (std::size_t i = 0; i < n; ++i) {
    if (!rho.valid[i] || !(amp[i] >= amplitude_floor * amp_max) || amp_max <= 0) seed[i] = true;
  }
  // |signed amplitude| has a kink at a node between grid points: a sharp local minimum.
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const double side = 0.5 * (amp[i - 1] + amp[i + 1]);
    if (amp[i] <= amp[i - 1] && amp[i] <= amp[i + 1] && amp[i] < 0.75 * side) seed[i] = true;
  }

  QField q(rho.grid);
  const std::size_t reach = stencil_reach(stencil);
  const double prefactor = -hbar * hbar / (2.0 * mass);
  std::size_t last_seed = std::numeric_limits<std::size_t>::max();
  std::vector<std::size_t> distance(n, std::numeric_limits<std::size_t>::max());
  for (std::size_t i = 0; i < n; ++i) {
    if (seed[i]) last_seed = i;
    if (last_seed != std::numeric_limits<std::size_t>::max()) distance[i] = i - last_seed;
  }
  last_seed = std::numeric_limits<std::size_t>::max();
  for (std::size_t k = n; k-- > 0;) {
    if (seed[k]) last_seed = k;
    if (last_seed != std::numeric_limits<std::size_t>::max()) distance[k] = std::min(distance[k], last_seed - k);
  }

  for (std::size_t i = 0; i < n; ++i) {
    const bool has_stencil = i >= reach && i + reach < n;
    if (!has_stencil || distance[i] <= kGuardBand) {
      q.invalidate(i);
      continue;
    }
    q.values[i] = prefactor * second_difference(amp, i, h, stencil) / amp[i];
  }
  if (q.valid_count() == 0) throw EmptyFieldError("quantum potential: every grid point is masked");
  return q;
}

double residual_potential(double z, const PhysicalParams& params, const ProfileSpec& spec) {
  const auto [alpha, dalpha] = profile_bracket(z, params, spec);
  if (std::abs(alpha) < 1e-6 * std::hypot(spec.c1, spec.c2))
    throw NodeSingularity("residual potential evaluated at a node of the engineered profile");
  const double log_slope = 1.0 / z + dalpha / alpha;  // P'/P
  const double u = z - spec.z0;
  const double s2 = spec.sigma * spec.sigma;
  const double scale = params.hbar * params.hbar / (4.0 * params.mass * s2);
  return scale * (1.0 + 2.0 * u * log_slope - u * u / (2.0 * s2));
}

double residual_potential_expanded(double z, const PhysicalParams& params, const ProfileSpec& spec, double zeta) {
  const auto [alpha, dalpha] = profile_bracket(z, params, spec);
  if (std::abs(alpha) < 1e-6 * std::hypot(spec.c1, spec.c2))
    throw NodeSingularity("residual potential evaluated at a node of the engineered profile");
  if (zeta <= 0) zeta = 4.0 * spec.sigma * spec.sigma;
  const double u = z - spec.z0;
  const double bracket = (-6.0 + 4.0 * spec.z0 / z - 4.0 * u * dalpha / alpha) / zeta + 4.0 * u * u / (zeta * zeta);
  return -params.hbar * params.hbar / (2.0 * params.mass) * bracket;
}

WeightedFields weighted_fields(const Grid1D& grid, const PhysicalParams& params, const ProfileSpec& spec) {
  const Wavefunction psi = engineered_packet(grid, params, spec);
  const std::size_t n = grid.size();
  // The packet is real, so rho Q = -(hbar^2/2m) psi psi'' with the signed
  // amplitude; this stays finite through the nodes of P.
  std::vector<double> amp(n);
  for (std::size_t i = 0; i < n; ++i) amp[i] = psi.values[i].real();

  WeightedFields out{RealField(grid), RealField(grid), RealField(grid, psi.density())};
  const double prefactor = -params.hbar * params.hbar / (2.0 * params.mass);
  const double h = grid.dz();
  for (std::size_t i = 0; i < n; ++i) {
    if (i == 0 || i + 1 == n) {
      out.weighted_q.values[i] = 0.0;
      out.weighted_residual.values[i] = 0.0;
      continue;
    }
    const Stencil stencil = (i >= 2 && i + 2 < n) ? Stencil::richardson : Stencil::central3;
    const double wq = prefactor * amp[i] * second_difference(amp, i, h, stencil);
    const double z = grid.z(i);
    out.weighted_q.values[i] = wq;
    out.weighted_residual.values[i] = z > 0 ? wq + out.density.values[i] * casimir_polder(z, params) : 0.0;
  }
  return out;
}

WeightedPeaks weighted_peaks(const WeightedFields& fields, const PhysicalParams& params, double support_floor) {
  const auto& rho = fields.density.values;
  const double rho_max = *std::max_element(rho.begin(), rho.end());
  WeightedPeaks peaks{0.0, 0.0};
  for (std::size_t i = 0; i < rho.size(); ++i) {
    if (fields.density.grid.z(i) < params.delta || rho[i] < support_floor * rho_max) continue;
    if (fields.weighted_q.valid[i]) peaks.weighted_q = std::max(peaks.weighted_q, std::abs(fields.weighted_q.values[i]));
    if (fields.weighted_residual.valid[i])
      peaks.weighted_residual = std::max(peaks.weighted_residual, std::abs(fields.weighted_residual.values[i]));
  }
  return peaks;
}

namespace {

double sample_velocity(const RealField& u, double z, double t) {
  const Grid1D& g = u.grid;
  const double s = (z - g.z_min()) / g.dz();
  if (!(s >= 0) || !(s <= static_cast<double>(g.size() - 1))) throw TrajectoryLost(t, "trajectory left the grid");
  auto j = static_cast<std::size_t>(std::floor(s));
  if (j + 1 >= g.size()) j = g.size() - 2;
  const double f = s - static_cast<double>(j);
  if (!u.valid[j] || !u.valid[j + 1]) throw TrajectoryLost(t, "trajectory entered a masked region");
  return (1.0 - f) * u.values[j] + f * u.values[j + 1];
}

double interval_velocity(const VelocitySnapshot& a, const VelocitySnapshot& b, double z, double t) {
  const double w = (t - a.time) / (b.time - a.time);
  return (1.0 - w) * sample_velocity(a.velocity, z, t) + w * sample_velocity(b.velocity, z, t);
}

}  // namespace

Trajectory trajectory_integrate(const std::vector<VelocitySnapshot>& snapshots, double z_start, std::size_t substeps) {
  if (snapshots.size() < 2) throw ConfigError("trajectory integration needs at least two snapshots");
  if (substeps == 0) substeps = 1;
  Trajectory path;
  double z = z_start;
  path.times.push_back(snapshots.front().time);
  path.positions.push_back(z);
  sample_velocity(snapshots.front().velocity, z, snapshots.front().time);
  for (std::size_t k = 0; k + 1 < snapshots.size(); ++k) {
    const auto& a = snapshots[k];
    const auto& b = snapshots[k + 1];
    if (!(b.time > a.time)) throw ConfigError("velocity snapshots must be strictly increasing in time");
    const double h = (b.time - a.time) / static_cast<double>(substeps);
    for (std::size_t s = 0; s < substeps; ++s) {
      const double t = a.time + static_cast<double>(s) * h;
      const double k1 = interval_velocity(a, b, z, t);
      const double k2 = interval_velocity(a, b, z + 0.5 * h * k1, t + 0.5 * h);
      const double k3 = interval_velocity(a, b, z + 0.5 * h * k2, t + 0.5 * h);
      const double k4 = interval_velocity(a, b, z + h * k3, t + h);
      z += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
      path.times.push_back(s + 1 == substeps ? b.time : t + h);
      path.positions.push_back(z);
    }
  }
  return path;
}

std::vector<Trajectory> trajectory_bundle(const std::vector<VelocitySnapshot>& snapshots,
                                          const std::vector<double>& starts, std::size_t workers,
                                          std::size_t substeps) {
  std::vector<Trajectory> paths(starts.size());
  std::vector<std::exception_ptr> errors(starts.size());
  if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
  workers = std::min(workers, std::max<std::size_t>(starts.size(), 1));
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < starts.size(); i = next++) {
      try {
        paths[i] = trajectory_integrate(snapshots, starts[i], substeps);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  {
    std::vector<std::jthread> pool;
    for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(worker);
    worker();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return paths;
}

double continuity_residual(const MadelungFields& before, const MadelungFields& after, double dt, double z_lower) {
  require_same_grid(before.density.grid, after.density.grid);
  const Grid1D& g = before.density.grid;
  const std::size_t n = g.size();
  const auto flux = [](const MadelungFields& f, std::size_t i) {
    return f.velocity.valid[i] ? f.density.values[i] * f.velocity.values[i] : 0.0;
  };
  double rho_max = 0.0;
  for (std::size_t i = 0; i < n; ++i) rho_max = std::max(rho_max, before.density.values[i]);

  double max_rate = 0.0;
  double max_residual = 0.0;
  for (std::size_t i = 1; i + 1 < n; ++i) {
    if (g.z(i) < z_lower) continue;
    if (!before.velocity.valid[i] || !after.velocity.valid[i]) continue;
    const double rate = (after.density.values[i] - before.density.values[i]) / dt;
    const double j_plus = 0.5 * (flux(before, i + 1) + flux(after, i + 1));
    const double j_minus = 0.5 * (flux(before, i - 1) + flux(after, i - 1));
    const double divergence = (j_plus - j_minus) / (2.0 * g.dz());
    max_rate = std::max(max_rate, std::abs(rate));
    max_residual = std::max(max_residual, std::abs(rate + divergence));
  }
  // Floor: density change at the 1e-10 level per step is below resolution.
  const double scale = std::max(max_rate, 1e-10 * rho_max / std::abs(dt));
  return scale > 0 ? max_residual / scale : 0.0;
}

}  // namespace qpot

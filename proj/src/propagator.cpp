#include "qpot/propagator.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>

#include "qpot/errors.hpp"

namespace qpot {

void EvolveConfig::validate() const {
  if (!(dt > 0)) throw ConfigError("dt must be positive");
  if (!(t_final >= dt)) throw ConfigError("t_final must be at least dt");
  if (record_stride == 0) throw ConfigError("record_stride must be at least 1");
}

std::size_t EvolveConfig::steps() const { return static_cast<std::size_t>(std::llround(t_final / dt)); }

double ExperimentRecord::absorbed_at(double t) const {
  if (times.empty()) return 0.0;
  if (t <= times.front()) return absorbed_fraction.front();
  if (t >= times.back()) return absorbed_fraction.back();
  const auto it = std::upper_bound(times.begin(), times.end(), t);
  const std::size_t k = static_cast<std::size_t>(it - times.begin());
  const double w = (t - times[k - 1]) / (times[k] - times[k - 1]);
  return (1.0 - w) * absorbed_fraction[k - 1] + w * absorbed_fraction[k];
}

CrankNicolson::CrankNicolson(const ComplexPotential& potential, const PhysicalParams& params, double dt)
    : grid_(potential.grid), dt_(dt) {
  const std::size_t n = grid_.size();
  if (n < 3) throw GridError("propagation needs at least one interior grid point");
  const UnitScale scale = UnitScale::for_params(params);
  const double hbar = scale.hbar_internal(params.hbar);
  const double mass = scale.mass_to_internal(params.mass);
  const double dz = scale.length_to_internal(grid_.dz());
  const double tau = scale.time_to_internal(dt) / (2.0 * hbar);
  const double kinetic = hbar * hbar / (2.0 * mass * dz * dz);
  const complex i_tau(0.0, tau);

  const std::size_t m = n - 2;
  off_ = i_tau * (-kinetic);
  diag_.resize(m);
  for (std::size_t k = 0; k < m; ++k) {
    const complex v(scale.energy_to_internal(potential.real_part[k + 1]),
                    scale.energy_to_internal(potential.imag_part[k + 1]));
    diag_[k] = i_tau * (2.0 * kinetic + v);
  }

  // LU factorization of (1 + i tau H) for the Thomas sweep.
  upper_.resize(m);
  pivot_.resize(m);
  complex previous_upper = 0.0;
  for (std::size_t k = 0; k < m; ++k) {
    const complex denom = 1.0 + diag_[k] - (k > 0 ? off_ * previous_upper : complex(0.0));
    if (std::abs(denom) == 0.0) throw NumericsError("singular Crank-Nicolson system");
    pivot_[k] = 1.0 / denom;
    upper_[k] = off_ * pivot_[k];
    previous_upper = upper_[k];
  }
  rhs_.resize(m);
}

void CrankNicolson::advance(std::span<complex> psi) {
  const std::size_t n = grid_.size();
  if (psi.size() != n) throw GridError("state size does not match propagator grid");
  psi[0] = 0.0;
  psi[n - 1] = 0.0;
  const std::size_t m = n - 2;
  for (std::size_t k = 0; k < m; ++k) {
    const std::size_t j = k + 1;
    rhs_[k] = (1.0 - diag_[k]) * psi[j] - off_ * (psi[j - 1] + psi[j + 1]);
  }
  solve_into(psi);
}

void CrankNicolson::damp(std::span<complex> psi) {
  const std::size_t n = grid_.size();
  if (psi.size() != n) throw GridError("state size does not match propagator grid");
  psi[0] = 0.0;
  psi[n - 1] = 0.0;
  for (std::size_t k = 0; k + 2 < n; ++k) rhs_[k] = psi[k + 1];
  solve_into(psi);
}

void CrankNicolson::solve_into(std::span<complex> psi) {
  const std::size_t m = grid_.size() - 2;
  // Forward sweep then back substitution.
  rhs_[0] *= pivot_[0];
  for (std::size_t k = 1; k < m; ++k) rhs_[k] = (rhs_[k] - off_ * rhs_[k - 1]) * pivot_[k];
  for (std::size_t k = m - 1; k-- > 0;) rhs_[k] -= upper_[k] * rhs_[k + 1];

  double check = 0.0;
  for (std::size_t k = 0; k < m; ++k) {
    psi[k + 1] = rhs_[k];
    check += std::norm(rhs_[k]);
  }
  if (!std::isfinite(check)) throw NumericsError("Crank-Nicolson step produced non-finite values");
}

Wavefunction step(const Wavefunction& psi, const ComplexPotential& potential, const PhysicalParams& params, double dt) {
  require_same_grid(psi.grid, potential.grid);
  CrankNicolson stepper(potential, params, dt);
  Wavefunction out = psi;
  stepper.advance(out.values);
  return out;
}

ExperimentRecord evolve(const Wavefunction& psi0, const ComplexPotential& potential, const PhysicalParams& params,
                        const EvolveConfig& config) {
  config.validate();
  require_same_grid(psi0.grid, potential.grid);
  CrankNicolson stepper(potential, params, config.dt);

  Wavefunction psi = psi0;
  psi.values.front() = 0.0;
  psi.values.back() = 0.0;
  const double initial = psi.norm_squared();
  if (!(initial > 0)) throw NormalizationError("cannot evolve a zero-norm state");

  ExperimentRecord record{psi0.grid, params, {}, {}, {}, {}, {}};
  const std::size_t steps = config.steps();
  const auto sample = [&](std::size_t k) {
    const double t = static_cast<double>(k) * config.dt;
    const double n2 = psi.norm_squared();
    record.times.push_back(t);
    record.norms.push_back(std::sqrt(n2 / initial));
    record.absorbed_fraction.push_back(std::clamp(1.0 - n2 / initial, 0.0, 1.0));
  };
  const auto snapshot = [&](std::size_t k) {
    const double t = static_cast<double>(k) * config.dt;
    record.snapshots.push_back({t, psi.density()});
    if (config.store_wavefunctions) record.states.push_back(psi);
  };

  record.times.reserve(steps / config.record_stride + 2);
  sample(0);
  if (config.snapshot_stride > 0) snapshot(0);
  for (std::size_t k = 1; k <= steps; ++k) {
    if (k <= config.startup_steps) {
      stepper.damp(psi.values);
      stepper.damp(psi.values);
    } else {
      stepper.advance(psi.values);
    }
    if (k % config.record_stride == 0 || k == steps) sample(k);
    if (config.snapshot_stride > 0 && k % config.snapshot_stride == 0) snapshot(k);
  }
  return record;
}

double energy_expectation(const Wavefunction& psi, const ComplexPotential& potential, const PhysicalParams& params) {
  require_same_grid(psi.grid, potential.grid);
  const std::size_t n = psi.size();
  const double dz = psi.grid.dz();
  const double kinetic = params.hbar * params.hbar / (2.0 * params.mass * dz * dz);
  complex numerator = 0.0;
  double denominator = 0.0;
  for (std::size_t j = 1; j + 1 < n; ++j) {
    const complex v(potential.real_part[j], potential.imag_part[j]);
    const complex h_psi = (2.0 * kinetic + v) * psi.values[j] - kinetic * (psi.values[j - 1] + psi.values[j + 1]);
    numerator += std::conj(psi.values[j]) * h_psi;
    denominator += std::norm(psi.values[j]);
  }
  if (!(denominator > 0)) throw NormalizationError("energy of a zero-norm state");
  return numerator.real() / denominator;
}

double observed_order(double coarse, double medium, double fine) {
  const double d1 = std::abs(coarse - medium);
  const double d2 = std::abs(medium - fine);
  if (!(d1 > 0) || !(d2 > 0)) return std::numeric_limits<double>::quiet_NaN();
  return std::log2(d1 / d2);
}

ConvergenceReport convergence_report(const ProblemFactory& factory, const Grid1D& base_grid,
                                     const PhysicalParams& params, const EvolveConfig& config, std::size_t workers) {
  struct Job {
    Grid1D grid;
    double dt;
  };
  // Nested dz ladder: {2dz, dz, dz/2} when the base grid can be coarsened,
  // otherwise {dz, dz/2, dz/4}.
  const bool can_coarsen = (base_grid.size() - 1) % 2 == 0;
  const Grid1D dz_coarse = can_coarsen ? base_grid.coarsened() : base_grid;
  const Grid1D dz_medium = can_coarsen ? base_grid : base_grid.refined();
  const Grid1D dz_fine = dz_medium.refined();
  const std::vector<Job> jobs{
      {base_grid, 2.0 * config.dt}, {base_grid, config.dt}, {base_grid, 0.5 * config.dt},
      {dz_coarse, config.dt},       {dz_medium, config.dt}, {dz_fine, config.dt},
  };
  const auto run = [&](const Job& job) {
    auto [psi, potential] = factory(job.grid);
    EvolveConfig cfg = config;
    cfg.dt = job.dt;
    cfg.snapshot_stride = 0;
    cfg.store_wavefunctions = false;
    cfg.record_stride = cfg.steps();
    return evolve(psi, potential, params, cfg).absorbed_fraction.back();
  };

  std::vector<double> results(jobs.size());
  if (workers <= 1) {
    for (std::size_t i = 0; i < jobs.size(); ++i) results[i] = run(jobs[i]);
  } else {
    std::vector<std::future<double>> futures;
    for (const auto& job : jobs) futures.push_back(std::async(std::launch::async, run, job));
    for (std::size_t i = 0; i < jobs.size(); ++i) results[i] = futures[i].get();
  }

  ConvergenceReport report;
  const double dz = base_grid.dz();
  report.dt_ladder = {{2.0 * config.dt, dz, results[0]}, {config.dt, dz, results[1]}, {0.5 * config.dt, dz, results[2]}};
  report.dz_ladder = {{config.dt, dz_coarse.dz(), results[3]},
                      {config.dt, dz_medium.dz(), results[4]},
                      {config.dt, dz_fine.dz(), results[5]}};
  report.dt_order = observed_order(results[0], results[1], results[2]);
  report.dz_order = observed_order(results[3], results[4], results[5]);
  return report;
}

}  // namespace qpot

#include "qpot/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <future>
#include <limits>
#include <sstream>
#include <thread>

#include "qpot/errors.hpp"

namespace qpot {

namespace {

/// Runs body(i) for i in [0, count) on up to `workers` threads.
template <typename Body>
void parallel_for(std::size_t count, std::size_t workers, Body&& body) {
  if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
  workers = std::min(workers, std::max<std::size_t>(count, 1));
  std::atomic<std::size_t> next{0};
  auto drain = [&] {
    for (std::size_t i = next++; i < count; i = next++) body(i);
  };
  std::vector<std::jthread> pool;
  for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(drain);
  drain();
}

ExperimentRecord run_packet(const Wavefunction& psi, const ComplexPotential& potential, const PhysicalParams& params,
                            const EvolveConfig& evolve_config) {
  return evolve(psi, potential, params, evolve_config);
}

ProfileSpec profile_for(const PhysicalParams& params, const ExperimentConfig& config) {
  return ProfileSpec::from(params, config.use_abs);
}

}  // namespace

Grid1D ExperimentConfig::grid_for(const PhysicalParams& params) const {
  return grid ? *grid : Grid1D::default_for(params);
}

ComparisonResult compare_records(ExperimentRecord reference, ExperimentRecord candidate,
                                 const ExperimentConfig& config) {
  if (reference.times.size() != candidate.times.size())
    throw ConfigError("compared records must share their sampling times");
  ComparisonResult out{std::move(reference), std::move(candidate), {}, std::numeric_limits<double>::quiet_NaN(),
                       std::nullopt, std::nullopt};
  const auto& times = out.reference.times;
  const auto& a_ref = out.reference.absorbed_fraction;
  const auto& a_cand = out.candidate.absorbed_fraction;

  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t k = 0; k < times.size(); ++k) {
    if (a_ref[k] < config.ratio_floor || a_cand[k] < config.ratio_floor) continue;
    const double ratio = a_ref[k] / a_cand[k];
    out.ratio_series.push_back({times[k], ratio});
    if (times[k] <= config.average_window * (1.0 + 1e-12)) {
      sum += ratio;
      ++count;
    }
    if (!out.crossover_time && ratio <= 1.0) out.crossover_time = times[k];
  }
  if (count > 0) out.averaged_ratio = sum / static_cast<double>(count);

  if (times.size() >= 2) {
    const double spacing = times[1] - times[0];
    const auto stride = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(config.rate_window / spacing)));
    for (std::size_t k = stride; k < times.size(); k += stride) {
      const double rate_ref = a_ref[k] - a_ref[k - stride];
      const double rate_cand = a_cand[k] - a_cand[k - stride];
      if (rate_cand > 0 && rate_ref <= rate_cand) {
        out.rate_crossover_time = 0.5 * (times[k] + times[k - stride]);
        break;
      }
    }
  }
  return out;
}

ComparisonResult compare_packets(const Wavefunction& reference, const Wavefunction& candidate,
                                 const ComplexPotential& potential, const PhysicalParams& params,
                                 const ExperimentConfig& config) {
  auto future = std::async(std::launch::async, run_packet, std::cref(reference), std::cref(potential),
                           std::cref(params), std::cref(config.evolve));
  ExperimentRecord cand = run_packet(candidate, potential, params, config.evolve);
  ExperimentRecord ref = future.get();
  return compare_records(std::move(ref), std::move(cand), config);
}

ComparisonResult run_comparison(const PhysicalParams& params, const ExperimentConfig& config) {
  params.validate();
  const Grid1D grid = config.grid_for(params);
  const auto potential = total_potential(grid, params, config.include_trap);
  const auto engineered = engineered_packet(grid, params, profile_for(params, config));
  const auto gaussian = gaussian_packet(grid, params.z0, params.sigma);
  return compare_packets(gaussian, engineered, potential, params, config);
}

std::string SigmaRule::label() const {
  std::ostringstream os;
  os.precision(6);
  if (kind == Kind::ratio)
    os << "ratio:" << value;
  else
    os << "fixed:" << value / kMicrometre << "um";
  return os.str();
}

void SweepSpec::validate(const PhysicalParams& params) const {
  if (z0_values.empty()) throw ConfigError("sweep needs at least one z0 value");
  if (sigma_rules.empty()) throw ConfigError("sweep needs at least one sigma rule");
  for (double z0 : z0_values)
    if (!(z0 > params.delta)) throw ConfigError("sweep z0 values must lie above delta");
  for (const auto& rule : sigma_rules) {
    if (rule.kind == SigmaRule::Kind::ratio && !(rule.value > 0 && rule.value <= 1))
      throw ConfigError("sigma ratio must lie in (0, 1]");
    if (rule.kind == SigmaRule::Kind::fixed && !(rule.value > 0)) throw ConfigError("fixed sigma must be positive");
  }
  if (!(window > 0)) throw ConfigError("sweep window must be positive");
}

std::vector<SweepRow> run_sweep(const PhysicalParams& base, const SweepSpec& sweep, const ExperimentConfig& config,
                                std::size_t workers) {
  sweep.validate(base);
  std::vector<double> z0s = sweep.z0_values;
  std::stable_sort(z0s.begin(), z0s.end());
  const std::size_t n_rules = sweep.sigma_rules.size();
  std::vector<SweepRow> rows(z0s.size() * n_rules);

  ExperimentConfig job_config = config;
  job_config.evolve.t_final = sweep.window;
  job_config.average_window = sweep.window;

  parallel_for(rows.size(), workers, [&](std::size_t index) {
    const double z0 = z0s[index / n_rules];
    const SigmaRule& rule = sweep.sigma_rules[index % n_rules];
    SweepRow& row = rows[index];
    row = SweepRow{z0, rule, rule.sigma_for(z0), std::numeric_limits<double>::quiet_NaN(), 0.0, 0.0, false, ""};
    try {
      const PhysicalParams params = base.with_envelope(z0, row.sigma);
      params.validate();
      const Grid1D grid = job_config.grid_for(params);
      const auto potential = total_potential(grid, params, job_config.include_trap);
      const auto engineered = engineered_packet(grid, params, profile_for(params, job_config));
      Wavefunction reference = gaussian_packet(grid, z0, row.sigma);
      if (sweep.reference == ReferencePacket::fitted_gaussian) {
        const Moments m = moments(engineered);
        reference = gaussian_packet(grid, m.mean, m.std);
      }
      ExperimentRecord ref = evolve(reference, potential, params, job_config.evolve);
      ExperimentRecord cand = evolve(engineered, potential, params, job_config.evolve);
      row.reference_absorbed = ref.absorbed_fraction.back();
      row.candidate_absorbed = cand.absorbed_fraction.back();
      row.averaged_ratio = compare_records(std::move(ref), std::move(cand), job_config).averaged_ratio;
      row.ok = std::isfinite(row.averaged_ratio);
      if (!row.ok) row.message = "no retained ratio samples";
    } catch (const std::exception& e) {
      row.ok = false;
      row.message = e.what();
    }
  });
  return rows;
}

ComparisonResult run_fitted_control(const PhysicalParams& params, const FittedControl& control,
                                    const ExperimentConfig& config) {
  // Each packet sits in its own trap (centre and frequency from its own mean and width).
  PhysicalParams eng_params = params;
  if (control.mode == FittedControl::Mode::explicit_params)
    eng_params = params.with_envelope(control.engineered_z0, control.sigma);
  eng_params.validate();

  Grid1D grid = config.grid_for(eng_params);
  std::optional<Wavefunction> engineered;
  PhysicalParams gauss_params = eng_params;
  if (control.mode == FittedControl::Mode::auto_fit) {
    engineered = engineered_packet(grid, eng_params, profile_for(eng_params, config));
    const Moments m = moments(*engineered);
    gauss_params = eng_params.with_envelope(m.mean, m.std);
  } else {
    gauss_params = eng_params.with_envelope(control.gaussian_z0, control.sigma);
  }
  gauss_params.validate();
  if (!config.grid) {
    const Grid1D wide = Grid1D::default_for(gauss_params);
    if (wide.size() > grid.size()) {
      grid = wide;
      engineered.reset();
    }
  }
  if (!engineered) engineered = engineered_packet(grid, eng_params, profile_for(eng_params, config));
  const auto gaussian = gaussian_packet(grid, gauss_params.z0, gauss_params.sigma);
  const auto eng_potential = total_potential(grid, eng_params, config.include_trap);
  const auto gauss_potential = total_potential(grid, gauss_params, config.include_trap);

  auto future = std::async(std::launch::async, run_packet, std::cref(gaussian), std::cref(gauss_potential),
                           std::cref(gauss_params), std::cref(config.evolve));
  ExperimentRecord cand = run_packet(*engineered, eng_potential, eng_params, config.evolve);
  ExperimentRecord ref = future.get();
  return compare_records(std::move(ref), std::move(cand), config);
}

std::vector<PreparationRow> run_preparation_study(const PhysicalParams& params, const std::vector<double>& kz0_values,
                                                  const ExperimentConfig& config, std::size_t workers) {
  params.validate();
  const Grid1D grid = config.grid_for(params);
  const auto potential = total_potential(grid, params, config.include_trap);
  const ProfileSpec spec = profile_for(params, config);
  const auto target = engineered_packet(grid, params, spec);
  const auto ground = gaussian_packet(grid, params.z0, params.sigma);

  ExperimentConfig job_config = config;
  job_config.evolve.t_final = config.average_window;

  // Slot 0 is the ideal packet; slot i + 1 the imprinted packet for kz0_values[i].
  std::vector<double> absorbed(kz0_values.size() + 1, 0.0);
  std::vector<PreparationRow> rows(kz0_values.size());
  std::vector<std::exception_ptr> errors(kz0_values.size() + 1);
  parallel_for(kz0_values.size() + 1, workers, [&](std::size_t slot) {
    try {
      if (slot == 0) {
        absorbed[0] = evolve(target, potential, params, job_config.evolve).absorbed_fraction.back();
        return;
      }
      const double kz0 = kz0_values[slot - 1];
      const double k = kz0 / params.z0;
      const auto imprinted = preparation_sequence(ground, k, params, spec, true);
      const auto linear_only = preparation_sequence(ground, k, params, spec, false);
      PreparationRow& row = rows[slot - 1];
      row.slope_k = k;
      row.kz0 = kz0;
      row.fidelity = fidelity(imprinted, target);
      row.fidelity_linear_only = fidelity(linear_only, target);
      absorbed[slot] = evolve(imprinted, potential, params, job_config.evolve).absorbed_fraction.back();
    } catch (...) {
      errors[slot] = std::current_exception();
    }
  });
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    rows[i].imprinted_absorbed = absorbed[i + 1];
    rows[i].ideal_absorbed = absorbed[0];
    rows[i].absorption_ratio = absorbed[0] > 0 ? absorbed[i + 1] / absorbed[0] : std::numeric_limits<double>::quiet_NaN();
  }
  return rows;
}

WeightedFields emit_fig2(const PhysicalParams& params, const ExperimentConfig& config) {
  params.validate();
  return weighted_fields(config.grid_for(params), params, profile_for(params, config));
}

}  // namespace qpot

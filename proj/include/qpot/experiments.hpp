#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "qpot/bohmian.hpp"
#include "qpot/propagator.hpp"
#include "qpot/wavepacket.hpp"

namespace qpot {

/// Shared settings for every simulation an experiment runs.
struct ExperimentConfig {
  EvolveConfig evolve{1e-7, 5e-3, 0, 10, false};
  bool include_trap = true;
  bool use_abs = false;
  std::optional<Grid1D> grid;   // default: Grid1D::default_for(params)
  double average_window = 2e-3;  // s
  double rate_window = 1e-4;     // s, spacing for absorption-rate differences
  double ratio_floor = 1e-12;    // absorbed fractions below this are not compared

  Grid1D grid_for(const PhysicalParams& params) const;
};

struct RatioSample {
  double time;   // s
  double ratio;  // reference absorbed / candidate absorbed
};

/// Absorption of a reference packet (usually the Gaussian) against a
/// candidate (usually the engineered packet) under one potential stack.
struct ComparisonResult {
  ExperimentRecord reference;
  ExperimentRecord candidate;
  std::vector<RatioSample> ratio_series;
  /// Mean ratio over retained samples with t <= average_window; NaN when none.
  double averaged_ratio;
  /// First retained time where the absorbed-fraction ratio drops to <= 1.
  std::optional<double> crossover_time;
  /// First time where the candidate's absorption rate reaches the reference's.
  std::optional<double> rate_crossover_time;
};

ComparisonResult compare_records(ExperimentRecord reference, ExperimentRecord candidate, const ExperimentConfig& config);

/// Evolves both packets (concurrently) under the same potential and compares them.
ComparisonResult compare_packets(const Wavefunction& reference, const Wavefunction& candidate,
                                 const ComplexPotential& potential, const PhysicalParams& params,
                                 const ExperimentConfig& config);

/// Engineered packet against the Gaussian with the envelope's mean and width.
ComparisonResult run_comparison(const PhysicalParams& params, const ExperimentConfig& config);

struct SigmaRule {
  enum class Kind { ratio, fixed };
  Kind kind = Kind::ratio;
  double value = 0.5;  // sigma / z0, or sigma in metres

  double sigma_for(double z0) const { return kind == Kind::ratio ? value * z0 : value; }
  std::string label() const;
  bool operator==(const SigmaRule&) const = default;
};

enum class ReferencePacket { gaussian, fitted_gaussian };

struct SweepSpec {
  std::vector<double> z0_values{1.5e-6, 2.0e-6, 2.5e-6, 3.0e-6, 3.5e-6, 4.0e-6};
  std::vector<SigmaRule> sigma_rules{{SigmaRule::Kind::ratio, 2.0 / 3.0},
                                     {SigmaRule::Kind::ratio, 0.5},
                                     {SigmaRule::Kind::ratio, 1.0 / 3.0}};
  double window = 2e-3;  // s
  ReferencePacket reference = ReferencePacket::gaussian;

  void validate(const PhysicalParams& params) const;
  bool operator==(const SweepSpec&) const = default;
};

struct SweepRow {
  double z0;
  SigmaRule rule;
  double sigma;
  double averaged_ratio;
  double reference_absorbed;  // at the end of the window
  double candidate_absorbed;
  bool ok;
  std::string message;
};

/// One row per (z0, rule), sorted by z0 then rule order. A failing point is
/// marked and the sweep continues. Output is independent of the worker count.
std::vector<SweepRow> run_sweep(const PhysicalParams& base, const SweepSpec& sweep, const ExperimentConfig& config,
                                std::size_t workers = 1);

struct FittedControl {
  enum class Mode { explicit_params, auto_fit };
  Mode mode = Mode::explicit_params;
  double engineered_z0 = 1.43e-6;
  double gaussian_z0 = 2.3e-6;
  double sigma = 1e-6;
};

/// Engineered packet against a Gaussian placed farther from the surface.
/// In auto_fit mode the Gaussian takes the engineered packet's own mean and width.
/// Each packet evolves in a trap centred on its own mean with its own width.
ComparisonResult run_fitted_control(const PhysicalParams& params, const FittedControl& control,
                                    const ExperimentConfig& config);

struct PreparationRow {
  double slope_k;                // 1/m
  double kz0;
  double fidelity;               // full two-stage sequence vs target packet
  double fidelity_linear_only;   // sin(Kz) stage alone vs target packet
  double imprinted_absorbed;     // at the end of the window
  double ideal_absorbed;
  double absorption_ratio;       // imprinted / ideal
};

/// For each K·z0, imprints the Gaussian ground state with the two-stage
/// sequence and compares it to the ideal engineered packet.
std::vector<PreparationRow> run_preparation_study(const PhysicalParams& params, const std::vector<double>& kz0_values,
                                                  const ExperimentConfig& config, std::size_t workers = 1);

/// Weighted fields of the engineered packet for plotting.
WeightedFields emit_fig2(const PhysicalParams& params, const ExperimentConfig& config);

}  // namespace qpot

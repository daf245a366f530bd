#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "qpot/experiments.hpp"
#include "qpot/units.hpp"

namespace qpot {

/// Physical dimension of a config value; selects the accepted unit suffixes.
enum class Quantity { dimensionless, length, time, mass, energy, c4, angular_rate, action, inverse_length };

/// Parses "2.3um", "0.1 ms", "9.1e-56Jm4" into SI. Dimensional quantities
/// require a suffix; dimensionless ones reject any.
double parse_quantity(std::string_view text, Quantity kind);

/// Shortest exact SI text with the base suffix ("2.2999999999999999e-06m").
std::string format_quantity(double value, Quantity kind);

/// Everything one run of the command-line tool needs.
struct RunConfig {
  PhysicalParams physics;
  ExperimentConfig experiment;
  SweepSpec sweep;
  FittedControl fitted;
  std::vector<double> prepare_kz0{0.01, 0.05, 0.1};
  double converge_t_final = 2e-3;  // s

  void validate() const;
};

/// Sections: [physics] [grid] [evolve] [compare] [sweep] [fitted] [prepare] [converge].
/// Unknown sections or keys, duplicates and malformed values throw ConfigError
/// naming the source and line.
RunConfig parse_config(std::string_view text, std::string_view source = "<string>");
RunConfig load_config(const std::filesystem::path& path);

/// Fully resolved config text; parse_config(to_config_text(c)) reproduces c.
std::string to_config_text(const RunConfig& config);

/// The [sweep] section alone.
std::string sweep_to_text(const SweepSpec& sweep);
SweepSpec parse_sweep(std::string_view text);

}  // namespace qpot

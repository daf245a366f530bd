#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "qpot/bohmian.hpp"
#include "qpot/config.hpp"
#include "qpot/csv_io.hpp"
#include "qpot/errors.hpp"
#include "qpot/experiments.hpp"
#include "qpot/potentials.hpp"
#include "qpot/propagator.hpp"
#include "qpot/wavepacket.hpp"

namespace fs = std::filesystem;
using namespace qpot;

namespace {

struct Options {
  std::string config_path;
  std::string out_dir = ".";
  std::size_t workers = 1;
  long long seed = 0;  // reserved; every run is deterministic
  std::string packet = "engineered";
};

// Collects result lines; everything is written from the main thread at the end.
class Collector {
 public:
  Collector(fs::path dir, std::string command) : dir_(std::move(dir)), command_(std::move(command)) {
    fs::create_directories(dir_);
  }

  template <typename Writer>
  void file(const std::string& name, Writer&& writer) {
    const fs::path path = dir_ / name;
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    writer(out);
    files_.push_back(name);
  }

  void note(const std::string& key, const std::string& value) {
    notes_.push_back(key + " = " + value);
    std::cout << key << " = " << value << "\n";
  }

  void manifest(const RunConfig& config) {
    std::ofstream out(dir_ / "run_manifest.txt", std::ios::binary);
    out << "qpot " << QPOT_VERSION << "\n";
    out << "command = " << command_ << "\n";
    out << "\n# resolved configuration\n" << to_config_text(config);
    out << "\n# results\n";
    for (const auto& n : notes_) out << n << "\n";
    out << "\n# files\n";
    for (const auto& f : files_) out << f << "\n";
  }

 private:
  fs::path dir_;
  std::string command_;
  std::vector<std::string> notes_;
  std::vector<std::string> files_;
};

std::string time_text(const std::optional<double>& t) {
  return t ? csv_number(*t / kMillisecond) + " ms" : std::string("none");
}

void cmd_profile(const RunConfig& c, Collector& out) {
  const Grid1D grid = c.experiment.grid_for(c.physics);
  const ProfileSpec spec = ProfileSpec::from(c.physics, c.experiment.use_abs);
  const auto psi = engineered_packet(grid, c.physics, spec);
  const auto gauss = gaussian_packet(grid, c.physics.z0, c.physics.sigma);
  out.file("engineered_packet.csv", [&](std::ostream& os) { write_packet(os, psi); });
  out.file("gaussian_packet.csv", [&](std::ostream& os) { write_packet(os, gauss); });
  out.file("potential.csv", [&](std::ostream& os) {
    write_potential(os, total_potential(grid, c.physics, c.experiment.include_trap));
  });
  const Moments m = moments(psi);
  out.note("engineered_mean_um", csv_number(m.mean / kMicrometre));
  out.note("engineered_std_um", csv_number(m.std / kMicrometre));
  out.note("profile_length_um", csv_number(c.physics.profile_length() / kMicrometre));
  out.note("grid_resolves_profile", grid.resolves_profile(c.physics) ? "true" : "false");
}

void cmd_fields(const RunConfig& c, Collector& out) {
  const WeightedFields fields = emit_fig2(c.physics, c.experiment);
  out.file("fig2.csv", [&](std::ostream& os) { write_fig2(os, fields, c.physics.hbar); });
  const WeightedPeaks peaks = weighted_peaks(fields, c.physics);
  out.note("weighted_q_peak_over_hbar", csv_number(peaks.weighted_q / c.physics.hbar));
  out.note("weighted_residual_peak_over_hbar", csv_number(peaks.weighted_residual / c.physics.hbar));
  out.note("residual_to_q_ratio", csv_number(peaks.ratio()));
  out.note("support", "z >= delta and rho >= 1e-6 max rho");
}

void cmd_evolve(const RunConfig& c, const Options& opt, Collector& out) {
  const Grid1D grid = c.experiment.grid_for(c.physics);
  Wavefunction psi(grid);
  if (opt.packet == "engineered")
    psi = engineered_packet(grid, c.physics, ProfileSpec::from(c.physics, c.experiment.use_abs));
  else if (opt.packet == "gaussian")
    psi = gaussian_packet(grid, c.physics.z0, c.physics.sigma);
  else
    throw ConfigError("--packet must be engineered or gaussian");
  const auto potential = total_potential(grid, c.physics, c.experiment.include_trap);
  const ExperimentRecord record = evolve(psi, potential, c.physics, c.experiment.evolve);
  out.file("record.csv", [&](std::ostream& os) { write_record(os, record); });
  for (std::size_t k = 0; k < record.snapshots.size(); ++k) {
    char name[64];
    std::snprintf(name, sizeof name, "snapshots/density_%04zu.csv", k);
    out.file(name, [&](std::ostream& os) { write_density(os, grid, record.snapshots[k].density); });
  }
  out.note("packet", opt.packet);
  out.note("absorbed_fraction_final", csv_number(record.absorbed_fraction.back()));
}

void cmd_compare(const RunConfig& c, Collector& out) {
  const ComparisonResult r = run_comparison(c.physics, c.experiment);
  out.file("comparison.csv", [&](std::ostream& os) { write_comparison(os, r, c.experiment.ratio_floor); });
  out.file("gaussian_record.csv", [&](std::ostream& os) { write_record(os, r.reference); });
  out.file("engineered_record.csv", [&](std::ostream& os) { write_record(os, r.candidate); });
  out.note("averaged_ratio", csv_number(r.averaged_ratio));
  out.note("average_start", "first retained sample (both fractions above the ratio floor)");
  out.note("crossover_time", time_text(r.crossover_time));
  out.note("rate_crossover_time", time_text(r.rate_crossover_time));
}

void cmd_sweep(const RunConfig& c, const Options& opt, Collector& out) {
  const auto rows = run_sweep(c.physics, c.sweep, c.experiment, opt.workers);
  out.file("sweep.csv", [&](std::ostream& os) { write_sweep(os, rows); });
  std::size_t failed = 0;
  for (const auto& r : rows) failed += r.ok ? 0 : 1;
  out.note("points", std::to_string(rows.size()));
  out.note("failed_points", std::to_string(failed));
  out.note("average_start", "first retained sample (both fractions above the ratio floor)");
}

void cmd_fitted(const RunConfig& c, Collector& out) {
  const ComparisonResult r = run_fitted_control(c.physics, c.fitted, c.experiment);
  out.file("fitted.csv", [&](std::ostream& os) { write_comparison(os, r, c.experiment.ratio_floor); });
  double min_ratio = INFINITY;
  for (const auto& s : r.ratio_series)
    if (s.time <= c.experiment.average_window * (1 + 1e-12)) min_ratio = std::min(min_ratio, s.ratio);
  out.note("gaussian_z0_um", csv_number(r.reference.params.z0 / kMicrometre));
  out.note("gaussian_sigma_um", csv_number(r.reference.params.sigma / kMicrometre));
  out.note("engineered_z0_um", csv_number(r.candidate.params.z0 / kMicrometre));
  out.note("min_ratio_in_window", csv_number(min_ratio));
  out.note("averaged_ratio", csv_number(r.averaged_ratio));
}

void cmd_prepare(const RunConfig& c, const Options& opt, Collector& out) {
  const auto rows = run_preparation_study(c.physics, c.prepare_kz0, c.experiment, opt.workers);
  out.file("preparation.csv", [&](std::ostream& os) { write_preparation(os, rows); });
  out.note("absorption_window", csv_number(c.experiment.average_window / kMillisecond) + " ms");
}

void cmd_converge(const RunConfig& c, const Options& opt, Collector& out) {
  const PhysicalParams params = c.physics;
  const bool use_abs = c.experiment.use_abs;
  const bool trap = c.experiment.include_trap;
  const ProblemFactory factory = [params, use_abs, trap](const Grid1D& grid) {
    return std::make_pair(engineered_packet(grid, params, ProfileSpec::from(params, use_abs)),
                          total_potential(grid, params, trap));
  };
  EvolveConfig cfg = c.experiment.evolve;
  cfg.t_final = c.converge_t_final;
  const ConvergenceReport report =
      convergence_report(factory, c.experiment.grid_for(params), params, cfg, opt.workers);
  out.file("convergence.csv", [&](std::ostream& os) { write_convergence(os, report); });
  out.note("dt_order", csv_number(report.dt_order));
  out.note("dz_order", csv_number(report.dz_order));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quantum-potential surface absorption experiments"};
  app.require_subcommand(1);
  Options opt;
  app.add_option("--config", opt.config_path, "Config file (defaults are used when omitted)")->check(CLI::ExistingFile);
  app.add_option("--out", opt.out_dir, "Output directory");
  app.add_option("--workers", opt.workers, "Worker threads for independent simulations")
      ->envname("QPOT_WORKERS")
      ->check(CLI::Range(std::size_t{1}, std::size_t{1024}));
  app.add_option("--seed", opt.seed, "Reserved; runs are fully deterministic");

  struct Command {
    std::string name;
    std::string help;
  };
  const std::vector<Command> commands{
      {"profile", "Dump the engineered and Gaussian packets and the potential"},
      {"fields", "Density-weighted quantum potential and residual"},
      {"evolve", "Single evolution with density snapshots"},
      {"compare", "Engineered packet against the same-envelope Gaussian"},
      {"sweep", "Averaged absorption ratio over z0 and sigma rules"},
      {"fitted", "Engineered packet against a Gaussian placed farther out"},
      {"prepare", "Phase-imprint preparation fidelity and absorption"},
      {"converge", "dt and dz refinement ladders"},
  };
  for (const auto& cmd : commands) {
    auto* sub = app.add_subcommand(cmd.name, cmd.help);
    sub->fallthrough();
    if (cmd.name == "evolve")
      sub->add_option("--packet", opt.packet, "engineered or gaussian")->check(CLI::IsMember({"engineered", "gaussian"}));
  }
  CLI11_PARSE(app, argc, argv);

  try {
    const RunConfig config = opt.config_path.empty() ? RunConfig{} : load_config(opt.config_path);
    config.validate();
    const std::string command = app.get_subcommands().front()->get_name();
    Collector out(opt.out_dir, command);
    if (command == "profile") cmd_profile(config, out);
    else if (command == "fields") cmd_fields(config, out);
    else if (command == "evolve") cmd_evolve(config, opt, out);
    else if (command == "compare") cmd_compare(config, out);
    else if (command == "sweep") cmd_sweep(config, opt, out);
    else if (command == "fitted") cmd_fitted(config, out);
    else if (command == "prepare") cmd_prepare(config, opt, out);
    else if (command == "converge") cmd_converge(config, opt, out);
    out.manifest(config);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

#include "qpot/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <sstream>

#include "qpot/errors.hpp"

namespace qpot {

namespace {

struct Suffix {
  std::string_view text;
  double factor;
};

std::vector<Suffix> suffixes_for(Quantity kind) {
  switch (kind) {
    case Quantity::length:
      return {{"m", 1.0}, {"mm", 1e-3}, {"um", 1e-6}, {"\xC2\xB5m", 1e-6}, {"nm", 1e-9}};
    case Quantity::time:
      return {{"s", 1.0}, {"ms", 1e-3}, {"us", 1e-6}, {"ns", 1e-9}};
    case Quantity::mass:
      return {{"kg", 1.0}, {"amu", 1.66053906660e-27}};
    case Quantity::energy:
      return {{"J", 1.0}};
    case Quantity::c4:
      return {{"Jm4", 1.0}, {"J*m^4", 1.0}, {"Jm^4", 1.0}};
    case Quantity::angular_rate:
      return {{"rad/s", 1.0}, {"1/s", 1.0}, {"rad/ms", 1e3}};
    case Quantity::action:
      return {{"Js", 1.0}, {"J*s", 1.0}};
    case Quantity::inverse_length:
      return {{"1/m", 1.0}, {"1/um", 1e6}};
    case Quantity::dimensionless:
      break;
  }
  return {};
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<std::string_view> split_list(std::string_view text) {
  std::vector<std::string_view> items;
  text = trim(text);
  if (text.empty()) return items;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = text.find(',', start);
    const auto item = trim(text.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
    if (item.empty()) throw ConfigError("empty list item");
    items.push_back(item);
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return items;
}

bool parse_bool(std::string_view text) {
  if (text == "true" || text == "yes" || text == "1") return true;
  if (text == "false" || text == "no" || text == "0") return false;
  throw ConfigError("expected a boolean, got '" + std::string(text) + "'");
}

std::size_t parse_count(std::string_view text) {
  std::size_t v = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size())
    throw ConfigError("expected a non-negative integer, got '" + std::string(text) + "'");
  return v;
}

SigmaRule parse_rule(std::string_view text) {
  const auto colon = text.find(':');
  if (colon == std::string_view::npos) throw ConfigError("sigma rule must be ratio:<r> or fixed:<length>");
  const auto kind = trim(text.substr(0, colon));
  const auto value = trim(text.substr(colon + 1));
  if (kind == "ratio") return {SigmaRule::Kind::ratio, parse_quantity(value, Quantity::dimensionless)};
  if (kind == "fixed") return {SigmaRule::Kind::fixed, parse_quantity(value, Quantity::length)};
  throw ConfigError("unknown sigma rule kind '" + std::string(kind) + "'");
}

std::string format_rule(const SigmaRule& rule) {
  if (rule.kind == SigmaRule::Kind::ratio) return "ratio:" + format_double(rule.value);
  return "fixed:" + format_quantity(rule.value, Quantity::length);
}

std::string format_lengths(const std::vector<double>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ", ";
    out += format_quantity(values[i], Quantity::length);
  }
  return out;
}

// Grid keys are collected and the grid built once the whole file is read.
struct PendingGrid {
  std::optional<double> z_min;
  std::optional<double> z_max;
  std::optional<std::size_t> points;
};

using Setter = std::function<void(RunConfig&, PendingGrid&, std::string_view)>;

template <typename Assign>
Setter with(Assign assign) {
  return [assign](RunConfig& c, PendingGrid& g, std::string_view v) { assign(c, g, v); };
}

const std::map<std::string, std::map<std::string, Setter>>& key_table() {
  static const std::map<std::string, std::map<std::string, Setter>> table = [] {
    std::map<std::string, std::map<std::string, Setter>> t;
    auto& phys = t["physics"];
    phys["mass"] = with([](RunConfig& c, PendingGrid&, std::string_view v) { c.physics.mass = parse_quantity(v, Quantity::mass); });
    phys["c4"] = with([](RunConfig& c, PendingGrid&, std::string_view v) { c.physics.c4 = parse_quantity(v, Quantity::c4); });
    phys["z0"] = with([](RunConfig& c, PendingGrid&, std::string_view v) { c.physics.z0 = parse_quantity(v, Quantity::length); });
    phys["sigma"] = with([](RunConfig& c, PendingGrid&, std::string_view v) { c.physics.sigma = parse_quantity(v, Quantity::length); });
    phys["c1"] = with([](RunConfig& c, PendingGrid&, std::string_view v) { c.physics.c1 = parse_quantity(v, Quantity::dimensionless); });
    phys["c2"] = with([](RunConfig& c, PendingGrid&, std::string_view v) { c.physics.c2 = parse_quantity(v, Quantity::dimensionless); });
    phys["delta"] = with([](RunConfig& c, PendingGrid&, std::string_view v) { c.physics.delta = parse_quantity(v, Quantity::length); });
    phys["absorber_strength"] = with([](RunConfig& c, PendingGrid&, std::string_view v) {
      c.physics.absorber_strength = parse_quantity(v, Quantity::energy);
    });
    phys["trap_omega"] = with([](RunConfig& c, PendingGrid&, std::string_view v) {
      c.physics.trap_omega_override = parse_quantity(v, Quantity::angular_rate);
    });
    phys["trap_center"] = with([](RunConfig& c, PendingGrid&, std::string_view v) {
      c.physics.trap_center_override = parse_quantity(v, Quantity::length);
    });
    phys["hbar"] = with([](RunConfig& c, PendingGrid&, std::string_view v) { c.physics.hbar = parse_quantity(v, Quantity::action); });
    phys["use_abs"] = with([](RunConfig& c, PendingGrid&, std::string_view v) { c.experiment.use_abs = parse_bool(v); });

    auto& grid = t["grid"];
    grid["z_min"] = with([](RunConfig&, PendingGrid& g, std::string_view v) { g.z_min = parse_quantity(v, Quantity::length); });
    grid["z_max"] = with([](RunConfig&, PendingGrid& g, std::string_view v) { g.z_max = parse_quantity(v, Quantity::length); });
    grid["points"] = with([](RunConfig&, PendingGrid& g, std::string_view v) { g.points = parse_count(v); });

    auto& ev = t["evolve"];
    ev["dt"] = with([](RunConfig& c, PendingGrid&, std::string_view v) { c.experiment.evolve.dt = parse_quantity(v, Quantity::time); });
    ev["t_final"] = with([](RunConfig& c, PendingGrid&, std::string_view v) {
      c.experiment.evolve.t_final = parse_quantity(v, Quantity::time);
    });
    ev["snapshot_stride"] = with([](RunConfig& c, PendingGrid&, std::string_view v) {
      c.experiment.evolve.snapshot_stride = parse_count(v);
    });
    ev["record_stride"] = with([](RunConfig& c, PendingGrid&, std::string_view v) {
      c.experiment.evolve.record_stride = parse_count(v);
    });
    ev["startup_steps"] = with([](RunConfig& c, PendingGrid&, std::string_view v) {
      c.experiment.evolve.startup_steps = parse_count(v);
    });
    ev["include_trap"] = with([](RunConfig& c, PendingGrid&, std::string_view v) { c.experiment.include_trap = parse_bool(v); });

    auto& cmp = t["compare"];
    cmp["average_window"] = with([](RunConfig& c, PendingGrid&, std::string_view v) {
      c.experiment.average_window = parse_quantity(v, Quantity::time);
    });
    cmp["rate_window"] = with([](RunConfig& c, PendingGrid&, std::string_view v) {
      c.experiment.rate_window = parse_quantity(v, Quantity::time);
    });
    cmp["ratio_floor"] = with([](RunConfig& c, PendingGrid&, std::string_view v) {
      c.experiment.ratio_floor = parse_quantity(v, Quantity::dimensionless);
    });

    auto& sw = t["sweep"];
    sw["z0_values"] = with([](RunConfig& c, PendingGrid&, std::string_view v) {
      c.sweep.z0_values.clear();
      for (auto item : split_list(v)) c.sweep.z0_values.push_back(parse_quantity(item, Quantity::length));
    });
    sw["sigma_rules"] = with([](RunConfig& c, PendingGrid&, std::string_view v) {
      c.sweep.sigma_rules.clear();
      for (auto item : split_list(v)) c.sweep.sigma_rules.push_back(parse_rule(item));
    });
    sw["window"] = with([](RunConfig& c, PendingGrid&, std::string_view v) { c.sweep.window = parse_quantity(v, Quantity::time); });
    sw["reference"] = with([](RunConfig& c, PendingGrid&, std::string_view v) {
      if (v == "gaussian")
        c.sweep.reference = ReferencePacket::gaussian;
      else if (v == "fitted_gaussian")
        c.sweep.reference = ReferencePacket::fitted_gaussian;
      else
        throw ConfigError("sweep reference must be gaussian or fitted_gaussian");
    });

    auto& fit = t["fitted"];
    fit["mode"] = with([](RunConfig& c, PendingGrid&, std::string_view v) {
      if (v == "explicit")
        c.fitted.mode = FittedControl::Mode::explicit_params;
      else if (v == "auto")
        c.fitted.mode = FittedControl::Mode::auto_fit;
      else
        throw ConfigError("fitted mode must be explicit or auto");
    });
    fit["engineered_z0"] = with([](RunConfig& c, PendingGrid&, std::string_view v) {
      c.fitted.engineered_z0 = parse_quantity(v, Quantity::length);
    });
    fit["gaussian_z0"] = with([](RunConfig& c, PendingGrid&, std::string_view v) {
      c.fitted.gaussian_z0 = parse_quantity(v, Quantity::length);
    });
    fit["sigma"] = with([](RunConfig& c, PendingGrid&, std::string_view v) { c.fitted.sigma = parse_quantity(v, Quantity::length); });

    t["prepare"]["kz0_values"] = with([](RunConfig& c, PendingGrid&, std::string_view v) {
      c.prepare_kz0.clear();
      for (auto item : split_list(v)) c.prepare_kz0.push_back(parse_quantity(item, Quantity::dimensionless));
    });
    t["converge"]["t_final"] = with([](RunConfig& c, PendingGrid&, std::string_view v) {
      c.converge_t_final = parse_quantity(v, Quantity::time);
    });
    return t;
  }();
  return table;
}

}  // namespace

double parse_quantity(std::string_view text, Quantity kind) {
  text = trim(text);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr == text.data()) throw ConfigError("malformed number '" + std::string(text) + "'");
  const auto suffix = trim(text.substr(static_cast<std::size_t>(ptr - text.data())));
  if (kind == Quantity::dimensionless) {
    if (!suffix.empty()) throw ConfigError("unexpected unit '" + std::string(suffix) + "' on a dimensionless value");
    return value;
  }
  if (suffix.empty()) throw ConfigError("missing unit on '" + std::string(text) + "'");
  for (const auto& s : suffixes_for(kind))
    if (s.text == suffix) return value * s.factor;
  throw ConfigError("unknown unit '" + std::string(suffix) + "'");
}

std::string format_quantity(double value, Quantity kind) {
  const auto options = suffixes_for(kind);
  return format_double(value) + (options.empty() ? std::string() : std::string(options.front().text));
}

void RunConfig::validate() const {
  physics.validate();
  experiment.evolve.validate();
  if (experiment.grid && experiment.grid->z_min() < 0) throw ConfigError("grid z_min must be >= 0");
  if (!(experiment.average_window > 0)) throw ConfigError("average_window must be positive");
  if (!(experiment.rate_window > 0)) throw ConfigError("rate_window must be positive");
  if (!(experiment.ratio_floor >= 0)) throw ConfigError("ratio_floor must be >= 0");
  sweep.validate(physics);
  if (!(fitted.engineered_z0 > physics.delta) || !(fitted.gaussian_z0 > physics.delta) || !(fitted.sigma > 0))
    throw ConfigError("fitted packets need z0 > delta and sigma > 0");
  for (double kz0 : prepare_kz0)
    if (!(kz0 > 0)) throw ConfigError("prepare kz0 values must be positive");
  if (!(converge_t_final >= experiment.evolve.dt)) throw ConfigError("converge t_final must be at least dt");
}

RunConfig parse_config(std::string_view text, std::string_view source) {
  RunConfig config;
  PendingGrid grid;
  const auto& table = key_table();
  std::string section;
  std::set<std::string> seen_sections;
  std::set<std::string> seen_keys;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  const auto where = [&] { return std::string(source) + ":" + std::to_string(line_no) + ": "; };

  while (pos <= text.size()) {
    const std::size_t eol = text.find('\n', pos);
    std::string_view line = text.substr(pos, eol == std::string_view::npos ? std::string_view::npos : eol - pos);
    pos = eol == std::string_view::npos ? text.size() + 1 : eol + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty() || line.front() == ';') continue;

    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError(where() + "malformed section header");
      section = std::string(trim(line.substr(1, line.size() - 2)));
      if (!table.count(section)) throw ConfigError(where() + "unknown section [" + section + "]");
      if (!seen_sections.insert(section).second) throw ConfigError(where() + "duplicate section [" + section + "]");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ConfigError(where() + "expected 'key = value'");
    const std::string key(trim(line.substr(0, eq)));
    const auto value = trim(line.substr(eq + 1));
    if (section.empty()) throw ConfigError(where() + "key '" + key + "' outside any section");
    const auto& keys = table.at(section);
    const auto it = keys.find(key);
    if (it == keys.end()) throw ConfigError(where() + "unknown key '" + key + "' in [" + section + "]");
    if (!seen_keys.insert(section + "." + key).second) throw ConfigError(where() + "duplicate key '" + key + "'");
    try {
      it->second(config, grid, value);
    } catch (const ConfigError& e) {
      throw ConfigError(where() + key + ": " + e.what());
    }
  }

  if (grid.z_max || grid.points || grid.z_min) {
    if (!grid.z_max || !grid.points) throw ConfigError(std::string(source) + ": [grid] needs both z_max and points");
    try {
      config.experiment.grid = Grid1D(grid.z_min.value_or(0.0), *grid.z_max, *grid.points);
    } catch (const Error& e) {
      throw ConfigError(std::string(source) + ": [grid] " + e.what());
    }
  }
  config.validate();
  return config;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str(), path.string());
}

std::string sweep_to_text(const SweepSpec& sweep) {
  std::ostringstream os;
  os << "[sweep]\n";
  os << "z0_values = " << format_lengths(sweep.z0_values) << "\n";
  os << "sigma_rules = ";
  for (std::size_t i = 0; i < sweep.sigma_rules.size(); ++i) os << (i ? ", " : "") << format_rule(sweep.sigma_rules[i]);
  os << "\n";
  os << "window = " << format_quantity(sweep.window, Quantity::time) << "\n";
  os << "reference = " << (sweep.reference == ReferencePacket::gaussian ? "gaussian" : "fitted_gaussian") << "\n";
  return os.str();
}

SweepSpec parse_sweep(std::string_view text) {
  // Only [sweep] is allowed here; other sections stay at their defaults.
  RunConfig config;
  PendingGrid grid;
  const auto& keys = key_table().at("sweep");
  std::size_t pos = 0;
  std::size_t line_no = 0;
  bool in_sweep = false;
  while (pos <= text.size()) {
    const std::size_t eol = text.find('\n', pos);
    std::string_view line = text.substr(pos, eol == std::string_view::npos ? std::string_view::npos : eol - pos);
    pos = eol == std::string_view::npos ? text.size() + 1 : eol + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line == "[sweep]") {
      in_sweep = true;
      continue;
    }
    const auto eq = line.find('=');
    if (!in_sweep || eq == std::string_view::npos)
      throw ConfigError("sweep text line " + std::to_string(line_no) + ": expected [sweep] key = value");
    const std::string key(trim(line.substr(0, eq)));
    const auto it = keys.find(key);
    if (it == keys.end()) throw ConfigError("unknown sweep key '" + key + "'");
    it->second(config, grid, trim(line.substr(eq + 1)));
  }
  return config.sweep;
}

std::string to_config_text(const RunConfig& c) {
  std::ostringstream os;
  const auto& p = c.physics;
  os << "[physics]\n";
  os << "mass = " << format_quantity(p.mass, Quantity::mass) << "\n";
  os << "c4 = " << format_quantity(p.c4, Quantity::c4) << "\n";
  os << "z0 = " << format_quantity(p.z0, Quantity::length) << "\n";
  os << "sigma = " << format_quantity(p.sigma, Quantity::length) << "\n";
  os << "c1 = " << format_double(p.c1) << "\n";
  os << "c2 = " << format_double(p.c2) << "\n";
  os << "delta = " << format_quantity(p.delta, Quantity::length) << "\n";
  if (p.absorber_strength) os << "absorber_strength = " << format_quantity(*p.absorber_strength, Quantity::energy) << "\n";
  if (p.trap_omega_override) os << "trap_omega = " << format_quantity(*p.trap_omega_override, Quantity::angular_rate) << "\n";
  if (p.trap_center_override) os << "trap_center = " << format_quantity(*p.trap_center_override, Quantity::length) << "\n";
  os << "hbar = " << format_quantity(p.hbar, Quantity::action) << "\n";
  os << "use_abs = " << (c.experiment.use_abs ? "true" : "false") << "\n";

  if (c.experiment.grid) {
    const auto& g = *c.experiment.grid;
    os << "\n[grid]\n";
    os << "z_min = " << format_quantity(g.z_min(), Quantity::length) << "\n";
    os << "z_max = " << format_quantity(g.z_max(), Quantity::length) << "\n";
    os << "points = " << g.size() << "\n";
  }

  const auto& e = c.experiment.evolve;
  os << "\n[evolve]\n";
  os << "dt = " << format_quantity(e.dt, Quantity::time) << "\n";
  os << "t_final = " << format_quantity(e.t_final, Quantity::time) << "\n";
  os << "snapshot_stride = " << e.snapshot_stride << "\n";
  os << "record_stride = " << e.record_stride << "\n";
  os << "startup_steps = " << e.startup_steps << "\n";
  os << "include_trap = " << (c.experiment.include_trap ? "true" : "false") << "\n";

  os << "\n[compare]\n";
  os << "average_window = " << format_quantity(c.experiment.average_window, Quantity::time) << "\n";
  os << "rate_window = " << format_quantity(c.experiment.rate_window, Quantity::time) << "\n";
  os << "ratio_floor = " << format_double(c.experiment.ratio_floor) << "\n";

  os << "\n" << sweep_to_text(c.sweep);

  os << "\n[fitted]\n";
  os << "mode = " << (c.fitted.mode == FittedControl::Mode::explicit_params ? "explicit" : "auto") << "\n";
  os << "engineered_z0 = " << format_quantity(c.fitted.engineered_z0, Quantity::length) << "\n";
  os << "gaussian_z0 = " << format_quantity(c.fitted.gaussian_z0, Quantity::length) << "\n";
  os << "sigma = " << format_quantity(c.fitted.sigma, Quantity::length) << "\n";

  os << "\n[prepare]\nkz0_values = ";
  for (std::size_t i = 0; i < c.prepare_kz0.size(); ++i) os << (i ? ", " : "") << format_double(c.prepare_kz0[i]);
  os << "\n";

  os << "\n[converge]\nt_final = " << format_quantity(c.converge_t_final, Quantity::time) << "\n";
  return os.str();
}

}  // namespace qpot

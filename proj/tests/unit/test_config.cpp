#include <doctest.h>

#include <string>

#include "helpers.hpp"
#include "qpot/config.hpp"
#include "qpot/errors.hpp"

using namespace qpot;
using testing::ms;
using testing::um;

namespace {

std::string error_of(std::string_view text) {
  try {
    parse_config(text, "run.conf");
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

bool contains(const std::string& haystack, std::string_view needle) { return haystack.find(needle) != std::string::npos; }

}  // namespace

TEST_CASE("quantities: suffixes convert to SI") {
  CHECK(parse_quantity("2.3um", Quantity::length) == doctest::Approx(2.3e-6).epsilon(1e-15));
  CHECK(parse_quantity(" 150 nm ", Quantity::length) == doctest::Approx(1.5e-7).epsilon(1e-15));
  CHECK(parse_quantity("0.1ms", Quantity::time) == doctest::Approx(1e-4).epsilon(1e-15));
  CHECK(parse_quantity("87amu", Quantity::mass) == doctest::Approx(87 * 1.66053906660e-27).epsilon(1e-15));
  CHECK(parse_quantity("9.1e-56Jm4", Quantity::c4) == 9.1e-56);
  CHECK(parse_quantity("9.1e-56 J*m^4", Quantity::c4) == 9.1e-56);
  CHECK(parse_quantity("2rad/ms", Quantity::angular_rate) == 2000.0);
  CHECK(parse_quantity("1.7975e-28J", Quantity::energy) == 1.7975e-28);
  CHECK(parse_quantity("0.5", Quantity::dimensionless) == 0.5);
}

TEST_CASE("quantities: missing, wrong or unexpected units") {
  CHECK_THROWS_AS(parse_quantity("2.3", Quantity::length), ConfigError);
  CHECK_THROWS_AS(parse_quantity("2.3ms", Quantity::length), ConfigError);
  CHECK_THROWS_AS(parse_quantity("2.3um", Quantity::dimensionless), ConfigError);
  CHECK_THROWS_AS(parse_quantity("um", Quantity::length), ConfigError);
  CHECK_THROWS_AS(parse_quantity("", Quantity::time), ConfigError);
}

TEST_CASE("quantities: format round trip is exact") {
  for (double v : {2.3e-6, 1.0 / 3.0 * 1e-6, 1.4431999999999999e-25, 9.1e-56}) {
    CHECK(parse_quantity(format_quantity(v, Quantity::length), Quantity::length) == v);
    CHECK(parse_quantity(format_quantity(v, Quantity::c4), Quantity::c4) == v);
  }
}

TEST_CASE("config: empty text gives the defaults") {
  const RunConfig c = parse_config("");
  CHECK(c.physics.z0 == PhysicalParams{}.z0);
  CHECK(c.sweep == SweepSpec{});
  CHECK_FALSE(c.experiment.grid);
}

TEST_CASE("config: sections, comments and grid") {
  const RunConfig c = parse_config(
      "# comment line\n"
      "[physics]\n"
      "z0 = 3um   # trailing comment\n"
      "sigma = 1 um\n"
      "absorber_strength = 1e-30J\n"
      "\n"
      "[grid]\n"
      "z_max = 12um\n"
      "points = 2049\n"
      "[evolve]\n"
      "t_final = 2ms\n"
      "include_trap = false\n"
      "[sweep]\n"
      "z0_values = 1.5um, 2um\n"
      "sigma_rules = ratio:0.5, fixed:0.4um\n"
      "reference = fitted_gaussian\n"
      "[fitted]\n"
      "mode = auto\n");
  CHECK(c.physics.z0 == doctest::Approx(3 * um));
  CHECK(c.physics.absorber() == 1e-30);
  REQUIRE(c.experiment.grid);
  CHECK(c.experiment.grid->size() == 2049);
  CHECK(c.experiment.grid->z_max() == doctest::Approx(12 * um));
  CHECK(c.experiment.evolve.t_final == doctest::Approx(2 * ms));
  CHECK_FALSE(c.experiment.include_trap);
  REQUIRE(c.sweep.z0_values.size() == 2);
  CHECK(c.sweep.sigma_rules[1].kind == SigmaRule::Kind::fixed);
  CHECK(c.sweep.sigma_rules[1].value == doctest::Approx(0.4 * um));
  CHECK(c.sweep.reference == ReferencePacket::fitted_gaussian);
  CHECK(c.fitted.mode == FittedControl::Mode::auto_fit);
}

TEST_CASE("config: errors name the source and line") {
  CHECK(contains(error_of("[physics]\nz0 = 3um\nbogus = 1\n"), "run.conf:3:"));
  CHECK(contains(error_of("[physics]\nz0 = 3um\nbogus = 1\n"), "unknown key 'bogus'"));
  CHECK(contains(error_of("\n[nowhere]\n"), "run.conf:2: unknown section"));
  CHECK(contains(error_of("[physics]\nz0 = 3um\nz0 = 4um\n"), "run.conf:3: duplicate key"));
  CHECK(contains(error_of("[physics]\n[physics]\n"), "duplicate section"));
  CHECK(contains(error_of("z0 = 3um\n"), "outside any section"));
  CHECK(contains(error_of("[physics]\nz0 = 3\n"), "run.conf:2: z0: missing unit"));
  CHECK(contains(error_of("[physics]\nz0 3um\n"), "expected 'key = value'"));
  CHECK(contains(error_of("[grid]\npoints = 100\n"), "needs both z_max and points"));
  CHECK(contains(error_of("[evolve]\ninclude_trap = maybe\n"), "boolean"));
  CHECK(contains(error_of("[sweep]\nsigma_rules = width:2\n"), "unknown sigma rule kind"));
}

TEST_CASE("config: validation runs after parsing") {
  CHECK_THROWS_AS(parse_config("[physics]\nz0 = 0.1um\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[evolve]\ndt = 0s\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[prepare]\nkz0_values = 0.1, -0.1\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[sweep]\nsigma_rules = ratio:2\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[compare]\naverage_window = 0ms\n"), ConfigError);
}

TEST_CASE("config: resolved text round trips") {
  RunConfig c;
  c.physics = c.physics.with_envelope(1.0 / 3.0 * um, 0.123456789 * um);
  c.physics.absorber_strength = 3.3e-29;
  c.physics.trap_omega_override = 123.456;
  c.experiment.grid = Grid1D(0.1 * um, 7 * um, 1025);
  c.experiment.evolve.t_final = 0.7 * ms;
  c.experiment.evolve.snapshot_stride = 17;
  c.experiment.evolve.startup_steps = 0;
  c.experiment.use_abs = true;
  c.sweep.z0_values = {1.1 * um, 2.7 * um};
  c.sweep.sigma_rules = {{SigmaRule::Kind::fixed, 0.3 * um}, {SigmaRule::Kind::ratio, 1.0 / 7.0}};
  c.sweep.window = 1.25 * ms;
  c.fitted.mode = FittedControl::Mode::auto_fit;
  c.prepare_kz0 = {0.02, 1.0 / 3.0};
  c.converge_t_final = 0.3 * ms;

  const std::string text = to_config_text(c);
  const RunConfig back = parse_config(text);
  CHECK(to_config_text(back) == text);
  CHECK(back.physics.z0 == c.physics.z0);
  CHECK(back.physics.sigma == c.physics.sigma);
  CHECK(back.physics.absorber_strength == c.physics.absorber_strength);
  CHECK(back.physics.trap_omega_override == c.physics.trap_omega_override);
  CHECK_FALSE(back.physics.trap_center_override);
  CHECK(*back.experiment.grid == *c.experiment.grid);
  CHECK(back.sweep == c.sweep);
  CHECK(back.prepare_kz0 == c.prepare_kz0);
  CHECK(back.converge_t_final == c.converge_t_final);
  CHECK(back.experiment.use_abs);
  CHECK(back.experiment.evolve.startup_steps == 0);
}

TEST_CASE("sweep spec: text round trip") {
  SweepSpec s;
  s.z0_values = {1.5 * um, 3.0 * um, 1.0 / 3.0 * um};
  s.sigma_rules = {{SigmaRule::Kind::ratio, 2.0 / 3.0}, {SigmaRule::Kind::fixed, 0.25 * um}};
  s.window = 3 * ms;
  s.reference = ReferencePacket::fitted_gaussian;
  CHECK(parse_sweep(sweep_to_text(s)) == s);
  CHECK(parse_sweep(sweep_to_text(SweepSpec{})) == SweepSpec{});
  CHECK_THROWS_AS(parse_sweep("[sweep]\nspeed = 3\n"), ConfigError);
  CHECK_THROWS_AS(parse_sweep("window = 2ms\n"), ConfigError);
}

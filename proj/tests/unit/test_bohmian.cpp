#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "helpers.hpp"
#include "qpot/bohmian.hpp"
#include "qpot/errors.hpp"
#include "qpot/potentials.hpp"
#include "qpot/propagator.hpp"

using namespace qpot;
using testing::ms;
using testing::um;

namespace {

ProfileSpec cosine(const PhysicalParams& p) { return ProfileSpec::from(p); }

RealField density_of(const Wavefunction& psi) { return RealField(psi.grid, psi.density()); }

// Untruncated rho = P^2 on a grid that starts at z_lo.
RealField bare_profile_density(const Grid1D& g, const PhysicalParams& p, const ProfileSpec& spec) {
  RealField rho(g);
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double pz = engineered_profile(g.z(i), p, spec);
    rho.values[i] = pz * pz;
  }
  return rho;
}

}  // namespace

TEST_CASE("madelung: real wavefunction has no phase or flow") {
  const Wavefunction psi = gaussian_packet(testing::default_grid(), 3 * um, 1 * um);
  const PhysicalParams p;
  const MadelungFields f = madelung_decompose(psi, p.mass, p.hbar);
  for (std::size_t i = 0; i < psi.size(); ++i) {
    if (f.phase.valid[i]) CHECK(f.phase.values[i] == 0.0);
    if (f.velocity.valid[i]) CHECK(f.velocity.values[i] == 0.0);
  }
  CHECK(trapezoid(f.density.values, psi.grid.dz()) == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("madelung: plane-wave modulation gives hbar k / m") {
  const PhysicalParams p;
  const Grid1D g = testing::default_grid();
  Wavefunction psi = gaussian_packet(g, 5 * um, 1 * um);
  const double k = 1.0 / um;
  for (std::size_t i = 0; i < g.size(); ++i) psi.values[i] *= std::polar(1.0, k * g.z(i));
  const MadelungFields f = madelung_decompose(psi, p.mass, p.hbar);
  const double expected = p.hbar * k / p.mass;
  CHECK(expected / (um / ms) == doctest::Approx(0.732).epsilon(2e-3));
  const double kdz = k * g.dz();
  std::size_t checked = 0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (!f.velocity.valid[i]) continue;
    // Central difference: Im(psi_i* (psi_{i+1} - psi_{i-1})) = |psi_i| (|psi_{i+1}| + |psi_{i-1}|) sin(k dz).
    const double envelope = (std::abs(psi.values[i + 1]) + std::abs(psi.values[i - 1])) / (2 * std::abs(psi.values[i]));
    CHECK(f.velocity.values[i] == doctest::Approx(expected * envelope * std::sin(kdz) / kdz).epsilon(1e-9));
    ++checked;
  }
  CHECK(f.velocity.values[g.nearest_index(5 * um)] == doctest::Approx(expected).epsilon(1e-5));
  CHECK(checked > g.size() / 2);
  // Unwrapped phase grows linearly.
  const std::size_t a = g.nearest_index(4 * um), b = g.nearest_index(6 * um);
  CHECK((f.phase.values[b] - f.phase.values[a]) / p.hbar == doctest::Approx(k * (g.z(b) - g.z(a))).epsilon(1e-9));

  Wavefunction rotated = psi;
  for (auto& v : rotated.values) v *= std::polar(1.0, 2.2);
  const MadelungFields r = madelung_decompose(rotated, p.mass, p.hbar);
  for (std::size_t i = 0; i < g.size(); ++i) {
    CHECK(r.velocity.valid[i] == f.velocity.valid[i]);
    if (f.velocity.valid[i]) CHECK(r.velocity.values[i] == doctest::Approx(f.velocity.values[i]).epsilon(1e-9));
  }
}

TEST_CASE("quantum_potential: uniform density is flat") {
  const Grid1D g(1 * um, 201);
  const PhysicalParams p;
  const QField q = quantum_potential(RealField(g, std::vector<double>(g.size(), 3.0)), p.mass, p.hbar);
  for (std::size_t i = 0; i < g.size(); ++i)
    if (q.valid[i]) CHECK(q.values[i] == doctest::Approx(0.0).scale(1e-40));
  CHECK_FALSE(q.valid[0]);
  CHECK_FALSE(q.valid[g.size() - 1]);
}

TEST_CASE("quantum_potential: Gaussian closed form") {
  const PhysicalParams p;
  const Grid1D g = testing::default_grid();
  const double z0 = 5 * um, s = 1 * um;
  const QField q = quantum_potential(density_of(gaussian_packet(g, z0, s)), p.mass, p.hbar);
  const double at_centre = p.hbar * p.hbar / (4 * p.mass * s * s);
  CHECK(at_centre == doctest::Approx(1.93e-32).epsilon(2e-3));
  CHECK(q.values[g.nearest_index(z0)] == doctest::Approx(at_centre).epsilon(1e-6));
  for (double zu : {3.0, 4.0, 4.5, 5.7, 6.5, 7.5}) {
    const std::size_t i = g.nearest_index(zu * um);
    const double d = g.z(i) - z0;
    const double expected = p.hbar * p.hbar / (2 * p.mass) * (1 / (2 * s * s) - d * d / (4 * s * s * s * s));
    CHECK(q.values[i] == doctest::Approx(expected).epsilon(1e-6).scale(at_centre));
  }
  // Three-point stencil is less accurate but still close.
  const QField q3 = quantum_potential(density_of(gaussian_packet(g, z0, s)), p.mass, p.hbar, Stencil::central3);
  CHECK(q3.values[g.nearest_index(z0)] == doctest::Approx(at_centre).epsilon(1e-4));
}

TEST_CASE("quantum_potential: invariant under density scaling") {
  const PhysicalParams p;
  const Grid1D g(10 * um, 1001);
  const RealField rho = density_of(engineered_packet(g, p, cosine(p)));
  const QField q = quantum_potential(rho, p.mass, p.hbar);
  double q_max = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i)
    if (q.valid[i]) q_max = std::max(q_max, std::abs(q.values[i]));
  for (double c : {4.0, 0.25, 3.0, 1e-7}) {
    RealField scaled = rho;
    for (auto& v : scaled.values) v *= c;
    const QField qc = quantum_potential(scaled, p.mass, p.hbar);
    for (std::size_t i = 0; i < g.size(); ++i) {
      REQUIRE(qc.valid[i] == q.valid[i]);
      if (q.valid[i]) CHECK(std::abs(qc.values[i] - q.values[i]) <= 1e-12 * q_max);
    }
  }
}

TEST_CASE("quantum_potential: masking of floor, nodes and empty fields") {
  const PhysicalParams p;
  const Grid1D g = testing::default_grid();
  const RealField rho = density_of(engineered_packet(g, p, cosine(p)));
  const QField q = quantum_potential(rho, p.mass, p.hbar);
  for (double node : profile_nodes(p, cosine(p), 0.2 * um, 10 * um)) {
    const std::size_t k = g.nearest_index(node);
    for (std::size_t j = k - 2; j <= k + 2; ++j) CHECK_FALSE(q.valid[j]);
  }
  // Far tail below the amplitude floor is masked.
  const Grid1D wide(15 * um, 6144);
  const QField tail = quantum_potential(density_of(engineered_packet(wide, p, cosine(p))), p.mass, p.hbar);
  CHECK_FALSE(tail.valid[wide.size() - 10]);
  CHECK(tail.valid[wide.nearest_index(p.z0)]);
  CHECK_THROWS_AS(quantum_potential(RealField(g), p.mass, p.hbar), EmptyFieldError);
}

TEST_CASE("quantum_potential: untruncated profile cancels Casimir-Polder") {
  const PhysicalParams p;
  const Grid1D g(0.25 * um, 8.05 * um, 3201);
  ProfileSpec sine = cosine(p);
  sine.c1 = 0;
  sine.c2 = 1;
  for (const auto& spec : {cosine(p), sine}) {
    const QField q = quantum_potential(bare_profile_density(g, p, spec), p.mass, p.hbar);
    double worst = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
      const double z = g.z(i);
      if (!q.valid[i] || z < 0.3 * um || z > 8 * um) continue;
      const double v = casimir_polder(z, p);
      worst = std::max(worst, std::abs(q.values[i] + v) / std::abs(v));
    }
    CHECK(worst < 1e-3);
  }
}

TEST_CASE("residual_potential: value at the envelope centre") {
  const PhysicalParams p;
  const double q0 = residual_potential(p.z0, p, cosine(p));
  // The bracket reduces to 1 at z = z0: hbar^2 / (4 m sigma^2).
  CHECK(q0 == doctest::Approx(p.hbar * p.hbar / (4 * p.mass * p.sigma * p.sigma)).epsilon(1e-12));
  CHECK(q0 == doctest::Approx(1.93e-32).epsilon(2e-3));
}

TEST_CASE("residual_potential: compact and expanded forms agree") {
  const PhysicalParams p;
  std::mt19937_64 rng(12345);
  std::uniform_real_distribution<double> pick(0.2, 8.0);
  for (const auto& [z0, s] : {std::pair{2.3, 1.0}, std::pair{3.0, 1.0}, std::pair{1.0, 2.0 / 3.0}}) {
    ProfileSpec spec = cosine(p);
    spec.z0 = z0 * um;
    spec.sigma = s * um;
    int tested = 0;
    while (tested < 100) {
      const double z = pick(rng) * um;
      double a = 0, b = 0;
      try {
        a = residual_potential(z, p, spec);
        b = residual_potential_expanded(z, p, spec);
      } catch (const NodeSingularity&) {
        continue;
      }
      CHECK(b == doctest::Approx(a).epsilon(1e-9));
      ++tested;
    }
  }
}

TEST_CASE("residual_potential: node singularity") {
  const PhysicalParams p;
  const double node = profile_nodes(p, cosine(p), 0.5 * um, 2 * um).front();
  CHECK_THROWS_AS(residual_potential(node, p, cosine(p)), NodeSingularity);
  CHECK_THROWS_AS(residual_potential_expanded(node, p, cosine(p)), NodeSingularity);
}

TEST_CASE("residual_potential: inverse-sigma-squared scaling") {
  const PhysicalParams p;
  ProfileSpec narrow = cosine(p);
  ProfileSpec wide = narrow;
  wide.sigma = 10 * narrow.sigma;
  // Exactly 100x at the centre, where only the sigma^-2 term survives.
  CHECK(residual_potential(p.z0, p, narrow) / residual_potential(p.z0, p, wide) == doctest::Approx(100.0).epsilon(1e-12));
  // Elsewhere sigma^2 Q_res approaches a sigma-independent limit, with a sigma^-2 correction.
  for (double zu : {0.4, 0.8, 1.5, 3.0, 5.0, 7.0}) {
    const double z = zu * um;
    const double u = z - p.z0;
    const double limit = p.hbar * p.hbar / (4 * p.mass) * (1 + 2 * u * engineered_profile_derivative(z, p, narrow) /
                                                                     engineered_profile(z, p, narrow));
    const double s1 = narrow.sigma, s10 = wide.sigma;
    const double gap1 = std::abs(s1 * s1 * residual_potential(z, p, narrow) - limit);
    const double gap10 = std::abs(s10 * s10 * residual_potential(z, p, wide) - limit);
    CHECK(gap10 == doctest::Approx(gap1 / 100).epsilon(1e-9));
  }
}

TEST_CASE("residual_potential: near-surface growth like 1/z^2") {
  const PhysicalParams p;
  const double length = p.profile_length();
  std::vector<double> lx, ly;
  // Points where |tan(L/z)| = 1 keep the oscillating factor fixed.
  for (int n = 0; n < 40; ++n) {
    const double z = length / (std::numbers::pi / 4 + n * std::numbers::pi / 2);
    if (z < 0.2 * um || z > 0.5 * um) continue;
    lx.push_back(std::log(z));
    ly.push_back(std::log(std::abs(residual_potential(z, p, cosine(p)))));
  }
  REQUIRE(lx.size() >= 3);
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < lx.size(); ++i) mx += lx[i], my += ly[i];
  mx /= lx.size();
  my /= ly.size();
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < lx.size(); ++i) sxy += (lx[i] - mx) * (ly[i] - my), sxx += (lx[i] - mx) * (lx[i] - mx);
  const double exponent = -sxy / sxx;
  CHECK(exponent >= 1.8);
  CHECK(exponent <= 2.2);
}

TEST_CASE("weighted_fields: finite at nodes, zero where the density vanishes") {
  const PhysicalParams p;
  const Grid1D g = testing::default_grid();
  const WeightedFields f = weighted_fields(g, p, cosine(p));
  double wq_max = 0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    CHECK(std::isfinite(f.weighted_q.values[i]));
    CHECK(std::isfinite(f.weighted_residual.values[i]));
    wq_max = std::max(wq_max, std::abs(f.weighted_q.values[i]));
    if (f.density.values[i] == 0.0) {
      CHECK(f.weighted_q.values[i] == 0.0);
      CHECK(f.weighted_residual.values[i] == 0.0);
    }
  }
  // At a node rho Q -> -(hbar^2/2m) P P'' e^2 -> 0 smoothly; neighbours stay bounded.
  for (double node : profile_nodes(p, cosine(p), 0.2 * um, 10 * um)) {
    const std::size_t k = g.nearest_index(node);
    for (std::size_t j = k - 3; j <= k + 3; ++j) CHECK(std::abs(f.weighted_q.values[j]) < wq_max);
  }
  const WeightedPeaks peaks = weighted_peaks(f, p);
  CHECK(peaks.weighted_q > 0);
  CHECK(peaks.weighted_residual > 0);
  // Doubling sigma shrinks the residual peak.
  const WeightedPeaks wide = weighted_peaks(weighted_fields(g, p, [&] {
                                              ProfileSpec s = cosine(p);
                                              s.sigma = 2 * um;
                                              return s;
                                            }()),
                                            p);
  CHECK(wide.weighted_residual < peaks.weighted_residual / 3);
}

namespace {

// Velocity snapshots of a freely spreading Gaussian, taken from the propagator.
std::vector<VelocitySnapshot> free_gaussian_flow(const PhysicalParams& p, const Grid1D& g, double z0, double s,
                                                 double t_final, std::size_t count) {
  PhysicalParams free = p;
  const ComplexPotential zero(g);
  EvolveConfig cfg;
  cfg.dt = 1e-7;
  cfg.t_final = t_final;
  cfg.snapshot_stride = static_cast<std::size_t>(std::llround(t_final / cfg.dt / static_cast<double>(count)));
  cfg.record_stride = cfg.snapshot_stride;
  cfg.store_wavefunctions = true;
  const ExperimentRecord rec = evolve(gaussian_packet(g, z0, s), zero, free, cfg);
  std::vector<VelocitySnapshot> snaps;
  for (std::size_t k = 0; k < rec.states.size(); ++k)
    snaps.push_back({rec.snapshots[k].time, madelung_decompose(rec.states[k], p.mass, p.hbar).velocity});
  return snaps;
}

}  // namespace

TEST_CASE("trajectories: stationary state keeps particles in place") {
  const PhysicalParams p;
  const Grid1D g = testing::default_grid();
  const RealField u = madelung_decompose(gaussian_packet(g, 5 * um, 1 * um), p.mass, p.hbar).velocity;
  const std::vector<VelocitySnapshot> snaps{{0.0, u}, {1 * ms, u}, {2 * ms, u}};
  const Trajectory t = trajectory_integrate(snaps, 4.2 * um);
  for (double z : t.positions) CHECK(std::abs(z - 4.2 * um) < g.dz());
  CHECK(t.times.back() == doctest::Approx(2 * ms));
}

TEST_CASE("trajectories: free spreading flow, analytic comparison and ordering") {
  const PhysicalParams p;
  // Wide enough that the envelope is negligible at both walls.
  const Grid1D g(20 * um, 8192);
  const double z0 = 10 * um, s = 1 * um;
  const auto snaps = free_gaussian_flow(p, g, z0, s, 2 * ms, 20);
  const std::vector<double> starts{z0 - s, z0 - 0.3 * s, z0 + 0.3 * s, z0 + s};
  const auto paths = trajectory_bundle(snaps, starts, 4);
  REQUIRE(paths.size() == starts.size());
  const double rate = p.hbar / (2 * p.mass * s * s);
  for (std::size_t j = 0; j < starts.size(); ++j) {
    const auto& path = paths[j];
    const bool outward = starts[j] > z0;
    for (std::size_t k = 1; k < path.positions.size(); ++k) {
      if (outward) CHECK(path.positions[k] > path.positions[k - 1]);
      else CHECK(path.positions[k] < path.positions[k - 1]);
    }
    const double t = path.times.back();
    const double expected = z0 + (starts[j] - z0) * std::sqrt(1 + rate * rate * t * t);
    CHECK(path.positions.back() == doctest::Approx(expected).epsilon(1e-4));
  }
  for (std::size_t k = 0; k < paths[0].positions.size(); ++k)
    for (std::size_t j = 1; j < paths.size(); ++j) CHECK(paths[j].positions[k] > paths[j - 1].positions[k]);
  // Serial and parallel bundles agree exactly.
  const auto serial = trajectory_bundle(snaps, starts, 1);
  for (std::size_t j = 0; j < starts.size(); ++j) CHECK(serial[j].positions == paths[j].positions);
}

TEST_CASE("trajectories: leaving the valid region") {
  const PhysicalParams p;
  const Grid1D g = testing::default_grid();
  const RealField u = madelung_decompose(gaussian_packet(g, 5 * um, 0.3 * um), p.mass, p.hbar).velocity;
  const std::vector<VelocitySnapshot> snaps{{0.0, u}, {1 * ms, u}};
  CHECK_THROWS_AS(trajectory_integrate(snaps, 0.5 * um), TrajectoryLost);
  CHECK_THROWS_AS(trajectory_integrate(snaps, 20 * um), TrajectoryLost);
  try {
    trajectory_integrate(snaps, 0.5 * um);
  } catch (const TrajectoryLost& e) {
    CHECK(e.time() == 0.0);
  }
  CHECK_THROWS_AS(trajectory_integrate({snaps[0]}, 5 * um), ConfigError);
}

TEST_CASE("continuity: stationary, spreading and absorbing cases") {
  const PhysicalParams p;
  const Grid1D g = testing::default_grid();
  const double dt = 1e-7;

  const Wavefunction ground = gaussian_packet(g, 5 * um, 1 * um);
  const auto still = madelung_decompose(ground, p.mass, p.hbar);
  CHECK(continuity_residual(still, still, dt, p.delta) < 1e-6);

  const Grid1D wide(20 * um, 8192);
  const ComplexPotential zero(wide);
  const Wavefunction spread0 = gaussian_packet(wide, 10 * um, 1 * um);
  Wavefunction later = spread0;
  for (int k = 0; k < 1000; ++k) later = step(later, zero, p, dt);
  const Wavefunction next = step(later, zero, p, dt);
  const double r = continuity_residual(madelung_decompose(later, p.mass, p.hbar), madelung_decompose(next, p.mass, p.hbar),
                                       dt, p.delta);
  CHECK(r < 1e-2);

  // A packet overlapping the absorber: the identity fails there by construction.
  PhysicalParams abs = p;
  const ComplexPotential lossy = total_potential(g, abs, false);
  const Wavefunction near = gaussian_packet(g, 0.4 * um, 0.15 * um);
  const Wavefunction after = step(near, lossy, abs, dt);
  const auto f0 = madelung_decompose(near, p.mass, p.hbar);
  const auto f1 = madelung_decompose(after, p.mass, p.hbar);
  CHECK(continuity_residual(f0, f1, dt, 0.0) > 10 * continuity_residual(f0, f1, dt, abs.delta + 10 * g.dz()));
}

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "qldrift/dynamics.hpp"
#include "qldrift/rng.hpp"
#include "qldrift/runner/commands.hpp"
#include "qldrift/stats.hpp"

using namespace qldrift;

namespace {

constexpr double kPi = std::numbers::pi;
const double kInvSqrt2Pi = 1.0 / std::sqrt(2.0 * kPi);

SpectrumConfig config(int M, int N, double amp, std::uint64_t seed, SigmaScheme sigma = SigmaScheme::ladder()) {
  SpectrumConfig c;
  c.M = M;
  c.N = N;
  c.amp_scale = amp;
  c.seed = seed;
  c.sigma = std::move(sigma);
  return c;
}

FieldRealization zero_field(int M, int N, double amp) {
  const auto c = config(M, N, amp, 0);
  return FieldRealization::from_amplitudes(c, std::vector<ComplexAmplitude>(c.mode_count()));
}

FieldRealization single_wave(double amp) {
  return FieldRealization::from_amplitudes(config(0, 1, amp, 0, SigmaScheme::all_zero()), {ComplexAmplitude{1.0, 0.0}});
}

double wave_frame_energy(const ParticleState& s, double amp, double coupling) {
  return 0.5 * s.p * s.p + coupling * kInvSqrt2Pi / amp * std::cos(s.q);
}

double pendulum_drift(double coupling_in_dynamics) {
  const auto f = single_wave(1.0);
  const ParticleState init{1.0, 0.5};
  const double dt = 1e-4;
  DynamicsOptions o;
  o.force_coupling = coupling_in_dynamics;
  const auto tr = integrate(f, std::vector<ParticleState>{init}, {0.0, dt, 62832}, o);
  const double e0 = wave_frame_energy(init, 1.0, kWienerForceCoupling);
  double drift = 0.0;
  for (std::size_t k = 0; k < tr.grid.nodes(); ++k)
    drift = std::max(drift, std::abs(wave_frame_energy(tr.at(0, k), 1.0, kWienerForceCoupling) - e0));
  return drift;
}

}  // namespace

TEST_CASE("step cap") {
  CHECK(step_cap(0) == 0.05);
  CHECK(step_cap(3) == 0.05);
  CHECK(step_cap(128) == doctest::Approx(0.2 / 129));
  const auto f = zero_field(10, 1, 1.0);
  const std::vector<ParticleState> init{{0.0, 0.0}};
  CHECK_THROWS_AS(integrate(f, init, {0.0, 0.05, 10}), StepCapError);
  try {
    integrate(f, init, {0.0, 0.05, 10});
  } catch (const StepCapError& e) {
    CHECK(e.required_dt() == doctest::Approx(0.2 / 11));
  }
  CHECK_THROWS_AS(propagate(f, init, 0.0, -0.05, 10), StepCapError);
}

TEST_CASE("zero field gives free flight") {
  const auto f = zero_field(4, 2, 3.0);
  const std::vector<ParticleState> init{{0.5, 0.0}, {-1.0, 0.7}};
  const PathGrid g{0.0, 0.02, 500};
  const auto tr = integrate(f, init, g);
  for (std::size_t i = 0; i < init.size(); ++i)
    for (std::size_t k = 0; k < g.nodes(); k += 50) {
      CHECK(tr.at(i, k).p == init[i].p);
      CHECK(tr.at(i, k).q == doctest::Approx(init[i].q + 3.0 * init[i].p * g.t(k)).epsilon(1e-12));
    }
}

TEST_CASE("single-wave pendulum conserves the wave-frame energy") {
  CHECK(pendulum_drift(kWienerForceCoupling) <= 1e-8);
}

TEST_CASE("flipping the force sign breaks the energy check but not Gaussianity") {
  CHECK(pendulum_drift(-kWienerForceCoupling) > 1e-3);

  // The momentum law is symmetric under kappa -> -kappa.
  const std::vector<ParticleState> init{{0.0, 0.0}};
  std::vector<double> x;
  for (int r = 0; r < 300; ++r) {
    const auto f = realize(config(32, 16, 2.0, derive_seed(12, r)));
    DynamicsOptions o;
    o.force_coupling = -kWienerForceCoupling;
    o.record_stride = 2048;
    const auto tr = integrate(f, init, {0.0, 2.0 * kPi / 2048, 2048}, o);
    x.push_back(tr.at(0, 1).p);
  }
  GaussianityOptions g;
  g.variance = 2.0 * kPi;
  g.variance_rel_tol = 0.25;
  g.check_kurtosis = false;
  CHECK(all_passed(gaussianity_suite(x, g, "P")));
}

TEST_CASE("forward then backward returns to the start") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto f = realize(config(16, 4, 4.0, 300 + seed));
    const std::vector<ParticleState> init{{0.1, 0.2}, {1.3, -0.4}, {2.0, 1.0}};
    const double dt = step_cap(16);
    const std::size_t n = 500;
    const auto fwd = propagate(f, init, 0.0, dt, n);
    const auto back = propagate(f, fwd, dt * n, -dt, n);
    for (std::size_t i = 0; i < init.size(); ++i) {
      CHECK(std::abs(back[i].q - init[i].q) <= 1e-9);
      CHECK(std::abs(back[i].p - init[i].p) <= 1e-9);
    }
  }
}

TEST_CASE("the scheme is second order") {
  const auto f = realize(config(4, 2, 1.0, 41));
  const std::vector<ParticleState> init{{0.3, 0.1}};
  const double T = 2.0;
  auto run = [&](double dt) { return propagate(f, init, 0.0, dt, static_cast<std::size_t>(std::lround(T / dt)))[0]; };
  const auto ref = run(0.02 / 64);
  const auto a = run(0.02), b = run(0.01);
  const double ea = std::hypot(a.q - ref.q, a.p - ref.p);
  const double eb = std::hypot(b.q - ref.q, b.p - ref.p);
  CHECK(ea / eb == doctest::Approx(4.0).epsilon(0.12));
}

TEST_CASE("particles sharing a field are independent of their batch") {
  const auto f = realize(config(12, 3, 2.0, 8));
  const std::vector<ParticleState> init{{0.0, 0.0}, {1.0, 0.5}, {4.0, -0.3}};
  const PathGrid g{0.0, step_cap(12), 400};
  const auto all = integrate(f, init, g);
  for (std::size_t i = 0; i < init.size(); ++i) {
    const auto one = integrate(f, std::vector<ParticleState>{init[i]}, g);
    for (std::size_t k = 0; k < g.nodes(); ++k) {
      REQUIRE(one.at(0, k).q == all.at(i, k).q);
      REQUIRE(one.at(0, k).p == all.at(i, k).p);
    }
  }
}

TEST_CASE("recording stride and node lookup") {
  const auto f = realize(config(8, 2, 1.0, 2));
  const std::vector<ParticleState> init{{0.0, 0.0}};
  DynamicsOptions o;
  o.record_stride = 8;
  const auto full = integrate(f, init, {0.0, 0.02, 64});
  const auto thin = integrate(f, init, {0.0, 0.02, 64}, o);
  CHECK(thin.grid.nodes() == 9);
  CHECK(thin.at(0, 3).p == full.at(0, 24).p);
  CHECK(thin.node_at(0.33) == 2);
  o.record_stride = 7;
  CHECK_THROWS_AS(integrate(f, init, {0.0, 0.02, 64}, o), std::invalid_argument);
}

TEST_CASE("resonance coverage warning") {
  const auto c = config(128, 32, 32.0, 0);
  CHECK_FALSE(resonance_coverage_warning(c, {0.0, 0.0}, 2.0 * kPi).empty());
  CHECK(resonance_coverage_warning(config(128, 32, 4.0, 0), {0.0, 0.0}, 2.0 * kPi).empty());
}

TEST_CASE("separation condition") {
  SUBCASE("equal q, p differing by 1") {
    const std::vector<ParticleState> s{{0.0, 0.0}, {0.0, 1.0}};
    const auto c = check_separation(s, 1.0);
    CHECK(c.margin(0, 1) == doctest::Approx(1.0));
    CHECK(c.valid);
  }
  SUBCASE("identical initial data") {
    const std::vector<ParticleState> s{{0.4, 0.2}, {0.4, 0.2}};
    for (double cc : {0.1, 1.0, 10.0}) {
      const auto c = check_separation(s, cc);
      CHECK(c.margin(0, 1) == 0.0);
      CHECK_FALSE(c.valid);
    }
  }
  SUBCASE("q difference pi") {
    const std::vector<ParticleState> s{{0.0, 0.0}, {kPi, 0.0}};
    const auto c = check_separation(s, 1.0);
    CHECK(c.margin(0, 1) == doctest::Approx(2.0));
    CHECK(c.valid);
  }
}

TEST_CASE("Wiener oracle") {
  const ParticleState p0{0.3, 1.0};
  SUBCASE("Var(P(2 pi) - p0) = 2 pi within 3 SE and zero mean at every node") {
    const PathGrid g{0.0, 2.0 * kPi / 16, 16};
    const int n = 10000;
    std::vector<std::vector<double>> by_node(g.nodes());
    for (int j = 0; j < n; ++j) {
      const auto w = wiener_oracle(p0, g, derive_seed(1, j), 2.0);
      for (std::size_t k = 0; k < g.nodes(); ++k) by_node[k].push_back(w.at(0, k).p - p0.p);
    }
    const double v = sample_variance(by_node.back());
    CHECK(std::abs(v - 2.0 * kPi) <= 3.0 * 2.0 * kPi * std::sqrt(2.0 / n));
    for (std::size_t k = 1; k < g.nodes(); ++k) CHECK(std::abs(sample_mean(by_node[k])) <= 3.0 * std::sqrt(g.t(k) / n));
  }
  SUBCASE("Cov(B(h), int_0^h B) = h^2/2") {
    const double h = 0.5;
    const int n = 100000;
    std::vector<double> prod, fine;
    for (int j = 0; j < n; ++j) {
      const auto w = wiener_oracle({0.0, 0.0}, {0.0, h, 1}, derive_seed(2, j), 1.0);
      prod.push_back(w.at(0, 1).p * w.at(0, 1).q);
    }
    // Brute-force reference: fine Riemann sums of independent Gaussian paths.
    std::mt19937_64 gen(7);
    std::normal_distribution<double> z;
    const int steps = 400;
    const double d = h / steps;
    for (int j = 0; j < 20000; ++j) {
      double b = 0.0, ib = 0.0;
      for (int s = 0; s < steps; ++s) {
        const double nb = b + std::sqrt(d) * z(gen);
        ib += 0.5 * (b + nb) * d;
        b = nb;
      }
      fine.push_back(b * ib);
    }
    const double se = std::sqrt(sample_variance(prod) / n);
    CHECK(std::abs(sample_mean(prod) - h * h / 2.0) <= 3.0 * se);
    const double se_fine = std::sqrt(sample_variance(fine) / fine.size());
    CHECK(std::abs(sample_mean(fine) - h * h / 2.0) <= 3.0 * se_fine);
  }
  SUBCASE("position follows the integrated momentum") {
    const auto w = wiener_oracle(p0, {0.0, 0.01, 1000}, 3, 0.0);
    for (std::size_t k = 0; k < w.grid.nodes(); k += 100) CHECK(w.at(0, k).q == p0.q);
  }
}

TEST_CASE("Ito and Stratonovich solutions") {
  SUBCASE("zero noise is free flight for both") {
    const std::vector<double> zeros(100, 0.0);
    const ParticleState s{0.2, 0.7};
    const auto a = ito_euler_path(s, 0.01, 2.0, zeros, zeros);
    const auto b = stratonovich_heun_path(s, 0.01, 2.0, zeros, zeros);
    for (std::size_t k = 0; k < a.size(); ++k) {
      CHECK(a[k].p == s.p);
      CHECK(b[k].p == s.p);
      CHECK(a[k].q == doctest::Approx(s.q + 2.0 * s.p * 0.01 * k).epsilon(1e-12));
      CHECK(b[k].q == doctest::Approx(s.q + 2.0 * s.p * 0.01 * k).epsilon(1e-12));
    }
  }
  SUBCASE("the two laws agree at dt = 1e-3 over 2000 paths") {
    const auto rs = stratonovich_equivalence_probe({0.0, 0.0}, {0.0, 1e-3, 6283}, 99, {});
    for (const auto& r : rs) {
      CAPTURE(r.name);
      CAPTURE(r.value);
      CHECK(r.passed);
    }
    CHECK(rs.front().threshold == doctest::Approx(1.36 * std::sqrt(2.0 / 2000) * 1.5));
  }
}

TEST_CASE("pair process") {
  SUBCASE("zero noise at (pi/2, 0) is a fixed point") {
    PairOptions o;
    o.noise_scale = 0.0;
    const auto p = simulate_pair({kPi / 2.0, 0.0}, {0.0, 1e-3, 1000}, 1, o);
    for (std::size_t k = 0; k < p.grid.nodes(); ++k) {
      CHECK(p.x[k] == kPi / 2.0);
      CHECK(p.y[k] == 0.0);
      CHECK(p.z[k] == 0.0);
    }
  }
  SUBCASE("excluded points and oversized steps are rejected") {
    CHECK_THROWS_AS(simulate_pair({0.0, 0.0}, {0.0, 1e-3, 10}, 1), std::invalid_argument);
    CHECK_THROWS_AS(simulate_pair({kPi, 0.0}, {0.0, 1e-3, 10}, 1), std::invalid_argument);
    CHECK_THROWS_AS(simulate_pair({1.0, 0.0}, {0.0, 2e-3, 10}, 1), std::invalid_argument);
  }
  SUBCASE("positivity and drift bounds on 1000 paths") {
    std::vector<PairPath> paths;
    PairExtremes ext;
    for (std::uint64_t j = 0; j < 1000; ++j) {
      const auto full = simulate_pair({kPi / 2.0, 0.0}, {0.0, 1e-3, 10000}, j);
      ext.include(full);
      paths.push_back(runner::subsample(full, 100));
    }
    const std::vector<double> times{1.0, 5.0, 10.0};
    const auto rs = pair_bound_reports(paths, times, &ext);
    for (const auto& r : rs) {
      CAPTURE(r.name);
      CHECK(r.passed);
    }
  }
  SUBCASE("z is log(sin^2 x + y^2)") {
    const PairState s{0.7, -0.2};
    CHECK(s.z() == doctest::Approx(std::log(std::sin(0.7) * std::sin(0.7) + 0.04)));
  }
}

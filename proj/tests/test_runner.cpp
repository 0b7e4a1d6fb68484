#include <doctest.h>

#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "qldrift/runner/acceptance.hpp"
#include "qldrift/runner/commands.hpp"
#include "qldrift/runner/config.hpp"
#include "qldrift/runner/io.hpp"
#include "qldrift/runner/workers.hpp"
#include "qldrift/stats.hpp"

using namespace qldrift;
using namespace qldrift::runner;
namespace fs = std::filesystem;

namespace {

constexpr double kPi = std::numbers::pi;

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / "qldrift_unit" / name;
  fs::remove_all(p);
  return p;
}

ExperimentConfig from_text(const std::string& text, const fs::path& out) {
  auto c = parse_config(text);
  c.output_dir = out.string();
  return c;
}

std::vector<std::vector<std::string>> read_csv(const fs::path& p) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(read_text(p));
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    rows.push_back(cells);
  }
  return rows;
}

int cli(const std::string& args) {
  const std::string cmd = std::string(QLDRIFT_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

const RunContext kOne{1, nullptr};

}  // namespace

TEST_CASE("config parsing") {
  SUBCASE("dotted keys, comments and lists") {
    const auto c = parse_config(
        "# comment\n"
        "spectrum.M = 12   # trailing\n"
        "spectrum.N = 3\n"
        "particles.q0 = 0, 1.5\n"
        "particles.p0 = 0.25, -1\n"
        "run.suites = gaussianity, qv\n");
    CHECK(c.spectrum.M == 12);
    CHECK(c.spectrum.N == 3);
    REQUIRE(c.particles.size() == 2);
    CHECK(c.particles[1].q == 1.5);
    CHECK(c.particles[1].p == -1.0);
    CHECK(c.suites == std::vector<std::string>{"gaussianity", "qv"});
  }
  SUBCASE("errors") {
    CHECK_THROWS_AS(parse_config(""), ConfigError);
    CHECK_THROWS_AS(parse_config("# only a comment\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("spectrum.Q = 1\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("spectrum.M = 1\nspectrum.M = 2\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("spectrum.M = many\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("run.horizon_periods = 0\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("sweep.axis = dt\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("preset = nope\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("particles.q0 = 0, 1\nparticles.p0 = 0\n"), ConfigError);
  }
  SUBCASE("presets load first and keys override them") {
    const auto c = parse_config("spectrum.N = 8\npreset = dense\n");
    CHECK(c.spectrum.M == 128);
    CHECK(c.spectrum.N == 8);
    CHECK(c.spectrum.amp_scale == 32.0);
    CHECK(c.particles.size() == 8);
    CHECK(c.repetitions == 400);
    for (const auto& name : preset_names()) CHECK_NOTHROW(preset(name).validate());
  }
  SUBCASE("the echo parses back to the same settings") {
    const auto c = parse_config("preset = be\nrun.seed = 99\ngrid.dt = 0.0123\n");
    const auto again = parse_config(to_config_text(c));
    CHECK(echo(again) == echo(c));
  }
  SUBCASE("horizon and grids") {
    const auto c = parse_config("spectrum.M = 31\nrun.horizon_periods = 2\ngrid.record_stride = 10\n");
    CHECK(c.horizon() == doctest::Approx(4.0 * kPi));
    const auto g = c.particle_grid();
    CHECK(g.dt <= step_cap(31));
    CHECK(g.n_steps % 10 == 0);
    CHECK(g.t_end() == doctest::Approx(4.0 * kPi));
    CHECK(c.field_grid().dt <= 2.0 * kPi / 512);
    CHECK(c.field_grid().t_end() == doctest::Approx(4.0 * kPi));
  }
  SUBCASE("format_double round-trips") {
    for (double v : {0.1, 1.0 / 3.0, 2.0 * kPi, 1e-300, 12345678.0}) CHECK(std::stod(format_double(v)) == v);
  }
}

TEST_CASE("worker count from the environment") {
  setenv("QLDRIFT_WORKERS", "3", 1);
  CHECK(default_worker_count() == 3);
  setenv("QLDRIFT_WORKERS", "zero", 1);
  CHECK_THROWS_AS(default_worker_count(), std::invalid_argument);
  unsetenv("QLDRIFT_WORKERS");
  CHECK(default_worker_count() >= 1);
}

TEST_CASE("parallel_map keeps index order and rethrows") {
  const auto v = parallel_map(100, 8, [](std::size_t i) { return i * i; });
  for (std::size_t i = 0; i < v.size(); ++i) CHECK(v[i] == i * i);
  CHECK_THROWS_AS(parallel_map(10, 4,
                               [](std::size_t i) {
                                 if (i == 7) throw std::runtime_error("seven");
                                 return i;
                               }),
                  std::runtime_error);
}

TEST_CASE("field command") {
  SUBCASE("single constant mode: u is linear in t times alpha/sqrt(2 pi)") {
    const auto dir = scratch("field_const");
    const auto c = from_text("spectrum.M = 0\nspectrum.N = 1\nrun.repetitions = 1\nrun.seed = 5\n", dir);
    const auto out = cmd_field(c, kOne);
    REQUIRE(out.files == std::vector<std::string>{"field_00000.csv"});
    const auto alpha = make_field(c, repetition_seed(c.master_seed, 0)).alpha(0, 1);
    const auto rows = read_csv(dir / "field_00000.csv");
    CHECK(rows.front() == std::vector<std::string>{"t", "re_u", "im_u"});
    REQUIRE(rows.size() == 514);
    for (std::size_t k = 1; k < rows.size(); k += 37) {
      const double t = std::stod(rows[k][0]);
      // The ladder places sigma_1 = 1, so the single column is the m = 0
      // mode at frequency 1; compare against the closed form.
      const auto expect = alpha / std::sqrt(2.0 * kPi) * std::complex<double>(std::sin(t), std::cos(t) - 1.0);
      CHECK(std::stod(rows[k][1]) == doctest::Approx(expect.real()).epsilon(1e-12).scale(1.0));
      CHECK(std::stod(rows[k][2]) == doctest::Approx(expect.imag()).epsilon(1e-12).scale(1.0));
    }
    const auto manifest = nlohmann::json::parse(read_text(dir / "manifest.json"));
    CHECK(manifest["command"] == "field");
    CHECK(manifest["seeds"].size() == 1);
    CHECK_FALSE(manifest["warnings"].empty());
  }
  SUBCASE("constant mode with zero sigma") {
    const auto dir = scratch("field_zero_sigma");
    const auto c = from_text("spectrum.M = 0\nspectrum.N = 1\nspectrum.sigma = zero\nrun.seed = 5\n", dir);
    cmd_field(c, kOne);
    const auto alpha = make_field(c, repetition_seed(c.master_seed, 0)).alpha(0, 1);
    const auto rows = read_csv(dir / "field_00000.csv");
    for (std::size_t k = 1; k < rows.size(); k += 51) {
      const double t = std::stod(rows[k][0]);
      CHECK(std::stod(rows[k][1]) == doctest::Approx(t * alpha.real() / std::sqrt(2.0 * kPi)).epsilon(1e-12));
      CHECK(std::stod(rows[k][2]) == doctest::Approx(t * alpha.imag() / std::sqrt(2.0 * kPi)).epsilon(1e-12));
    }
  }
  SUBCASE("identical config and seed give byte-identical files") {
    const std::string text = "spectrum.M = 16\nspectrum.N = 4\nrun.repetitions = 3\nrun.seed = 11\n";
    const auto a = scratch("field_a"), b = scratch("field_b");
    cmd_field(from_text(text, a), kOne);
    cmd_field(from_text(text, b), RunContext{4, nullptr});
    for (const char* f : {"field_00000.csv", "field_00001.csv", "field_00002.csv"})
      CHECK(read_text(a / f) == read_text(b / f));
  }
  SUBCASE("inline gaussianity suite writes verdicts") {
    const auto dir = scratch("field_suite");
    const auto c = from_text(
        "spectrum.M = 32\nspectrum.N = 16\ngrid.dt = 0.19634954084936207\nrun.repetitions = 400\n"
        "run.suites = gaussianity\nrun.seed = 2\n",
        dir);
    const auto out = cmd_field(c, RunContext{2, nullptr});
    CHECK(out.exit_code == kExitPass);
    const auto v = nlohmann::json::parse(read_text(dir / "verdicts.json"));
    CHECK(v["passed"] == true);
    for (const auto& input : v["inputs"]) CHECK(fs::exists(dir / input.get<std::string>()));
  }
}

TEST_CASE("particles command") {
  SUBCASE("zero-field preset gives free-flight rows") {
    const auto dir = scratch("free");
    auto c = from_text("preset = free\nrun.repetitions = 2\n", dir);
    const auto out = cmd_particles(c, kOne);
    const auto rows = read_csv(dir / "trajectories.csv");
    CHECK(rows.front() == std::vector<std::string>{"realization", "particle", "t", "q", "p"});
    for (std::size_t k = 1; k < rows.size(); ++k) {
      const auto l = std::stoul(rows[k][1]);
      const double t = std::stod(rows[k][2]);
      CHECK(std::stod(rows[k][4]) == c.particles[l].p);
      CHECK(std::stod(rows[k][3]) == doctest::Approx(c.particles[l].q + c.spectrum.amp_scale * c.particles[l].p * t)
                                         .epsilon(1e-12));
    }
  }
  SUBCASE("single-column preset warns that N = 1 is outside the limit regime") {
    const auto dir = scratch("be");
    auto c = from_text("preset = be\nrun.repetitions = 1\nrun.horizon_periods = 1\n", dir);
    const auto out = cmd_particles(c, kOne);
    const auto manifest = nlohmann::json::parse(read_text(dir / "manifest.json"));
    bool found = false;
    for (const auto& w : manifest["warnings"]) found = found || w.get<std::string>().find("N = 1") != std::string::npos;
    CHECK(found);
  }
  SUBCASE("byte-identical under 1 and 8 workers") {
    const std::string text =
        "spectrum.M = 16\nspectrum.N = 4\nspectrum.amp_scale = 2\nparticles.q0 = 0, 3\nparticles.p0 = 0, 0\n"
        "grid.record_stride = 8\nrun.repetitions = 12\nrun.seed = 3\n";
    const auto a = scratch("w1"), b = scratch("w8");
    cmd_particles(from_text(text, a), RunContext{1, nullptr});
    cmd_particles(from_text(text, b), RunContext{8, nullptr});
    CHECK(read_text(a / "trajectories.csv") == read_text(b / "trajectories.csv"));
  }
  SUBCASE("step cap violations are rejected") {
    auto c = from_text("spectrum.M = 64\ngrid.dt = 0.01\n", scratch("cap"));
    CHECK_THROWS_AS(cmd_particles(c, kOne), StepCapError);
  }
}

TEST_CASE("pair command") {
  const auto dir = scratch("pair");
  auto c = from_text("preset = pair\nrun.repetitions = 200\nrun.seed = 4\n", dir);
  const auto out = cmd_pair(c, RunContext{2, nullptr});
  CHECK(out.exit_code == kExitPass);
  CHECK(fs::exists(dir / "pairs.csv"));
  CHECK(all_passed(out.reports));
  auto bad = from_text("preset = pair\npair.x0 = 0\npair.y0 = 0\n", scratch("pair_bad"));
  CHECK_THROWS_AS(cmd_pair(bad, kOne), std::invalid_argument);
}

TEST_CASE("sweep command") {
  SUBCASE("a single-value sweep reproduces the plain run") {
    const std::string base = "spectrum.M = 8\nspectrum.N = 2\nrun.repetitions = 2\nrun.seed = 21\n";
    const auto plain = scratch("plain"), sw = scratch("sweep1");
    cmd_field(from_text(base, plain), kOne);
    cmd_sweep(from_text(base + "sweep.axis = N\nsweep.values = 2\n", sw), kOne);
    CHECK(read_text(plain / "field_00001.csv") == read_text(sw / "N_2" / "field_00001.csv"));

    const auto pplain = scratch("pplain"), psw = scratch("psweep1");
    cmd_particles(from_text(base, pplain), kOne);
    cmd_sweep(from_text(base + "sweep.axis = M\nsweep.values = 8\nsweep.command = particles\n", psw), kOne);
    CHECK(read_text(pplain / "trajectories.csv") == read_text(psw / "M_8" / "trajectories.csv"));
  }
  SUBCASE("summary rows") {
    const auto dir = scratch("sweep_summary");
    cmd_sweep(from_text("spectrum.M = 8\ngrid.dt = 0.7853981633974483\nrun.repetitions = 60\n"
                        "sweep.axis = N\nsweep.values = 1, 2\n",
                        dir),
              kOne);
    const auto rows = read_csv(dir / "summary.csv");
    REQUIRE(rows.size() == 3);
    CHECK(rows[0] == std::vector<std::string>{"value", "statistic", "verdict"});
    CHECK(rows[1][0] == "1");
    CHECK((rows[2][2] == "pass" || rows[2][2] == "fail"));
  }
  SUBCASE("invalid axis") {
    auto c = from_text("spectrum.M = 8\n", scratch("sweep_bad"));
    c.sweep.axis = "dt";
    c.sweep.values = {1.0};
    CHECK_THROWS_AS(cmd_sweep(c, kOne), ConfigError);
  }
}

// Known failure: the Edgeworth bias of Re U(2 pi) scales like 1/N and is about
// 1e-3 between N = 16 and N = 64, far below the KS sampling noise at 400
// repetitions, so the ordering across the sweep is close to a coin flip.
TEST_CASE("KS distance is nonincreasing across an N sweep in >= 80% of 20 batches" * doctest::should_fail()) {
  int monotone = 0;
  for (std::uint64_t batch = 0; batch < 20; ++batch) {
    const auto dir = scratch("sweep_N");
    auto c = from_text("spectrum.M = 32\ngrid.dt = 1.5707963267948966\nrun.repetitions = 400\n"
                       "sweep.axis = N\nsweep.values = 4, 16, 64\n",
                       dir);
    c.master_seed = 1000 + batch;
    cmd_sweep(c, kOne);
    const auto rows = read_csv(dir / "summary.csv");
    const double k4 = std::stod(rows[1][1]), k16 = std::stod(rows[2][1]), k64 = std::stod(rows[3][1]);
    monotone += (k16 <= k4 && k64 <= k16);
  }
  CAPTURE(monotone);
  CHECK(monotone >= 16);
}

// Known failure: for the same reason as the fixed-M estimate, paths at
// M = 32 and M = 128 are smooth on the fitted scales.
TEST_CASE("Hoelder exponent stays in [0.35, 0.55] across an M sweep" * doctest::should_fail()) {
  for (int M : {32, 128}) {
    auto c = parse_config("spectrum.N = 64\nrun.seed = 8\nspectrum.M = " + std::to_string(M) + "\n");
    const double dt = 1.0 / 4096;
    const auto f = make_field(c, repetition_seed(c.master_seed, 0));
    const auto U = sample_U_path(f, {0.0, dt, 4 * 4096});
    const double e = holder_exponent(U.values, dt, dyadic_scales(4, 10)).exponent;
    CAPTURE(M);
    CAPTURE(e);
    CHECK(e >= 0.35);
    CHECK(e <= 0.55);
  }
}

TEST_CASE("flipping the force sign fails verification through the energy check") {
  AcceptanceOptions o;
  o.quick = true;
  o.out_dir = scratch("mutation");
  o.force_coupling = -kWienerForceCoupling;
  const auto r8 = run_criterion(8, o);
  CHECK_FALSE(r8.passed);
  bool energy_failed = false;
  for (const auto& s : r8.reports)
    if (s.name == "pendulum energy drift") energy_failed = !s.passed;
  CHECK(energy_failed);
  CHECK(run_criterion(1, o).passed);
  CHECK(run_criterion(4, o).passed);

  o.force_coupling = 0.0;
  CHECK(run_criterion(8, o).passed);
}

TEST_CASE("CLI exit codes") {
  const auto dir = scratch("cli");
  fs::create_directories(dir);
  const auto empty = dir / "empty.conf";
  std::ofstream(empty) << "# nothing here\n";
  const auto good = dir / "good.conf";
  std::ofstream(good) << "spectrum.M = 4\nspectrum.N = 2\nrun.repetitions = 2\n";
  const auto unknown = dir / "unknown.conf";
  std::ofstream(unknown) << "spectrum.X = 4\n";

  CHECK(cli("field --config " + empty.string() + " --out " + (dir / "o1").string()) == 2);
  CHECK(cli("field --config " + unknown.string()) == 2);
  CHECK(cli("field") == 2);
  CHECK(cli("frobnicate") == 2);
  CHECK(cli("field --config " + good.string() + " --reps 0") == 2);
  CHECK(cli("verify --config " + empty.string()) == 2);
  CHECK(cli("field --config " + good.string() + " --seed 7 --out " + (dir / "o2").string()) == 0);
  CHECK(fs::exists(dir / "o2" / "manifest.json"));
  CHECK(cli("particles --config " + good.string() + " --quick --out " + (dir / "o3").string()) == 0);
  CHECK(cli("field --config " + (dir / "missing.conf").string()) == 2);
}

#include "qldrift/runner/commands.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ostream>

#include "qldrift/rng.hpp"
#include "qldrift/runner/io.hpp"
#include "qldrift/runner/workers.hpp"
#include "qldrift/simd/phasor.hpp"
#include "qldrift/stats.hpp"

namespace qldrift::runner {

namespace {

using Clock = std::chrono::steady_clock;

std::string numbered(const char* stem, std::size_t i, const char* ext) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%s_%05zu.%s", stem, i, ext);
  return buf;
}

nlohmann::json grid_json(const PathGrid& g, std::size_t stride) {
  return {{"t0", g.t0}, {"dt", g.dt}, {"n_steps", g.n_steps}, {"record_stride", stride}};
}

nlohmann::json base_manifest(const std::string& command, const ExperimentConfig& config,
                             const std::vector<std::uint64_t>& seeds) {
  nlohmann::json m;
  m["command"] = command;
  m["version"] = QLDRIFT_VERSION;
  m["config"] = echo(config);
  if (!config.preset.empty()) m["preset"] = config.preset;
  m["master_seed"] = config.master_seed;
  m["seeds"] = seeds;
  m["simd"] = simd::active_kernels().name;
  return m;
}

std::vector<std::uint64_t> seeds_for(const ExperimentConfig& config) {
  std::vector<std::uint64_t> s(config.repetitions);
  for (std::size_t i = 0; i < s.size(); ++i) s[i] = repetition_seed(config.master_seed, i);
  return s;
}

void log_line(const RunContext& ctx, const std::string& text) {
  if (ctx.log) *ctx.log << text << '\n';
}

bool wants(const ExperimentConfig& c, const std::string& suite) {
  for (const auto& s : c.suites)
    if (s == suite) return true;
  return false;
}

void check_suites(const ExperimentConfig& c, std::initializer_list<const char*> known, const std::string& command) {
  for (const auto& s : c.suites) {
    bool ok = false;
    for (const char* k : known) ok = ok || s == k;
    if (!ok) throw ConfigError("suite '" + s + "' is not available for the " + command + " command");
  }
}

void finish(CommandOutcome& out, const std::string& command, Clock::time_point start, const RunContext& ctx) {
  const double wall = std::chrono::duration<double>(Clock::now() - start).count();
  out.manifest["files"] = out.files;
  out.manifest["warnings"] = out.warnings;
  out.manifest["wall_time_s"] = wall;
  out.manifest["workers"] = ctx.workers;
  const bool passed = all_passed(out.reports);
  out.manifest["verdict"] = {{"passed", passed}, {"n_reports", out.reports.size()}};
  if (!out.reports.empty()) {
    nlohmann::json v;
    v["command"] = command;
    v["inputs"] = out.files;
    v["passed"] = passed;
    v["reports"] = to_json(out.reports);
    write_json(out.directory / "verdicts.json", v);
    out.manifest["verdict"]["file"] = "verdicts.json";
  }
  write_json(out.directory / "manifest.json", out.manifest);
  out.exit_code = passed ? kExitPass : kExitFailure;
  for (const auto& w : out.warnings) log_line(ctx, "warning: " + w);
  for (const auto& r : out.reports)
    log_line(ctx, std::string(r.passed ? "ok   " : "FAIL ") + r.name + " = " + format_double(r.value));
}

void add_unique(std::vector<std::string>& list, const std::string& w) {
  for (const auto& x : list)
    if (x == w) return;
  list.push_back(w);
}

}  // namespace

std::uint64_t repetition_seed(std::uint64_t master_seed, std::size_t repetition) {
  return derive_seed(master_seed, repetition);
}

FieldRealization make_field(const ExperimentConfig& config, std::uint64_t seed) {
  const auto spectrum = config.realization_spectrum(seed);
  if (config.field == FieldMode::Zero)
    return FieldRealization::from_amplitudes(spectrum, std::vector<ComplexAmplitude>(spectrum.mode_count()));
  return realize(spectrum);
}

std::vector<std::string> config_warnings(const ExperimentConfig& config) {
  std::vector<std::string> w;
  if (config.spectrum.N == 1)
    w.push_back("N = 1 is outside the dense-spectrum limit regime (N -> infinity)");
  if (config.field == FieldMode::Zero) w.push_back("zero field: particles move in free flight");
  return w;
}

CommandOutcome cmd_field(const ExperimentConfig& config, const RunContext& ctx) {
  const auto start = Clock::now();
  config.validate();
  check_suites(config, {"gaussianity"}, "field");
  CommandOutcome out;
  out.directory = config.output_dir;
  ensure_directory(out.directory);
  out.warnings = config_warnings(config);
  const auto seeds = seeds_for(config);
  const PathGrid grid = config.field_grid();
  const std::size_t stride = config.record_stride;

  struct Rep {
    std::string csv;
    std::complex<double> end;
  };
  auto reps = parallel_map(config.repetitions, ctx.workers, [&](std::size_t i) {
    const auto field = make_field(config, seeds[i]);
    const auto path = sample_U_path(field, grid);
    CsvBuffer csv("t,re_u,im_u");
    for (std::size_t k = 0; k < path.values.size(); k += stride)
      csv.field(grid.t(k)).field(path.values[k].real()).field(path.values[k].imag()).end_row();
    return Rep{csv.str(), path.values.back()};
  });
  std::vector<std::complex<double>> ends;
  for (std::size_t i = 0; i < reps.size(); ++i) {
    out.files.push_back(numbered("field", i, "csv"));
    write_text(out.directory / out.files.back(), reps[i].csv);
    ends.push_back(reps[i].end);
    out.endpoints.push_back(reps[i].end.real());
  }

  out.manifest = base_manifest("field", config, seeds);
  out.manifest["grid"] = grid_json(grid, stride);
  out.manifest["columns"] = {"t", "re_u", "im_u"};
  out.manifest["diagnostics"] = [&] {
    const auto d = diagnostics(config.realization_spectrum(0));
    return nlohmann::json{{"s_typ", d.s_typ}, {"dv_box", d.dv_box}, {"tau_disc", d.tau_disc}, {"dv_phi", d.dv_phi}};
  }();

  if (wants(config, "gaussianity")) {
    if (ends.size() < 200) {
      out.warnings.push_back("gaussianity suite skipped: needs at least 200 repetitions");
    } else {
      GaussianityOptions g;
      g.variance = grid.t_end() / 2.0;
      g.variance_rel_tol = 0.10;
      g.check_kurtosis = false;
      out.reports = gaussianity_suite(ends, g, "U(T)");
    }
  }
  finish(out, "field", start, ctx);
  return out;
}

CommandOutcome cmd_particles(const ExperimentConfig& config, const RunContext& ctx) {
  const auto start = Clock::now();
  config.validate();
  check_suites(config, {"gaussianity", "independence", "qv", "diffusion"}, "particles");
  CommandOutcome out;
  out.directory = config.output_dir;
  ensure_directory(out.directory);
  out.warnings = config_warnings(config);
  const auto seeds = seeds_for(config);
  const PathGrid grid = config.particle_grid();

  DynamicsOptions opts;
  opts.force_coupling = config.force_coupling;
  opts.separation_c = config.separation_c;
  opts.record_stride = config.record_stride;

  auto reps = parallel_map(config.repetitions, ctx.workers, [&](std::size_t i) {
    const auto field = make_field(config, seeds[i]);
    return integrate(field, config.particles, grid, opts);
  });

  CsvBuffer csv("realization,particle,t,q,p");
  for (std::size_t r = 0; r < reps.size(); ++r) {
    const auto& tr = reps[r];
    for (std::size_t l = 0; l < tr.particles; ++l)
      for (std::size_t k = 0; k < tr.grid.nodes(); ++k) {
        const auto& s = tr.at(l, k);
        csv.field(std::uint64_t{r}).field(std::uint64_t{l}).field(tr.grid.t(k)).field(s.q).field(s.p).end_row();
      }
    for (const auto& w : tr.warnings) add_unique(out.warnings, w);
  }
  out.files.push_back("trajectories.csv");
  write_text(out.directory / out.files.back(), csv.str());

  out.manifest = base_manifest("particles", config, seeds);
  out.manifest["grid"] = grid_json(grid, config.record_stride);
  out.manifest["step_cap"] = step_cap(config.spectrum.M);
  out.manifest["columns"] = {"realization", "particle", "t", "q", "p"};
  if (config.particles.size() > 1) {
    const auto sep = check_separation(config.particles, config.separation_c);
    out.manifest["separation"] = {{"c", sep.c}, {"valid", sep.valid}, {"margins", sep.pairwise_margins}};
  }

  TrajectoryEnsemble ens;
  ens.grid = reps.empty() ? grid : reps.front().grid;
  ens.particles = config.particles.size();
  ens.initial = config.particles;
  ens.seeds = seeds;
  ens.realizations = std::move(reps);
  const double T = grid.t_end();
  out.endpoints = momentum_increments(ens, 0, T);

  if (wants(config, "gaussianity")) {
    if (ens.realizations.size() < 200) {
      out.warnings.push_back("gaussianity suite skipped: needs at least 200 repetitions");
    } else {
      GaussianityOptions g;
      g.variance = T;
      g.variance_rel_tol = 0.10;
      for (std::size_t l = 0; l < ens.particles; ++l)
        for (auto& r : gaussianity_suite(momentum_increments(ens, l, T), g, "P" + std::to_string(l) + "(T) - p0"))
          out.reports.push_back(std::move(r));
    }
  }
  if (wants(config, "independence")) {
    if (ens.particles < 2 || ens.realizations.size() < 100) {
      out.warnings.push_back("independence suite skipped: needs >= 2 particles and >= 100 repetitions");
    } else {
      IndependenceOptions io;
      io.marginals = false;
      for (auto& r : independence_suite(ens, T, io)) out.reports.push_back(std::move(r));
    }
  }
  if (wants(config, "qv")) {
    std::vector<double> qvs;
    const double rec_dt = ens.grid.dt;
    const auto stride = static_cast<std::size_t>(std::max(1.0, std::floor(0.2 / rec_dt + 1e-9)));
    try {
      for (const auto& tr : ens.realizations) {
        std::vector<double> p(tr.grid.nodes());
        for (std::size_t k = 0; k < p.size(); ++k) p[k] = tr.at(0, k).p;
        qvs.push_back(quadratic_variation(p, stride, rec_dt, config.spectrum.M));
      }
      const double m = sample_mean(qvs);
      out.reports.push_back(StatReport::within("mean QV(P0)", m, 0.85 * T, 1.15 * T, qvs.size()));
    } catch (const std::invalid_argument& e) {
      out.warnings.push_back(std::string("qv suite skipped: ") + e.what());
    }
  }
  if (wants(config, "diffusion")) {
    if (ens.realizations.size() < 2) {
      out.warnings.push_back("diffusion suite skipped: needs at least 2 repetitions");
    } else {
      const auto inc = momentum_increments(ens, 0, T);
      const double d_emp = sample_variance(inc) / (2.0 * T);
      const double d_ref = quasilinear_D(config.realization_spectrum(0), config.particles.front().p).D;
      out.reports.push_back(StatReport::within("D empirical", d_emp, 0.9 * d_ref, 1.1 * d_ref, inc.size()));
    }
  }
  finish(out, "particles", start, ctx);
  return out;
}

PairPath subsample(const PairPath& path, std::size_t stride) {
  stride = std::max<std::size_t>(1, stride);
  PairPath out;
  out.grid = {path.grid.t0, path.grid.dt * static_cast<double>(stride), path.grid.n_steps / stride};
  for (std::size_t k = 0; k < path.x.size(); k += stride) {
    out.x.push_back(path.x[k]);
    out.y.push_back(path.y[k]);
    out.z.push_back(path.z[k]);
  }
  return out;
}

CommandOutcome cmd_pair(const ExperimentConfig& config, const RunContext& ctx) {
  const auto start = Clock::now();
  config.validate();
  check_suites(config, {"bounds"}, "pair");
  CommandOutcome out;
  out.directory = config.output_dir;
  ensure_directory(out.directory);
  const auto seeds = seeds_for(config);
  const PathGrid grid = config.pair_grid();
  PairOptions po;
  po.max_dt = std::max(po.max_dt, config.pair.dt);
  po.noise_scale = config.pair.noise_scale;
  if (config.pair.dt > 1e-3) out.warnings.push_back("pair.dt above the default maximum 1e-3");

  struct Rep {
    PairPath coarse;
    PairExtremes extremes;
  };
  auto reps = parallel_map(config.repetitions, ctx.workers, [&](std::size_t i) {
    const auto full = simulate_pair(config.pair.initial, grid, seeds[i], po);
    Rep r{subsample(full, config.pair.record_stride), {}};
    r.extremes.include(full);
    return r;
  });

  CsvBuffer csv("realization,t,x,y,z");
  PairExtremes ex;
  std::vector<PairPath> paths;
  for (std::size_t r = 0; r < reps.size(); ++r) {
    const auto& p = reps[r].coarse;
    for (std::size_t k = 0; k < p.x.size(); ++k)
      csv.field(std::uint64_t{r}).field(p.grid.t(k)).field(p.x[k]).field(p.y[k]).field(p.z[k]).end_row();
    ex.merge(reps[r].extremes);
    paths.push_back(std::move(reps[r].coarse));
  }
  out.files.push_back("pairs.csv");
  write_text(out.directory / out.files.back(), csv.str());

  out.manifest = base_manifest("pair", config, seeds);
  out.manifest["grid"] = grid_json(grid, config.pair.record_stride);
  out.manifest["columns"] = {"realization", "t", "x", "y", "z"};
  out.manifest["extremes"] = {{"r_min", ex.r_min}, {"r_max", ex.r_max}, {"finite", ex.finite}};

  if (wants(config, "bounds")) {
    if (paths.size() < 2) {
      out.warnings.push_back("bounds suite skipped: needs at least 2 repetitions");
    } else {
      std::vector<double> times;
      for (double t : {1.0, 5.0, 10.0})
        if (t <= grid.t_end() + 1e-9) times.push_back(t);
      out.reports = pair_bound_reports(paths, times, &ex);
    }
  }
  finish(out, "pair", start, ctx);
  return out;
}

CommandOutcome cmd_sweep(const ExperimentConfig& config, const RunContext& ctx) {
  const auto start = Clock::now();
  config.validate();
  if (config.sweep.axis.empty()) throw ConfigError("sweep.axis is required for the sweep command");
  if (config.sweep.values.empty()) throw ConfigError("sweep.values must list at least one value");

  CommandOutcome out;
  out.directory = config.output_dir;
  ensure_directory(out.directory);
  const bool field_mode = config.sweep.command == "field";
  const std::string statistic = field_mode ? "ks(Re U(T))" : "ks(P0(T) - p0)";

  CsvBuffer csv("value,statistic,verdict");
  nlohmann::json subruns = nlohmann::json::array();
  bool sub_ok = true;
  for (double v : config.sweep.values) {
    ExperimentConfig sub = config;
    const auto& axis = config.sweep.axis;
    if (axis != "amp_scale" && (v != std::floor(v) || v < 0.0))
      throw ConfigError("sweep value " + format_double(v) + " must be a non-negative integer for axis " + axis);
    if (axis == "N") sub.spectrum.N = static_cast<int>(v);
    else if (axis == "M") sub.spectrum.M = static_cast<int>(v);
    else if (axis == "amp_scale") sub.spectrum.amp_scale = v;
    else sub.repetitions = static_cast<std::size_t>(v);
    const std::string name = axis + "_" + format_double(v);
    sub.output_dir = (out.directory / name).string();
    sub.sweep = {};

    const auto res = field_mode ? cmd_field(sub, ctx) : cmd_particles(sub, ctx);
    sub_ok = sub_ok && res.exit_code == kExitPass;
    for (const auto& f : res.files) out.files.push_back(name + "/" + f);
    for (const auto& w : res.warnings) add_unique(out.warnings, w);

    const double var = field_mode ? sub.field_grid().t_end() / 2.0 : sub.particle_grid().t_end();
    const auto& xs = res.endpoints;
    csv.field(v);
    if (xs.size() >= 50) {
      const auto r = ks_one_sample(xs, 0.0, var);
      csv.field(r.value).field(r.passed ? "pass" : "fail");
    } else {
      csv.field("").field("skipped");
    }
    csv.end_row();
    subruns.push_back({{"value", v}, {"directory", name}, {"exit_code", res.exit_code}});
  }
  out.files.push_back("summary.csv");
  write_text(out.directory / "summary.csv", csv.str());

  out.manifest = base_manifest("sweep", config, seeds_for(config));
  out.manifest["axis"] = config.sweep.axis;
  out.manifest["values"] = config.sweep.values;
  out.manifest["statistic"] = statistic;
  out.manifest["subruns"] = subruns;
  out.manifest["columns"] = {"value", "statistic", "verdict"};
  finish(out, "sweep", start, ctx);
  if (!sub_ok) out.exit_code = kExitFailure;
  return out;
}

}  // namespace qldrift::runner

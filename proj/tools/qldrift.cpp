// qldrift: random wave fields, particle drift and their Brownian limits.
//
//   qldrift field     --config cfg [--seed S] [--out DIR] [--reps N]
//   qldrift particles --config cfg ...
//   qldrift pair      --config cfg ...
//   qldrift sweep     --config cfg ...
//   qldrift verify    [--quick] [--seed S] [--out DIR] [--config cfg]
//
// Exit codes: 0 pass, 1 verification failure, 2 usage error.

#include <cstdint>
#include <exception>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "qldrift/runner/acceptance.hpp"
#include "qldrift/runner/commands.hpp"
#include "qldrift/runner/config.hpp"
#include "qldrift/runner/io.hpp"
#include "qldrift/runner/workers.hpp"

namespace {

using namespace qldrift::runner;

struct Flags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<std::size_t> reps;
  bool quick = false;
};

void add_flags(CLI::App* sub, Flags& f) {
  sub->add_option("--config", f.config, "experiment config file (key = value lines)");
  sub->add_option("--seed", f.seed, "master seed (overrides run.seed)");
  sub->add_option("--out", f.out, "output directory (overrides run.output_dir)");
  sub->add_option("--reps", f.reps, "repetitions (overrides run.repetitions)")->check(CLI::PositiveNumber);
  sub->add_flag("--quick", f.quick, "reduced scale");
}

ExperimentConfig load(const Flags& f) {
  if (f.config.empty()) throw ConfigError("--config is required");
  ExperimentConfig c = load_config(f.config);
  if (f.seed) c.master_seed = *f.seed;
  if (f.out) c.output_dir = *f.out;
  if (f.reps) c.repetitions = *f.reps;
  if (f.quick) c.repetitions = std::min<std::size_t>(c.repetitions, 50);
  c.validate();
  return c;
}

int run_verify(const Flags& f, std::size_t workers) {
  AcceptanceOptions o;
  o.quick = f.quick;
  o.workers = workers;
  o.log = &std::cerr;
  if (!f.config.empty()) {
    const ExperimentConfig c = load_config(f.config);
    for (const auto& [k, v] : parse_key_values(read_text(f.config))) {
      if (k == "run.seed") o.seed = c.master_seed;
      if (k == "run.output_dir") o.out_dir = c.output_dir;
    }
  }
  if (f.seed) o.seed = *f.seed;
  if (f.out) o.out_dir = *f.out;
  const auto summary = run_acceptance(o);
  for (const auto& c : summary.criteria) {
    std::cout << summary_line(c) << '\n';
    for (const auto& r : c.reports)
      if (!r.passed) std::cout << "    failed: " << r.name << " = " << r.value << '\n';
  }
  std::cout << (summary.passed ? "verify: all criteria passed" : "verify: FAILED") << " (report: "
            << (o.out_dir / "verify_report.json").string() << ")\n";
  return summary.passed ? kExitPass : kExitFailure;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"qldrift: particle drift in random wave fields"};
  app.set_version_flag("--version", QLDRIFT_VERSION);
  app.require_subcommand(1);

  Flags flags;
  std::string chosen;
  for (const char* name : {"field", "particles", "pair", "sweep", "verify"}) {
    auto* sub = app.add_subcommand(name);
    add_flags(sub, flags);
    sub->callback([&chosen, name] { chosen = name; });
  }
  app.get_subcommand("field")->description("sample U paths of independent field realizations");
  app.get_subcommand("particles")->description("integrate particles in sampled fields");
  app.get_subcommand("pair")->description("simulate the two-particle relative process");
  app.get_subcommand("sweep")->description("repeat field or particle runs over a parameter axis");
  app.get_subcommand("verify")->description("run the acceptance suite");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    const std::size_t workers = default_worker_count();
    if (chosen == "verify") return run_verify(flags, workers);
    const ExperimentConfig config = load(flags);
    RunContext ctx{workers, &std::cerr};
    CommandOutcome out;
    if (chosen == "field") out = cmd_field(config, ctx);
    else if (chosen == "particles") out = cmd_particles(config, ctx);
    else if (chosen == "pair") out = cmd_pair(config, ctx);
    else out = cmd_sweep(config, ctx);
    std::cout << chosen << ": wrote " << out.files.size() << " data file(s) to " << out.directory.string() << '\n';
    return out.exit_code;
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::length_error& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitFailure;
  }
}

#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "qldrift/dynamics.hpp"
#include "qldrift/report.hpp"
#include "qldrift/runner/config.hpp"
#include "qldrift/wavefield.hpp"

namespace qldrift::runner {

inline constexpr int kExitPass = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

struct RunContext {
  std::size_t workers = 1;
  std::ostream* log = nullptr;
};

struct CommandOutcome {
  int exit_code = kExitPass;
  std::filesystem::path directory;
  std::vector<std::string> files;  // data files, relative to `directory`
  std::vector<std::string> warnings;
  StatReports reports;
  nlohmann::json manifest;
  /// Per-realization endpoint: Re U(T) for field runs, P_0(T) - p_0 for
  /// particle runs.
  std::vector<double> endpoints;
};

/// Per-repetition seed derived from the master seed and repetition index.
std::uint64_t repetition_seed(std::uint64_t master_seed, std::size_t repetition);

/// Field realization for a repetition; all-zero amplitudes in zero mode.
FieldRealization make_field(const ExperimentConfig& config, std::uint64_t seed);

/// Warnings that depend only on the configuration.
std::vector<std::string> config_warnings(const ExperimentConfig& config);

/// U paths of `repetitions` realizations: one CSV (t, re_u, im_u) per
/// realization plus manifest.json.
CommandOutcome cmd_field(const ExperimentConfig& config, const RunContext& ctx);
/// Particle trajectories for every realization merged into
/// trajectories.csv (realization, particle, t, q, p) plus manifest.json.
CommandOutcome cmd_particles(const ExperimentConfig& config, const RunContext& ctx);
/// Pair-process paths in pairs.csv (realization, t, x, y, z), drift-bound
/// verdicts and manifest.json.
CommandOutcome cmd_pair(const ExperimentConfig& config, const RunContext& ctx);
/// One sub-run per sweep value under <out>/<axis>_<value>/, plus
/// summary.csv (value, statistic, verdict).
CommandOutcome cmd_sweep(const ExperimentConfig& config, const RunContext& ctx);

/// Subsamples every `stride`-th node of a pair path.
PairPath subsample(const PairPath& path, std::size_t stride);

}  // namespace qldrift::runner

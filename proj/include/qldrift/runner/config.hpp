#pragma once

// Experiment configuration: a flat text file of dotted `key = value` lines.
// `#` starts a comment. Unknown or repeated keys are errors. A `preset` key
// loads one of the shipped presets first; the other keys then override it.

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "qldrift/dynamics.hpp"
#include "qldrift/wavefield.hpp"

namespace qldrift::runner {

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum class FieldMode { Random, Zero };

struct PairSettings {
  PairState initial{std::numbers::pi / 2.0, 0.0};
  double dt = 1e-3;
  double horizon = 10.0;
  double noise_scale = 1.0;
  std::size_t record_stride = 100;
};

struct SweepSettings {
  std::string axis;  // N | M | amp_scale | repetitions
  std::vector<double> values;
  std::string command = "field";  // field | particles
};

struct ExperimentConfig {
  std::string preset;
  SpectrumConfig spectrum;  // ensemble and seed are filled in per realization
  std::string ensemble = "steinhaus";  // steinhaus | four_point | complex_normal
  std::string amplitude = "unit";      // unit | rayleigh | uniform (steinhaus)
  double phase_offset = 0.0;           // four_point
  FieldMode field = FieldMode::Random;
  double dt = 0.0;  // 0: the step cap for particles, 2 pi / 512 for field paths
  std::size_t record_stride = 1;
  int horizon_periods = 1;
  std::vector<ParticleState> particles{ParticleState{}};
  std::size_t repetitions = 1;
  std::vector<std::string> suites;
  std::string output_dir = "qldrift_out";
  std::uint64_t master_seed = 0;
  double force_coupling = kWienerForceCoupling;
  double separation_c = 1.0;
  PairSettings pair;
  SweepSettings sweep;

  /// Spectrum of the realization drawn with `seed`.
  SpectrumConfig realization_spectrum(std::uint64_t seed) const;
  double horizon() const { return 2.0 * std::numbers::pi * horizon_periods; }
  /// Integration grid on [0, horizon]; dt as configured or the default for
  /// the given use.
  PathGrid field_grid() const;
  PathGrid particle_grid() const;
  PathGrid pair_grid() const;
  /// Throws ConfigError on inconsistent values.
  void validate() const;
};

/// Raw key/value pairs in file order.
using KeyValues = std::vector<std::pair<std::string, std::string>>;

KeyValues parse_key_values(const std::string& text);
/// Parses text into a config. Throws ConfigError; an input without any key
/// is rejected.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);
/// Applies one key to a config (the same rules as a file line).
void apply_key(ExperimentConfig& config, const std::string& key, const std::string& value);

ExperimentConfig preset(const std::string& name);
std::vector<std::string> preset_names();

/// Canonical echo of every effective setting, sufficient to re-run.
std::map<std::string, std::string> echo(const ExperimentConfig& config);
/// The echo as config-file text (parses back to an equivalent config).
std::string to_config_text(const ExperimentConfig& config);

/// Shortest round-trip decimal text of a double.
std::string format_double(double v);

}  // namespace qldrift::runner

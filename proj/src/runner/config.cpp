#include "qldrift/runner/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <functional>
#include <optional>
#include <sstream>

namespace qldrift::runner {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> out;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) {
    auto t = trim(item);
    if (!t.empty()) out.push_back(std::move(t));
  }
  return out;
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value, const std::string& why) {
  throw ConfigError("invalid value '" + value + "' for " + key + ": " + why);
}

double parse_double(const std::string& key, const std::string& value) {
  double v = 0.0;
  const auto* end = value.data() + value.size();
  auto [ptr, ec] = std::from_chars(value.data(), end, v);
  if (ec != std::errc() || ptr != end || !std::isfinite(v)) bad_value(key, value, "expected a finite number");
  return v;
}

template <class Int>
Int parse_int(const std::string& key, const std::string& value) {
  Int v{};
  const auto* end = value.data() + value.size();
  auto [ptr, ec] = std::from_chars(value.data(), end, v);
  if (ec != std::errc() || ptr != end) bad_value(key, value, "expected an integer");
  return v;
}

std::vector<double> parse_doubles(const std::string& key, const std::string& value) {
  std::vector<double> out;
  for (const auto& item : split_list(value)) out.push_back(parse_double(key, item));
  return out;
}

std::string join(const std::vector<std::string>& items) {
  std::string s;
  for (std::size_t i = 0; i < items.size(); ++i) s += (i ? "," : "") + items[i];
  return s;
}

std::string join_doubles(const std::vector<double>& xs) {
  std::vector<std::string> items;
  for (double x : xs) items.push_back(format_double(x));
  return join(items);
}

PathGrid grid_on(double horizon, double dt_max, std::size_t stride) {
  auto steps = static_cast<std::size_t>(std::ceil(horizon / dt_max - 1e-9));
  stride = std::max<std::size_t>(1, stride);
  steps = (steps + stride - 1) / stride * stride;
  return {0.0, horizon / static_cast<double>(steps), steps};
}

const char* sigma_name(SigmaScheme::Kind k) {
  switch (k) {
    case SigmaScheme::Kind::AllZero: return "zero";
    case SigmaScheme::Kind::Ladder: return "ladder";
    case SigmaScheme::Kind::Custom: return "custom";
  }
  return "?";
}

struct ParticleLists {
  std::optional<std::vector<double>> q0, p0;
};

void apply_key_impl(ExperimentConfig& c, const std::string& key, const std::string& value, ParticleLists* lists) {
  static const std::map<std::string, std::function<void(ExperimentConfig&, const std::string&, const std::string&)>>
      setters = {
          {"preset", [](auto&, auto&, auto&) {}},
          {"spectrum.M", [](auto& c, auto& k, auto& v) { c.spectrum.M = parse_int<int>(k, v); }},
          {"spectrum.N", [](auto& c, auto& k, auto& v) { c.spectrum.N = parse_int<int>(k, v); }},
          {"spectrum.sigma",
           [](auto& c, auto& k, auto& v) {
             if (v == "ladder") c.spectrum.sigma = SigmaScheme::ladder();
             else if (v == "zero") c.spectrum.sigma = SigmaScheme::all_zero();
             else if (v == "custom") c.spectrum.sigma.kind = SigmaScheme::Kind::Custom;
             else bad_value(k, v, "expected ladder, zero or custom");
           }},
          {"spectrum.sigma_values", [](auto& c, auto& k, auto& v) { c.spectrum.sigma.values = parse_doubles(k, v); }},
          {"spectrum.ensemble",
           [](auto& c, auto& k, auto& v) {
             if (v != "steinhaus" && v != "four_point" && v != "complex_normal")
               bad_value(k, v, "expected steinhaus, four_point or complex_normal");
             c.ensemble = v;
           }},
          {"spectrum.amplitude",
           [](auto& c, auto& k, auto& v) {
             if (v != "unit" && v != "rayleigh" && v != "uniform") bad_value(k, v, "expected unit, rayleigh or uniform");
             c.amplitude = v;
           }},
          {"spectrum.phase_offset", [](auto& c, auto& k, auto& v) { c.phase_offset = parse_double(k, v); }},
          {"spectrum.amp_scale", [](auto& c, auto& k, auto& v) { c.spectrum.amp_scale = parse_double(k, v); }},
          {"spectrum.field",
           [](auto& c, auto& k, auto& v) {
             if (v == "random") c.field = FieldMode::Random;
             else if (v == "zero") c.field = FieldMode::Zero;
             else bad_value(k, v, "expected random or zero");
           }},
          {"grid.dt", [](auto& c, auto& k, auto& v) { c.dt = parse_double(k, v); }},
          {"grid.record_stride", [](auto& c, auto& k, auto& v) { c.record_stride = parse_int<std::size_t>(k, v); }},
          {"run.horizon_periods", [](auto& c, auto& k, auto& v) { c.horizon_periods = parse_int<int>(k, v); }},
          {"run.repetitions", [](auto& c, auto& k, auto& v) { c.repetitions = parse_int<std::size_t>(k, v); }},
          {"run.seed", [](auto& c, auto& k, auto& v) { c.master_seed = parse_int<std::uint64_t>(k, v); }},
          {"run.output_dir", [](auto& c, auto&, auto& v) { c.output_dir = v; }},
          {"run.suites", [](auto& c, auto&, auto& v) { c.suites = split_list(v); }},
          {"dynamics.force_coupling", [](auto& c, auto& k, auto& v) { c.force_coupling = parse_double(k, v); }},
          {"dynamics.separation_c", [](auto& c, auto& k, auto& v) { c.separation_c = parse_double(k, v); }},
          {"pair.x0", [](auto& c, auto& k, auto& v) { c.pair.initial.x = parse_double(k, v); }},
          {"pair.y0", [](auto& c, auto& k, auto& v) { c.pair.initial.y = parse_double(k, v); }},
          {"pair.dt", [](auto& c, auto& k, auto& v) { c.pair.dt = parse_double(k, v); }},
          {"pair.horizon", [](auto& c, auto& k, auto& v) { c.pair.horizon = parse_double(k, v); }},
          {"pair.noise_scale", [](auto& c, auto& k, auto& v) { c.pair.noise_scale = parse_double(k, v); }},
          {"pair.record_stride", [](auto& c, auto& k, auto& v) { c.pair.record_stride = parse_int<std::size_t>(k, v); }},
          {"sweep.axis", [](auto& c, auto&, auto& v) { c.sweep.axis = v; }},
          {"sweep.values", [](auto& c, auto& k, auto& v) { c.sweep.values = parse_doubles(k, v); }},
          {"sweep.command", [](auto& c, auto&, auto& v) { c.sweep.command = v; }},
      };
  if (key == "particles.q0" || key == "particles.p0") {
    auto xs = parse_doubles(key, value);
    if (lists) {
      (key == "particles.q0" ? lists->q0 : lists->p0) = std::move(xs);
    } else {
      if (key == "particles.q0") c.particles.resize(xs.size());
      if (xs.size() != c.particles.size()) bad_value(key, value, "length differs from the particle count");
      for (std::size_t i = 0; i < xs.size(); ++i) (key == "particles.q0" ? c.particles[i].q : c.particles[i].p) = xs[i];
    }
    return;
  }
  const auto it = setters.find(key);
  if (it == setters.end()) throw ConfigError("unknown config key '" + key + "'");
  it->second(c, key, value);
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc()) return "nan";
  return std::string(buf, ptr);
}

SpectrumConfig ExperimentConfig::realization_spectrum(std::uint64_t seed) const {
  SpectrumConfig s = spectrum;
  s.seed = seed;
  if (ensemble == "four_point") {
    s.ensemble = EnsembleSpec::four_point(phase_offset);
  } else if (ensemble == "complex_normal") {
    s.ensemble = EnsembleSpec::complex_normal();
  } else {
    const auto amp = amplitude == "rayleigh"  ? AmplitudeLaw::rayleigh()
                     : amplitude == "uniform" ? AmplitudeLaw::uniform()
                                              : AmplitudeLaw::unit();
    s.ensemble = EnsembleSpec::steinhaus(amp);
  }
  return s;
}

PathGrid ExperimentConfig::field_grid() const {
  return grid_on(horizon(), dt > 0.0 ? dt : 2.0 * std::numbers::pi / 512.0, record_stride);
}

PathGrid ExperimentConfig::particle_grid() const {
  return grid_on(horizon(), dt > 0.0 ? dt : step_cap(spectrum.M), record_stride);
}

PathGrid ExperimentConfig::pair_grid() const { return grid_on(pair.horizon, pair.dt, pair.record_stride); }

void ExperimentConfig::validate() const {
  try {
    spectrum.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  if (horizon_periods < 1) throw ConfigError("run.horizon_periods must be >= 1");
  if (repetitions < 1) throw ConfigError("run.repetitions must be >= 1");
  if (dt < 0.0) throw ConfigError("grid.dt must be >= 0");
  if (record_stride < 1) throw ConfigError("grid.record_stride must be >= 1");
  if (particles.empty()) throw ConfigError("at least one particle is required");
  if (!(separation_c > 0.0)) throw ConfigError("dynamics.separation_c must be > 0");
  if (!(pair.dt > 0.0) || !(pair.horizon > 0.0)) throw ConfigError("pair.dt and pair.horizon must be > 0");
  if (pair.record_stride < 1) throw ConfigError("pair.record_stride must be >= 1");
  if (!sweep.axis.empty() && sweep.axis != "N" && sweep.axis != "M" && sweep.axis != "amp_scale" &&
      sweep.axis != "repetitions")
    throw ConfigError("sweep.axis must be one of N, M, amp_scale, repetitions");
  if (sweep.command != "field" && sweep.command != "particles")
    throw ConfigError("sweep.command must be field or particles");
}

KeyValues parse_key_values(const std::string& text) {
  KeyValues kv;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const auto t = trim(line);
    if (t.empty()) continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(lineno) + ": expected 'key = value'");
    auto key = trim(std::string_view(t).substr(0, eq));
    auto value = trim(std::string_view(t).substr(eq + 1));
    if (key.empty()) throw ConfigError("line " + std::to_string(lineno) + ": empty key");
    for (const auto& [k, v] : kv)
      if (k == key) throw ConfigError("line " + std::to_string(lineno) + ": duplicate key '" + key + "'");
    kv.emplace_back(std::move(key), std::move(value));
  }
  return kv;
}

ExperimentConfig parse_config(const std::string& text) {
  const auto kv = parse_key_values(text);
  if (kv.empty()) throw ConfigError("config is empty");
  ExperimentConfig c;
  for (const auto& [k, v] : kv)
    if (k == "preset") c = preset(v);
  ParticleLists lists;
  for (const auto& [k, v] : kv) apply_key_impl(c, k, v, &lists);
  if (lists.q0 && lists.p0 && lists.q0->size() != lists.p0->size())
    throw ConfigError("particles.q0 and particles.p0 have different lengths");
  if (lists.q0 || lists.p0) {
    const std::size_t n = lists.q0 ? lists.q0->size() : lists.p0->size();
    if (lists.q0 && lists.p0) c.particles.assign(n, ParticleState{});
    else c.particles.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      if (lists.q0) c.particles[i].q = (*lists.q0)[i];
      if (lists.p0) c.particles[i].p = (*lists.p0)[i];
    }
  }
  c.validate();
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

void apply_key(ExperimentConfig& config, const std::string& key, const std::string& value) {
  apply_key_impl(config, key, value, nullptr);
}

std::vector<std::string> preset_names() { return {"dense", "be", "free", "pair"}; }

ExperimentConfig preset(const std::string& name) {
  ExperimentConfig c;
  c.preset = name;
  if (name == "dense") {
    c.spectrum.M = 128;
    c.spectrum.N = 32;
    c.spectrum.amp_scale = 32.0;
    c.record_stride = 64;
    c.repetitions = 400;
    c.particles.clear();
    for (int l = 0; l < 8; ++l) c.particles.push_back({2.0 * std::numbers::pi * l / 8.0, 0.0});
    c.suites = {"gaussianity", "independence"};
  } else if (name == "be") {
    c.spectrum.M = 64;
    c.spectrum.N = 1;
    c.spectrum.sigma = SigmaScheme::all_zero();
    c.spectrum.amp_scale = 8.0;
    c.record_stride = 16;
    c.repetitions = 100;
  } else if (name == "free") {
    c.field = FieldMode::Zero;
    c.spectrum.M = 16;
    c.spectrum.N = 4;
    c.record_stride = 16;
    c.particles = {{0.0, 0.0}, {1.0, 0.5}};
  } else if (name == "pair") {
    c.repetitions = 1000;
    c.suites = {"bounds"};
  } else {
    throw ConfigError("unknown preset '" + name + "' (expected dense, be, free or pair)");
  }
  return c;
}

std::map<std::string, std::string> echo(const ExperimentConfig& c) {
  std::map<std::string, std::string> m;
  m["spectrum.M"] = std::to_string(c.spectrum.M);
  m["spectrum.N"] = std::to_string(c.spectrum.N);
  m["spectrum.sigma"] = sigma_name(c.spectrum.sigma.kind);
  if (c.spectrum.sigma.kind == SigmaScheme::Kind::Custom) m["spectrum.sigma_values"] = join_doubles(c.spectrum.sigma.values);
  m["spectrum.ensemble"] = c.ensemble;
  m["spectrum.amplitude"] = c.amplitude;
  m["spectrum.phase_offset"] = format_double(c.phase_offset);
  m["spectrum.amp_scale"] = format_double(c.spectrum.amp_scale);
  m["spectrum.field"] = c.field == FieldMode::Zero ? "zero" : "random";
  m["grid.dt"] = format_double(c.dt);
  m["grid.record_stride"] = std::to_string(c.record_stride);
  m["run.horizon_periods"] = std::to_string(c.horizon_periods);
  m["run.repetitions"] = std::to_string(c.repetitions);
  m["run.seed"] = std::to_string(c.master_seed);
  m["run.output_dir"] = c.output_dir;
  m["run.suites"] = join(c.suites);
  std::vector<double> q, p;
  for (const auto& s : c.particles) {
    q.push_back(s.q);
    p.push_back(s.p);
  }
  m["particles.q0"] = join_doubles(q);
  m["particles.p0"] = join_doubles(p);
  m["dynamics.force_coupling"] = format_double(c.force_coupling);
  m["dynamics.separation_c"] = format_double(c.separation_c);
  m["pair.x0"] = format_double(c.pair.initial.x);
  m["pair.y0"] = format_double(c.pair.initial.y);
  m["pair.dt"] = format_double(c.pair.dt);
  m["pair.horizon"] = format_double(c.pair.horizon);
  m["pair.noise_scale"] = format_double(c.pair.noise_scale);
  m["pair.record_stride"] = std::to_string(c.pair.record_stride);
  if (!c.sweep.axis.empty()) m["sweep.axis"] = c.sweep.axis;
  if (!c.sweep.values.empty()) m["sweep.values"] = join_doubles(c.sweep.values);
  m["sweep.command"] = c.sweep.command;
  return m;
}

std::string to_config_text(const ExperimentConfig& config) {
  std::string out;
  for (const auto& [k, v] : echo(config)) out += k + " = " + v + "\n";
  return out;
}

}  // namespace qldrift::runner

#include "qldrift/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "qldrift/rng.hpp"
#include "qldrift/stats.hpp"

namespace qldrift {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr std::uint64_t kOracleStream = 0x57494E45ULL;
constexpr std::uint64_t kPairStream = 0x50414952ULL;

std::string format_step_cap(double dt, double required) {
  std::ostringstream os;
  os << "time step " << dt << " exceeds the step cap; required dt <= " << required;
  return os.str();
}

// One kick-drift-kick step of size h with force coefficients taken at the
// step midpoint.
inline void split_step(std::span<ParticleState> states, const ForceCoefficients& cs, double h, double drift_rate,
                       double coupling) {
  const double half_kick = 0.5 * h * coupling;
  for (auto& s : states) {
    s.p += half_kick * cs.force_at(s.q);
    s.q += h * drift_rate * s.p;
    s.p += half_kick * cs.force_at(s.q);
  }
}

void ensure_finite(std::span<const ParticleState> states, std::size_t step, double t) {
  for (std::size_t i = 0; i < states.size(); ++i) {
    if (!std::isfinite(states[i].q) || !std::isfinite(states[i].p)) {
      std::ostringstream os;
      os << "non-finite state for particle " << i << " at step " << step << " (t=" << t << "): q=" << states[i].q
         << " p=" << states[i].p;
      throw std::runtime_error(os.str());
    }
  }
}

const simd::KernelTable& kernels_of(const DynamicsOptions& o) {
  return o.kernels ? *o.kernels : simd::active_kernels();
}

}  // namespace

double step_cap(int M) { return std::min(0.05, 0.2 / (static_cast<double>(M) + 1.0)); }

StepCapError::StepCapError(double dt, double required)
    : std::invalid_argument(format_step_cap(dt, required)), required_(required) {}

std::size_t Trajectories::node_at(double t) const {
  const double k = std::round((t - grid.t0) / grid.dt);
  if (k < 0.0) return 0;
  return std::min(grid.n_steps, static_cast<std::size_t>(k));
}

SeparationCheck check_separation(std::span<const ParticleState> initials, double c) {
  if (!(c > 0.0)) throw std::invalid_argument("separation constant c must be > 0");
  SeparationCheck out;
  out.c = c;
  out.particles = initials.size();
  out.pairwise_margins.assign(initials.size() * initials.size(), 0.0);
  out.valid = true;
  for (std::size_t i = 0; i < initials.size(); ++i) {
    for (std::size_t j = 0; j < initials.size(); ++j) {
      if (i == j) continue;
      const double dq = initials[i].q - initials[j].q;
      const double dp = initials[i].p - initials[j].p;
      const double m = 1.0 - std::cos(dq) + c * dp * dp;
      out.pairwise_margins[i * initials.size() + j] = m;
      if (!(m > 0.0)) out.valid = false;
    }
  }
  return out;
}

std::string resonance_coverage_warning(const SpectrumConfig& config, const ParticleState& initial, double horizon) {
  const double reach = config.amp_scale * (std::abs(initial.p) + 4.0 * std::sqrt(horizon));
  if (reach <= 0.8 * config.M) return {};
  std::ostringstream os;
  os << "particle (q0=" << initial.q << ", p0=" << initial.p << ") may leave the covered phase-velocity range: "
     << "a (|p0| + 4 sqrt T) = " << reach << " > 0.8 M = " << 0.8 * config.M;
  return os.str();
}

std::vector<ParticleState> propagate(const FieldRealization& field, std::span<const ParticleState> initial,
                                     double t_start, double dt, std::size_t n_steps, const DynamicsOptions& options) {
  const double cap = step_cap(field.M());
  if (std::abs(dt) > cap * (1.0 + 1e-12)) throw StepCapError(std::abs(dt), cap);
  if (dt == 0.0 || !std::isfinite(dt)) throw std::invalid_argument("time step must be finite and non-zero");
  std::vector<ParticleState> states(initial.begin(), initial.end());
  ForceStream force(field, t_start + 0.5 * dt, dt, options.reanchor_every, kernels_of(options));
  const double a = field.config().amp_scale;
  for (std::size_t k = 0; k < n_steps; ++k) {
    split_step(states, force.next(), dt, a, options.force_coupling);
    ensure_finite(states, k + 1, t_start + static_cast<double>(k + 1) * dt);
  }
  return states;
}

Trajectories integrate(const FieldRealization& field, std::span<const ParticleState> initial, const PathGrid& grid,
                       const DynamicsOptions& options) {
  grid.validate();
  const double cap = step_cap(field.M());
  if (grid.dt > cap * (1.0 + 1e-12)) throw StepCapError(grid.dt, cap);
  const std::size_t stride = std::max<std::size_t>(1, options.record_stride);
  if (grid.n_steps % stride != 0) throw std::invalid_argument("record stride must divide the number of steps");

  Trajectories out;
  out.grid = {grid.t0, grid.dt * static_cast<double>(stride), grid.n_steps / stride};
  out.particles = initial.size();
  const std::size_t nodes = out.grid.nodes();
  out.states.resize(initial.size() * nodes);

  if (initial.size() > 1) {
    const auto sep = check_separation(initial, options.separation_c);
    if (!sep.valid) out.warnings.push_back("initial data violate the pairwise separation condition");
  }
  for (const auto& s : initial) {
    auto w = resonance_coverage_warning(field.config(), s, grid.t_end() - grid.t0);
    if (!w.empty()) out.warnings.push_back(std::move(w));
  }

  std::vector<ParticleState> states(initial.begin(), initial.end());
  auto record = [&](std::size_t node) {
    for (std::size_t i = 0; i < states.size(); ++i) out.states[i * nodes + node] = states[i];
  };
  record(0);

  ForceStream force(field, grid.t0 + 0.5 * grid.dt, grid.dt, options.reanchor_every, kernels_of(options));
  const double a = field.config().amp_scale;
  for (std::size_t k = 0; k < grid.n_steps; ++k) {
    split_step(states, force.next(), grid.dt, a, options.force_coupling);
    ensure_finite(states, k + 1, grid.t(k + 1));
    if ((k + 1) % stride == 0) record((k + 1) / stride);
  }
  return out;
}

Trajectories wiener_oracle(const ParticleState& initial, const PathGrid& grid, std::uint64_t seed,
                           double amp_scale) {
  grid.validate();
  Trajectories out;
  out.grid = grid;
  out.particles = 1;
  out.states.resize(grid.nodes());
  CounterStream rng(seed, kOracleStream);

  const double h = grid.dt;
  const double sqrt_h = std::sqrt(h);
  const double j_scale = h * sqrt_h;
  const double inv_two_sqrt3 = 0.5 / std::sqrt(3.0);
  double b = 0.0;       // B(t)
  double int_b = 0.0;   // int_0^t B
  out.states[0] = initial;
  for (std::size_t k = 0; k < grid.n_steps; ++k) {
    const double xi1 = rng.normal();
    const double xi2 = rng.normal();
    // (dB, J) has covariance [[h, h^2/2], [h^2/2, h^3/3]].
    const double db = sqrt_h * xi1;
    const double j = j_scale * (0.5 * xi1 + inv_two_sqrt3 * xi2);
    int_b += b * h + j;
    b += db;
    const double t = static_cast<double>(k + 1) * h;
    out.states[k + 1] = {initial.q + amp_scale * (initial.p * t + int_b), initial.p + b};
  }
  return out;
}

std::vector<ParticleState> ito_euler_path(const ParticleState& initial, double dt, double amp_scale,
                                          std::span<const double> dw1, std::span<const double> dw2) {
  if (dw1.size() != dw2.size()) throw std::invalid_argument("increment sequences differ in length");
  std::vector<ParticleState> path(dw1.size() + 1);
  path[0] = initial;
  ParticleState s = initial;
  for (std::size_t k = 0; k < dw1.size(); ++k) {
    const double dp = std::sin(s.q) * dw1[k] + std::cos(s.q) * dw2[k];
    s.q += amp_scale * s.p * dt;
    s.p += dp;
    path[k + 1] = s;
  }
  return path;
}

std::vector<ParticleState> stratonovich_heun_path(const ParticleState& initial, double dt, double amp_scale,
                                                  std::span<const double> dw1, std::span<const double> dw2) {
  if (dw1.size() != dw2.size()) throw std::invalid_argument("increment sequences differ in length");
  std::vector<ParticleState> path(dw1.size() + 1);
  path[0] = initial;
  ParticleState s = initial;
  for (std::size_t k = 0; k < dw1.size(); ++k) {
    const double g0 = std::sin(s.q) * dw1[k] + std::cos(s.q) * dw2[k];
    const ParticleState pred{s.q + amp_scale * s.p * dt, s.p + g0};
    const double g1 = std::sin(pred.q) * dw1[k] + std::cos(pred.q) * dw2[k];
    s = {s.q + 0.5 * amp_scale * (s.p + pred.p) * dt, s.p + 0.5 * (g0 + g1)};
    path[k + 1] = s;
  }
  return path;
}

StatReports stratonovich_equivalence_probe(const ParticleState& initial, const PathGrid& grid, std::uint64_t seed,
                                           const StratonovichProbeOptions& options) {
  grid.validate();
  if (options.n_paths < 50) throw std::invalid_argument("stratonovich probe needs at least 50 paths");
  std::vector<double> ito_end(options.n_paths), strat_end(options.n_paths);
  std::vector<double> dw1(grid.n_steps), dw2(grid.n_steps);
  const double sqrt_dt = std::sqrt(grid.dt);
  for (std::size_t i = 0; i < options.n_paths; ++i) {
    CounterStream rng(seed, i);
    for (std::size_t k = 0; k < grid.n_steps; ++k) {
      dw1[k] = sqrt_dt * rng.normal();
      dw2[k] = sqrt_dt * rng.normal();
    }
    ito_end[i] = ito_euler_path(initial, grid.dt, options.amp_scale, dw1, dw2).back().p - initial.p;
    strat_end[i] = stratonovich_heun_path(initial, grid.dt, options.amp_scale, dw1, dw2).back().p - initial.p;
  }
  const double n = static_cast<double>(options.n_paths);
  const double horizon = grid.t_end() - grid.t0;
  StatReports out;
  const double d = ks_two_sample(ito_end, strat_end);
  out.push_back(StatReport::make("ks2(P_T ito, P_T stratonovich)", d, 1.36 * std::sqrt(2.0 / n) * options.ks_slack,
                                 Comparison::AtMost, options.n_paths)
                    .with_seed(seed));
  const double lo = horizon * (1.0 - options.variance_tolerance);
  const double hi = horizon * (1.0 + options.variance_tolerance);
  out.push_back(StatReport::within("var(P_T - p0) ito", sample_variance(ito_end), lo, hi, options.n_paths).with_seed(seed));
  out.push_back(
      StatReport::within("var(P_T - p0) stratonovich", sample_variance(strat_end), lo, hi, options.n_paths).with_seed(seed));
  return out;
}

double PairState::z() const {
  const double s = std::sin(x);
  return std::log(s * s + y * y);
}

PairPath simulate_pair(const PairState& initial, const PathGrid& grid, std::uint64_t seed, const PairOptions& options) {
  grid.validate();
  if (grid.dt > options.max_dt * (1.0 + 1e-12))
    throw std::invalid_argument("pair process step exceeds the configured maximum");
  const double s0 = std::sin(initial.x);
  if (s0 * s0 + initial.y * initial.y < 1e-24)
    throw std::invalid_argument("pair process cannot start at an excluded point (0,0) or (pi,0)");

  PairPath out;
  out.grid = grid;
  const std::size_t nodes = grid.nodes();
  out.x.resize(nodes);
  out.y.resize(nodes);
  out.z.resize(nodes);

  CounterStream rng(seed, kPairStream);
  const double sqrt_dt = std::sqrt(grid.dt);
  double x = initial.x;
  double y = initial.y;
  auto record = [&](std::size_t i) {
    double xm = std::fmod(x, kTwoPi);
    if (xm < 0.0) xm += kTwoPi;
    const double s = std::sin(x);
    out.x[i] = xm;
    out.y[i] = y;
    out.z[i] = std::log(s * s + y * y);
  };
  record(0);
  for (std::size_t k = 0; k < grid.n_steps; ++k) {
    const double db = options.noise_scale * sqrt_dt * rng.normal();
    const double x_next = x + y * grid.dt;
    y += std::sin(x) * db;
    x = x_next;
    record(k + 1);
  }
  return out;
}

}  // namespace qldrift

#pragma once

// Particle motion in a prescribed wave field,
//
//   dq = a p dt,   dp = kappa [sin(q) C(t) + cos(q) S(t)] dt,
//
// with a = A/m and (C, S) the force coefficients of the field; the exact
// Wiener-limit dynamics used as a distributional oracle; and the two-particle
// relative process dX = Y dt, dY = sin(X) dB.

#include <cstdint>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "qldrift/report.hpp"
#include "qldrift/wavefield.hpp"

namespace qldrift {

struct ParticleState {
  double q = 0.0;  // unwrapped position
  double p = 0.0;  // momentum in units of the amplitude scale
};

/// Coupling that makes the limit momentum a standard Wiener process: the real
/// and imaginary parts of U each carry variance t/2.
inline constexpr double kWienerForceCoupling = std::numbers::sqrt2;

struct DynamicsOptions {
  double force_coupling = kWienerForceCoupling;
  double separation_c = 1.0;
  std::size_t record_stride = 1;
  std::size_t reanchor_every = 1024;
  const simd::KernelTable* kernels = nullptr;  // nullptr: active kernels
};

/// Largest admissible step for a field with half-count M: min(0.05, 0.2/(M+1)).
double step_cap(int M);

class StepCapError : public std::invalid_argument {
 public:
  StepCapError(double dt, double required);
  double required_dt() const { return required_; }

 private:
  double required_;
};

/// Recorded states of several particles sharing one field realization.
struct Trajectories {
  PathGrid grid;                     // recording grid
  std::size_t particles = 0;
  std::vector<ParticleState> states;  // particle-major: [particle][node]
  std::vector<std::string> warnings;

  const ParticleState& at(std::size_t particle, std::size_t node) const {
    return states[particle * grid.nodes() + node];
  }
  /// Recording node closest to time t.
  std::size_t node_at(double t) const;
};

struct TrajectoryEnsemble {
  PathGrid grid;
  std::size_t particles = 0;
  std::vector<ParticleState> initial;
  std::vector<Trajectories> realizations;
  std::vector<std::uint64_t> seeds;
};

struct SeparationCheck {
  double c = 1.0;
  std::size_t particles = 0;
  std::vector<double> pairwise_margins;  // row-major particles x particles
  bool valid = false;

  double margin(std::size_t i, std::size_t j) const { return pairwise_margins[i * particles + j]; }
};

/// Margins 1 - cos(dq0) + c |dp0|^2; valid iff all off-diagonal margins > 0.
SeparationCheck check_separation(std::span<const ParticleState> initials, double c);

/// Symmetric splitting (half kick, drift, half kick) with the force evaluated
/// at each step's midpoint. All particles see the same (C, S) per step.
/// Throws StepCapError if grid.dt > step_cap(M) and std::runtime_error if a
/// state becomes non-finite.
Trajectories integrate(const FieldRealization& field, std::span<const ParticleState> initial, const PathGrid& grid,
                       const DynamicsOptions& options = {});

/// Final states after n_steps of signed size dt starting at t_start; a
/// negative dt runs the same scheme backwards in time.
std::vector<ParticleState> propagate(const FieldRealization& field, std::span<const ParticleState> initial,
                                     double t_start, double dt, std::size_t n_steps,
                                     const DynamicsOptions& options = {});

/// Warning text when a particle may leave the covered phase-velocity range
/// within the horizon, empty otherwise.
std::string resonance_coverage_warning(const SpectrumConfig& config, const ParticleState& initial, double horizon);

/// Exact sampling of P(t) = p0 + B(t), Q(t) = q0 + a (p0 t + int_0^t B).
Trajectories wiener_oracle(const ParticleState& initial, const PathGrid& grid, std::uint64_t seed,
                           double amp_scale);

/// Euler-Maruyama (Ito) and Heun (Stratonovich) solutions of
/// dQ = a P dt, dP = sin Q dW1 + cos Q dW2 against given increments.
std::vector<ParticleState> ito_euler_path(const ParticleState& initial, double dt, double amp_scale,
                                          std::span<const double> dw1, std::span<const double> dw2);
std::vector<ParticleState> stratonovich_heun_path(const ParticleState& initial, double dt, double amp_scale,
                                                  std::span<const double> dw1, std::span<const double> dw2);

struct StratonovichProbeOptions {
  std::size_t n_paths = 2000;
  double amp_scale = 1.0;
  double ks_slack = 1.5;
  double variance_tolerance = 0.10;
};

/// Compares the law of P at the grid end under both schemes driven by the
/// same Wiener paths.
StatReports stratonovich_equivalence_probe(const ParticleState& initial, const PathGrid& grid, std::uint64_t seed,
                                           const StratonovichProbeOptions& options = {});

struct PairState {
  double x = 0.0;  // relative position, stored mod 2 pi
  double y = 0.0;  // relative velocity
  double z() const;  // log(sin^2 x + y^2)
};

struct PairPath {
  PathGrid grid;
  std::vector<double> x, y, z;
};

struct PairOptions {
  double max_dt = 1e-3;
  double noise_scale = 1.0;  // 0 gives the deterministic drift
};

/// Euler-Maruyama trajectory of the pair process. Throws
/// std::invalid_argument for an initial state at (0,0) or (pi,0) or a step
/// above max_dt.
PairPath simulate_pair(const PairState& initial, const PathGrid& grid, std::uint64_t seed,
                       const PairOptions& options = {});

}  // namespace qldrift

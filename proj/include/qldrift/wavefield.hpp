#pragma once

// Random wave fields and their controlling processes.
//
// For a realization {alpha_{m,n}} with frequencies w_{m,n} = m + sigma_n:
//
//   u_n(t) = (2 pi)^{-1/2} sum_m alpha_{m,n} I(w_{m,n}, t)
//   y_n(t) = same with sigma_n = 0
//   U(t)   = N^{-1/2} sum_n u_n(t)
//
// where I(w, t) = int_0^t exp(-i w s) ds. The force coefficients (C, S) are
// the real and imaginary parts of dU/dt.

#include <complex>
#include <cstdint>
#include <span>
#include <vector>

#include "qldrift/ensembles.hpp"
#include "qldrift/simd/phasor.hpp"
#include "qldrift/test_function.hpp"

namespace qldrift {

struct SigmaScheme {
  enum class Kind { AllZero, Ladder, Custom };

  Kind kind = Kind::Ladder;
  std::vector<double> values;  // Custom only, one per n

  static SigmaScheme all_zero() { return {Kind::AllZero, {}}; }
  static SigmaScheme ladder() { return {Kind::Ladder, {}}; }
  static SigmaScheme custom(std::vector<double> v) { return {Kind::Custom, std::move(v)}; }
};

struct SpectrumConfig {
  int M = 0;
  int N = 1;
  SigmaScheme sigma = SigmaScheme::ladder();
  EnsembleSpec ensemble = EnsembleSpec::steinhaus();
  double amp_scale = 1.0;  // A/m
  std::uint64_t seed = 0;

  /// sigma_n for n in [1, N]; Ladder gives n/N exactly.
  double sigma_n(int n) const;
  std::size_t mode_count() const { return static_cast<std::size_t>(2 * M + 1) * static_cast<std::size_t>(N); }
  /// Throws std::invalid_argument on out-of-range parameters.
  void validate() const;
};

inline constexpr std::size_t kDefaultModeCap = std::size_t{1} << 24;

/// Immutable table of mode amplitudes for one field realization. Storage is
/// n-major: the 2M+1 modes of column n are contiguous.
class FieldRealization {
 public:
  /// `amplitudes` in n-major order, size (2M+1) N.
  static FieldRealization from_amplitudes(SpectrumConfig config, std::vector<ComplexAmplitude> amplitudes);

  const SpectrumConfig& config() const { return config_; }
  int M() const { return config_.M; }
  int N() const { return config_.N; }

  std::size_t index(int m, int n) const {
    return static_cast<std::size_t>(n - 1) * static_cast<std::size_t>(2 * config_.M + 1) +
           static_cast<std::size_t>(m + config_.M);
  }
  const ComplexAmplitude& amplitude(int m, int n) const { return amplitudes_[index(m, n)]; }
  std::complex<double> alpha(int m, int n) const { return alphas_[index(m, n)]; }
  double frequency(int m, int n) const { return frequencies_[index(m, n)]; }

  std::span<const ComplexAmplitude> amplitudes() const { return amplitudes_; }
  std::span<const std::complex<double>> alphas() const { return alphas_; }
  std::span<const double> frequencies() const { return frequencies_; }
  /// The 2M+1 entries of column n.
  std::span<const std::complex<double>> column(int n) const;
  std::span<const double> column_frequencies(int n) const;

 private:
  SpectrumConfig config_;
  std::vector<ComplexAmplitude> amplitudes_;
  std::vector<std::complex<double>> alphas_;
  std::vector<double> frequencies_;
};

/// Draws every alpha_{m,n} with key (config.seed, m, n). Throws
/// std::length_error when (2M+1)N exceeds `max_modes`.
FieldRealization realize(const SpectrumConfig& config, std::size_t max_modes = kDefaultModeCap);

struct PathGrid {
  double t0 = 0.0;
  double dt = 0.0;
  std::size_t n_steps = 0;

  double t(std::size_t k) const { return t0 + static_cast<double>(k) * dt; }
  double t_end() const { return t(n_steps); }
  std::size_t nodes() const { return n_steps + 1; }
  void validate() const;
  /// Grid on [t0, t0 + T] with n_steps = round(T / dt_max) rounded up.
  static PathGrid covering(double t0, double horizon, double dt_max);
};

struct ControlPath {
  PathGrid grid;
  std::vector<std::complex<double>> values;
};

std::complex<double> eval_u(const FieldRealization& field, int n, double t);
std::complex<double> eval_y(const FieldRealization& field, int n, double t);
std::complex<double> eval_U(const FieldRealization& field, double t);

struct ForceCoefficients {
  double C = 0.0;  // d Re U / dt
  double S = 0.0;  // d Im U / dt

  /// sin(q) C + cos(q) S.
  double force_at(double q) const;
};

/// Direct evaluation with one sincos per mode.
ForceCoefficients force_coefficients(const FieldRealization& field, double t);

/// (C, S) on the grid t_start + k dt via the rotation recurrence. Phasors are
/// recomputed exactly every `reanchor_every` steps. One instance per worker.
class ForceStream {
 public:
  ForceStream(const FieldRealization& field, double t_start, double dt, std::size_t reanchor_every = 1024,
              const simd::KernelTable& kernels = simd::active_kernels());

  /// Value at the current node; advances to the next node.
  ForceCoefficients next();
  double time() const { return t_start_ + static_cast<double>(step_) * dt_; }
  std::size_t reanchor_every() const { return reanchor_every_; }

 private:
  simd::PhasorBank bank_;
  double t_start_;
  double dt_;
  std::size_t reanchor_every_;
  std::size_t step_ = 0;
};

/// Sampled paths of U, u_n, y_n on a grid (rotation recurrence, exact
/// re-anchoring every 1024 nodes).
ControlPath sample_U_path(const FieldRealization& field, const PathGrid& grid,
                          const simd::KernelTable& kernels = simd::active_kernels());
ControlPath sample_u_path(const FieldRealization& field, int n, const PathGrid& grid,
                          const simd::KernelTable& kernels = simd::active_kernels());
ControlPath sample_y_path(const FieldRealization& field, int n, const PathGrid& grid,
                          const simd::KernelTable& kernels = simd::active_kernels());

struct SpectrumDiagnostics {
  double s_typ = 0.0;      // overlap parameter
  double dv_box = 0.0;     // resonance-box half-width
  double tau_disc = 0.0;   // discretization time 2 pi / dv_phi
  double dv_phi = 0.0;     // nearest-neighbour phase-velocity spacing
  double e_typ = 0.0;      // r.m.s. single-mode field amplitude
  double v_min = 0.0;      // covered phase-velocity interval
  double v_max = 0.0;
};

SpectrumDiagnostics diagnostics(const SpectrumConfig& config);

/// Two-wave overlap parameter
///   2 |e/m|^{1/2} (|E/k|_a^{1/2} + |E/k|_b^{1/2}) / |dv_phi|.
double overlap_parameter(double charge_over_mass, double e_over_k_a, double e_over_k_b, double dv_phi);

/// (g, u_n) = sum_m alpha_{m,n} ghat(m + sigma_n).
std::complex<double> pairing(const FieldRealization& field, int n, const TestFunction& g);

}  // namespace qldrift

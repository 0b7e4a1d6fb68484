#include "qldrift/wavefield.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace qldrift {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kInvSqrtTwoPi = 0.3989422804014326779;
// Modes slower than this are evaluated in closed form on paths; dividing by
// w would cost precision.
constexpr double kSlowFrequency = 1e-3;

// I(w, t) = int_0^t exp(-i w s) ds = exp(-i w t / 2) t sinc(w t / 2).
std::complex<double> integral_factor(double w, double t) {
  const double x = 0.5 * w * t;
  const double sinc = std::abs(x) < 1e-8 ? 1.0 - x * x / 6.0 : std::sin(x) / x;
  return std::polar(t * sinc, -x);
}

std::complex<double> closed_form_sum(std::span<const std::complex<double>> alphas, std::span<const double> freqs,
                                     double t) {
  std::complex<double> s{};
  for (std::size_t k = 0; k < alphas.size(); ++k) s += alphas[k] * integral_factor(freqs[k], t);
  return s;
}

// prefactor * sum_k alpha_k I(w_k, t) on every grid node.
ControlPath integrated_path(std::span<const std::complex<double>> alphas, std::span<const double> freqs,
                            double prefactor, const PathGrid& grid, const simd::KernelTable& kernels) {
  grid.validate();
  std::vector<std::complex<double>> coef;
  std::vector<double> fast_freqs;
  std::vector<std::complex<double>> slow_alphas;
  std::vector<double> slow_freqs;
  std::complex<double> offset{};
  for (std::size_t k = 0; k < alphas.size(); ++k) {
    if (std::abs(freqs[k]) < kSlowFrequency) {
      slow_alphas.push_back(alphas[k]);
      slow_freqs.push_back(freqs[k]);
      continue;
    }
    // alpha I(w, t) = alpha / (i w) - alpha / (i w) exp(-i w t)
    const std::complex<double> c = prefactor * alphas[k] / std::complex<double>(0.0, freqs[k]);
    offset += c;
    coef.push_back(-c);
    fast_freqs.push_back(freqs[k]);
  }

  ControlPath path{grid, std::vector<std::complex<double>>(grid.nodes())};
  simd::PhasorBank bank(coef, fast_freqs, kernels);
  bank.set_step(grid.dt);
  constexpr std::size_t kReanchor = 1024;
  for (std::size_t i = 0; i < grid.nodes(); ++i) {
    if (i % kReanchor == 0) bank.anchor(grid.t(i));
    std::complex<double> v = offset + bank.sum_and_advance();
    if (!slow_alphas.empty()) v += prefactor * closed_form_sum(slow_alphas, slow_freqs, grid.t(i));
    path.values[i] = v;
  }
  return path;
}

void check_column(const FieldRealization& field, int n) {
  if (n < 1 || n > field.N())
    throw std::out_of_range("column n=" + std::to_string(n) + " outside [1, " + std::to_string(field.N()) + "]");
}

}  // namespace

double SpectrumConfig::sigma_n(int n) const {
  switch (sigma.kind) {
    case SigmaScheme::Kind::AllZero: return 0.0;
    case SigmaScheme::Kind::Ladder: return static_cast<double>(n) / static_cast<double>(N);
    case SigmaScheme::Kind::Custom: return sigma.values.at(static_cast<std::size_t>(n - 1));
  }
  return 0.0;
}

void SpectrumConfig::validate() const {
  if (M < 0) throw std::invalid_argument("spectrum.M must be >= 0");
  if (N < 1) throw std::invalid_argument("spectrum.N must be >= 1");
  if (!(amp_scale > 0.0) || !std::isfinite(amp_scale)) throw std::invalid_argument("spectrum.amp_scale must be > 0");
  if (sigma.kind == SigmaScheme::Kind::Custom) {
    if (sigma.values.size() != static_cast<std::size_t>(N))
      throw std::invalid_argument("custom sigma list must have exactly N entries");
    for (double s : sigma.values)
      if (!(s >= 0.0 && s <= 1.0)) throw std::invalid_argument("every sigma_n must lie in [0, 1]");
  }
}

FieldRealization FieldRealization::from_amplitudes(SpectrumConfig config, std::vector<ComplexAmplitude> amplitudes) {
  config.validate();
  if (amplitudes.size() != config.mode_count())
    throw std::invalid_argument("amplitude table must have (2M+1)N entries");
  FieldRealization f;
  f.config_ = std::move(config);
  f.amplitudes_ = std::move(amplitudes);
  f.alphas_.resize(f.amplitudes_.size());
  f.frequencies_.resize(f.amplitudes_.size());
  for (int n = 1; n <= f.config_.N; ++n) {
    const double sigma = f.config_.sigma_n(n);
    for (int m = -f.config_.M; m <= f.config_.M; ++m) {
      const std::size_t i = f.index(m, n);
      const auto& a = f.amplitudes_[i];
      if (!(a.a >= 0.0) || !std::isfinite(a.a)) throw std::invalid_argument("mode modulus must be finite and >= 0");
      f.alphas_[i] = a.value();
      f.frequencies_[i] = static_cast<double>(m) + sigma;
    }
  }
  return f;
}

std::span<const std::complex<double>> FieldRealization::column(int n) const {
  check_column(*this, n);
  return std::span<const std::complex<double>>(alphas_).subspan(index(-M(), n), static_cast<std::size_t>(2 * M() + 1));
}

std::span<const double> FieldRealization::column_frequencies(int n) const {
  check_column(*this, n);
  return std::span<const double>(frequencies_).subspan(index(-M(), n), static_cast<std::size_t>(2 * M() + 1));
}

FieldRealization realize(const SpectrumConfig& config, std::size_t max_modes) {
  config.validate();
  if (config.mode_count() > max_modes)
    throw std::length_error("field with " + std::to_string(config.mode_count()) + " modes exceeds the cap of " +
                            std::to_string(max_modes));
  std::vector<ComplexAmplitude> table(config.mode_count());
  std::size_t i = 0;
  for (int n = 1; n <= config.N; ++n)
    for (int m = -config.M; m <= config.M; ++m) table[i++] = sample_alpha(config.ensemble, {config.seed, m, n});
  return FieldRealization::from_amplitudes(config, std::move(table));
}

void PathGrid::validate() const {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw std::invalid_argument("grid dt must be > 0");
  if (!std::isfinite(t0)) throw std::invalid_argument("grid t0 must be finite");
}

PathGrid PathGrid::covering(double t0, double horizon, double dt_max) {
  if (!(horizon > 0.0) || !(dt_max > 0.0)) throw std::invalid_argument("grid horizon and dt must be > 0");
  const auto steps = static_cast<std::size_t>(std::ceil(horizon / dt_max - 1e-9));
  return {t0, horizon / static_cast<double>(steps), steps};
}

std::complex<double> eval_u(const FieldRealization& field, int n, double t) {
  return kInvSqrtTwoPi * closed_form_sum(field.column(n), field.column_frequencies(n), t);
}

std::complex<double> eval_y(const FieldRealization& field, int n, double t) {
  const auto col = field.column(n);
  std::complex<double> s{};
  for (int m = -field.M(); m <= field.M(); ++m)
    s += col[static_cast<std::size_t>(m + field.M())] * integral_factor(static_cast<double>(m), t);
  return kInvSqrtTwoPi * s;
}

std::complex<double> eval_U(const FieldRealization& field, double t) {
  return kInvSqrtTwoPi / std::sqrt(static_cast<double>(field.N())) *
         closed_form_sum(field.alphas(), field.frequencies(), t);
}

double ForceCoefficients::force_at(double q) const { return std::sin(q) * C + std::cos(q) * S; }

ForceCoefficients force_coefficients(const FieldRealization& field, double t) {
  const auto alphas = field.alphas();
  const auto freqs = field.frequencies();
  std::complex<double> s{};
  for (std::size_t k = 0; k < alphas.size(); ++k) s += alphas[k] * std::polar(1.0, -freqs[k] * t);
  s *= kInvSqrtTwoPi / std::sqrt(static_cast<double>(field.N()));
  return {s.real(), s.imag()};
}

namespace {

std::vector<std::complex<double>> scaled_alphas(const FieldRealization& field) {
  const double scale = kInvSqrtTwoPi / std::sqrt(static_cast<double>(field.N()));
  std::vector<std::complex<double>> c(field.alphas().begin(), field.alphas().end());
  for (auto& x : c) x *= scale;
  return c;
}

}  // namespace

ForceStream::ForceStream(const FieldRealization& field, double t_start, double dt, std::size_t reanchor_every,
                         const simd::KernelTable& kernels)
    : bank_(scaled_alphas(field), field.frequencies(), kernels),
      t_start_(t_start),
      dt_(dt),
      reanchor_every_(std::max<std::size_t>(1, reanchor_every)) {
  bank_.set_step(dt);
}

ForceCoefficients ForceStream::next() {
  if (step_ % reanchor_every_ == 0) bank_.anchor(time());
  const auto s = bank_.sum_and_advance();
  ++step_;
  return {s.real(), s.imag()};
}

ControlPath sample_U_path(const FieldRealization& field, const PathGrid& grid, const simd::KernelTable& kernels) {
  return integrated_path(field.alphas(), field.frequencies(), kInvSqrtTwoPi / std::sqrt(static_cast<double>(field.N())),
                         grid, kernels);
}

ControlPath sample_u_path(const FieldRealization& field, int n, const PathGrid& grid,
                          const simd::KernelTable& kernels) {
  return integrated_path(field.column(n), field.column_frequencies(n), kInvSqrtTwoPi, grid, kernels);
}

ControlPath sample_y_path(const FieldRealization& field, int n, const PathGrid& grid,
                          const simd::KernelTable& kernels) {
  std::vector<double> freqs;
  for (int m = -field.M(); m <= field.M(); ++m) freqs.push_back(static_cast<double>(m));
  return integrated_path(field.column(n), freqs, kInvSqrtTwoPi, grid, kernels);
}

SpectrumDiagnostics diagnostics(const SpectrumConfig& config) {
  config.validate();
  SpectrumDiagnostics d;
  std::vector<double> frac;
  double sig_min = 1.0, sig_max = 0.0;
  for (int n = 1; n <= config.N; ++n) {
    const double s = config.sigma_n(n);
    sig_min = std::min(sig_min, s);
    sig_max = std::max(sig_max, s);
    frac.push_back(s - std::floor(s));
  }
  std::sort(frac.begin(), frac.end());
  frac.erase(std::unique(frac.begin(), frac.end(), [](double a, double b) { return std::abs(a - b) < 1e-12; }),
             frac.end());
  double gap = 1.0;
  for (std::size_t i = 1; i < frac.size(); ++i) gap = std::min(gap, frac[i] - frac[i - 1]);
  if (frac.size() > 1) gap = std::min(gap, 1.0 + frac.front() - frac.back());

  d.dv_phi = gap;
  d.e_typ = kInvSqrtTwoPi / std::sqrt(static_cast<double>(config.N));
  const double accel = config.amp_scale * d.e_typ;
  d.s_typ = 4.0 * std::sqrt(accel) / d.dv_phi;
  d.dv_box = 5.0 * std::cbrt(accel * accel);
  d.tau_disc = kTwoPi / d.dv_phi;
  d.v_min = -config.M + sig_min;
  d.v_max = config.M + sig_max;
  return d;
}

double overlap_parameter(double charge_over_mass, double e_over_k_a, double e_over_k_b, double dv_phi) {
  return 2.0 * std::sqrt(std::abs(charge_over_mass)) *
         (std::sqrt(std::abs(e_over_k_a)) + std::sqrt(std::abs(e_over_k_b))) / std::abs(dv_phi);
}

std::complex<double> pairing(const FieldRealization& field, int n, const TestFunction& g) {
  const auto col = field.column(n);
  const auto freqs = field.column_frequencies(n);
  std::complex<double> s{};
  for (std::size_t k = 0; k < col.size(); ++k) s += col[k] * g.fourier_coefficient(freqs[k]);
  return s;
}

}  // namespace qldrift

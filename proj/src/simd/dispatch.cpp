#include <cmath>
#include <cstdlib>
#include <stdexcept>
#include <string>

#include "qldrift/simd/phasor.hpp"

namespace qldrift::simd {

bool cpu_supports_avx2_fma() {
#if (defined(__x86_64__) || defined(__i386__)) && (defined(__GNUC__) || defined(__clang__))
  static const bool ok = [] {
    __builtin_cpu_init();
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
  }();
  return ok;
#else
  return false;
#endif
}

const KernelTable* kernels_by_name(std::string_view name) {
  if (name == "scalar") return &scalar_kernels();
  if (name == "avx2") return cpu_supports_avx2_fma() ? avx2_kernels() : nullptr;
  return nullptr;
}

const KernelTable& active_kernels() {
  static const KernelTable* chosen = [] {
    if (const char* env = std::getenv("QLDRIFT_SIMD")) {
      if (const KernelTable* k = kernels_by_name(env)) return k;
    }
    if (cpu_supports_avx2_fma()) return avx2_kernels();
    return &scalar_kernels();
  }();
  return *chosen;
}

PhasorBank::PhasorBank(std::span<const std::complex<double>> coefficients, std::span<const double> frequencies,
                       const KernelTable& kernels)
    : kernels_(&kernels) {
  if (coefficients.size() != frequencies.size())
    throw std::invalid_argument("phasor bank: coefficient and frequency counts differ");
  const std::size_t n = frequencies.size();
  freq_.assign(frequencies.begin(), frequencies.end());
  c_re_.resize(n);
  c_im_.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    c_re_[k] = coefficients[k].real();
    c_im_[k] = coefficients[k].imag();
  }
  z_re_.assign(n, 1.0);
  z_im_.assign(n, 0.0);
  r_re_.assign(n, 1.0);
  r_im_.assign(n, 0.0);
}

void PhasorBank::anchor(double t) {
  for (std::size_t k = 0; k < freq_.size(); ++k) {
    const double phase = -freq_[k] * t;
    z_re_[k] = std::cos(phase);
    z_im_[k] = std::sin(phase);
  }
}

void PhasorBank::set_step(double dt) {
  for (std::size_t k = 0; k < freq_.size(); ++k) {
    const double phase = -freq_[k] * dt;
    r_re_[k] = std::cos(phase);
    r_im_[k] = std::sin(phase);
  }
}

PhasorArrays PhasorBank::arrays() const {
  return {c_re_.data(), c_im_.data(), z_re_.data(), z_im_.data(), r_re_.data(), r_im_.data(), freq_.size()};
}

std::complex<double> PhasorBank::sum() const { return kernels_->sum(arrays()); }

std::complex<double> PhasorBank::sum_and_advance() { return kernels_->sum_and_rotate(arrays()); }

}  // namespace qldrift::simd

#pragma once

// Rotating-phasor sums, the inner loop of every field evaluation:
//
//   S = sum_k c_k z_k,  then  z_k <- z_k r_k
//
// with z_k = exp(-i w_k t) and r_k = exp(-i w_k dt). A scalar reference
// kernel is always built; an AVX2/FMA kernel is compiled separately and
// chosen at runtime when the CPU supports it.

#include <complex>
#include <cstddef>
#include <new>
#include <span>
#include <string_view>
#include <vector>

namespace qldrift::simd {

template <class T, std::size_t Align = 64>
struct AlignedAllocator {
  using value_type = T;
  template <class U>
  struct rebind {
    using other = AlignedAllocator<U, Align>;
  };
  AlignedAllocator() noexcept = default;
  template <class U>
  AlignedAllocator(const AlignedAllocator<U, Align>&) noexcept {}

  T* allocate(std::size_t n) {
    return static_cast<T*>(::operator new(n * sizeof(T), std::align_val_t{Align}));
  }
  void deallocate(T* p, std::size_t) noexcept { ::operator delete(p, std::align_val_t{Align}); }

  template <class U>
  bool operator==(const AlignedAllocator<U, Align>&) const noexcept {
    return true;
  }
};

using AlignedDoubles = std::vector<double, AlignedAllocator<double>>;

/// Structure-of-arrays view over one bank of phasor terms.
struct PhasorArrays {
  const double* c_re;
  const double* c_im;
  double* z_re;
  double* z_im;
  const double* r_re;
  const double* r_im;
  std::size_t size;
};

struct KernelTable {
  const char* name;
  std::complex<double> (*sum)(const PhasorArrays&);
  std::complex<double> (*sum_and_rotate)(const PhasorArrays&);
};

const KernelTable& scalar_kernels();
/// nullptr when the build has no AVX2 translation unit.
const KernelTable* avx2_kernels();

bool cpu_supports_avx2_fma();

/// Kernel used by default: AVX2 when available, unless QLDRIFT_SIMD=scalar.
const KernelTable& active_kernels();
/// Looks up a kernel table by name ("scalar", "avx2"); nullptr if unusable here.
const KernelTable* kernels_by_name(std::string_view name);

/// Owns one bank of coefficients c_k, current phasors z_k and per-step rotators r_k.
class PhasorBank {
 public:
  PhasorBank(std::span<const std::complex<double>> coefficients, std::span<const double> frequencies,
             const KernelTable& kernels = active_kernels());

  /// z_k = exp(-i w_k t), computed directly.
  void anchor(double t);
  /// r_k = exp(-i w_k dt).
  void set_step(double dt);

  std::complex<double> sum() const;
  /// Returns sum_k c_k z_k and advances every z_k by one step.
  std::complex<double> sum_and_advance();

  std::size_t size() const { return freq_.size(); }
  const KernelTable& kernels() const { return *kernels_; }

 private:
  PhasorArrays arrays() const;

  const KernelTable* kernels_;
  AlignedDoubles freq_;
  AlignedDoubles c_re_, c_im_;
  mutable AlignedDoubles z_re_, z_im_;
  AlignedDoubles r_re_, r_im_;
};

}  // namespace qldrift::simd

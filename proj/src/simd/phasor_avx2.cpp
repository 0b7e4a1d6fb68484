// Built with -mavx2 -mfma. Nothing in here may run before
// cpu_supports_avx2_fma() has returned true.

#include <immintrin.h>

#include "qldrift/simd/phasor.hpp"

namespace qldrift::simd {

namespace {

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

std::complex<double> sum_avx2(const PhasorArrays& a) {
  __m256d acc_re = _mm256_setzero_pd();
  __m256d acc_im = _mm256_setzero_pd();
  const std::size_t vec_end = a.size & ~std::size_t{3};
  std::size_t k = 0;
  for (; k < vec_end; k += 4) {
    const __m256d cr = _mm256_loadu_pd(a.c_re + k);
    const __m256d ci = _mm256_loadu_pd(a.c_im + k);
    const __m256d zr = _mm256_loadu_pd(a.z_re + k);
    const __m256d zi = _mm256_loadu_pd(a.z_im + k);
    acc_re = _mm256_fmadd_pd(cr, zr, acc_re);
    acc_re = _mm256_fnmadd_pd(ci, zi, acc_re);
    acc_im = _mm256_fmadd_pd(cr, zi, acc_im);
    acc_im = _mm256_fmadd_pd(ci, zr, acc_im);
  }
  double s_re = hsum(acc_re), s_im = hsum(acc_im);
  for (; k < a.size; ++k) {
    s_re += a.c_re[k] * a.z_re[k] - a.c_im[k] * a.z_im[k];
    s_im += a.c_re[k] * a.z_im[k] + a.c_im[k] * a.z_re[k];
  }
  return {s_re, s_im};
}

std::complex<double> sum_and_rotate_avx2(const PhasorArrays& a) {
  // Two independent accumulator pairs hide FMA latency.
  __m256d acc_re0 = _mm256_setzero_pd(), acc_im0 = _mm256_setzero_pd();
  __m256d acc_re1 = _mm256_setzero_pd(), acc_im1 = _mm256_setzero_pd();
  const std::size_t vec8_end = a.size & ~std::size_t{7};
  const std::size_t vec4_end = a.size & ~std::size_t{3};
  std::size_t k = 0;

  auto body = [&a](std::size_t i, __m256d& acc_re, __m256d& acc_im) {
    const __m256d cr = _mm256_loadu_pd(a.c_re + i);
    const __m256d ci = _mm256_loadu_pd(a.c_im + i);
    const __m256d zr = _mm256_loadu_pd(a.z_re + i);
    const __m256d zi = _mm256_loadu_pd(a.z_im + i);
    const __m256d rr = _mm256_loadu_pd(a.r_re + i);
    const __m256d ri = _mm256_loadu_pd(a.r_im + i);
    acc_re = _mm256_fmadd_pd(cr, zr, acc_re);
    acc_re = _mm256_fnmadd_pd(ci, zi, acc_re);
    acc_im = _mm256_fmadd_pd(cr, zi, acc_im);
    acc_im = _mm256_fmadd_pd(ci, zr, acc_im);
    _mm256_storeu_pd(a.z_re + i, _mm256_fmsub_pd(zr, rr, _mm256_mul_pd(zi, ri)));
    _mm256_storeu_pd(a.z_im + i, _mm256_fmadd_pd(zr, ri, _mm256_mul_pd(zi, rr)));
  };

  for (; k < vec8_end; k += 8) {
    body(k, acc_re0, acc_im0);
    body(k + 4, acc_re1, acc_im1);
  }
  for (; k < vec4_end; k += 4) body(k, acc_re0, acc_im0);

  double s_re = hsum(_mm256_add_pd(acc_re0, acc_re1));
  double s_im = hsum(_mm256_add_pd(acc_im0, acc_im1));
  for (; k < a.size; ++k) {
    const double zr = a.z_re[k], zi = a.z_im[k];
    s_re += a.c_re[k] * zr - a.c_im[k] * zi;
    s_im += a.c_re[k] * zi + a.c_im[k] * zr;
    a.z_re[k] = zr * a.r_re[k] - zi * a.r_im[k];
    a.z_im[k] = zr * a.r_im[k] + zi * a.r_re[k];
  }
  return {s_re, s_im};
}

}  // namespace

const KernelTable* avx2_kernels() {
  static const KernelTable table{"avx2", &sum_avx2, &sum_and_rotate_avx2};
  return &table;
}

}  // namespace qldrift::simd

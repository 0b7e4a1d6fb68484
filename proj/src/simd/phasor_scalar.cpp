#include "qldrift/simd/phasor.hpp"

namespace qldrift::simd {

namespace {

std::complex<double> sum_scalar(const PhasorArrays& a) {
  double s_re = 0.0, s_im = 0.0;
  for (std::size_t k = 0; k < a.size; ++k) {
    s_re += a.c_re[k] * a.z_re[k] - a.c_im[k] * a.z_im[k];
    s_im += a.c_re[k] * a.z_im[k] + a.c_im[k] * a.z_re[k];
  }
  return {s_re, s_im};
}

std::complex<double> sum_and_rotate_scalar(const PhasorArrays& a) {
  double s_re = 0.0, s_im = 0.0;
  for (std::size_t k = 0; k < a.size; ++k) {
    const double zr = a.z_re[k], zi = a.z_im[k];
    s_re += a.c_re[k] * zr - a.c_im[k] * zi;
    s_im += a.c_re[k] * zi + a.c_im[k] * zr;
    a.z_re[k] = zr * a.r_re[k] - zi * a.r_im[k];
    a.z_im[k] = zr * a.r_im[k] + zi * a.r_re[k];
  }
  return {s_re, s_im};
}

}  // namespace

const KernelTable& scalar_kernels() {
  static const KernelTable table{"scalar", &sum_scalar, &sum_and_rotate_scalar};
  return table;
}

}  // namespace qldrift::simd

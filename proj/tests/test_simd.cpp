#include <doctest.h>

#include <cmath>
#include <complex>
#include <vector>

#include "qldrift/rng.hpp"
#include "qldrift/simd/phasor.hpp"

using namespace qldrift;
using namespace qldrift::simd;

namespace {

struct Bank {
  std::vector<std::complex<double>> c;
  std::vector<double> w;
};

Bank random_bank(std::size_t n, std::uint64_t seed) {
  CounterStream s(seed, 0);
  Bank b;
  for (std::size_t k = 0; k < n; ++k) {
    b.c.emplace_back(s.normal(), s.normal());
    b.w.push_back(200.0 * (s.uniform() - 0.5));
  }
  return b;
}

}  // namespace

TEST_CASE("kernel lookup") {
  CHECK(kernels_by_name("scalar") == &scalar_kernels());
  CHECK(kernels_by_name("nonsense") == nullptr);
  if (cpu_supports_avx2_fma()) CHECK(kernels_by_name("avx2") != nullptr);
  CHECK(active_kernels().name != nullptr);
}

TEST_CASE("scalar phasor bank matches direct sums") {
  const auto b = random_bank(37, 1);
  PhasorBank bank(b.c, b.w, scalar_kernels());
  const double t0 = 0.3, dt = 0.01;
  bank.anchor(t0);
  bank.set_step(dt);
  for (int step = 0; step < 500; ++step) {
    const double t = t0 + step * dt;
    std::complex<double> direct{};
    for (std::size_t k = 0; k < b.c.size(); ++k) direct += b.c[k] * std::polar(1.0, -b.w[k] * t);
    const auto s = bank.sum_and_advance();
    CHECK(std::abs(s - direct) < 1e-11);
  }
}

TEST_CASE("AVX2 kernels agree with the scalar reference") {
  const KernelTable* avx = kernels_by_name("avx2");
  if (avx == nullptr) {
    MESSAGE("AVX2/FMA unavailable on this CPU; equivalence not exercised");
    return;
  }
  for (std::size_t n : {1u, 3u, 4u, 5u, 8u, 17u, 257u, 1031u}) {
    CAPTURE(n);
    const auto b = random_bank(n, 100 + n);
    PhasorBank ref(b.c, b.w, scalar_kernels());
    PhasorBank vec(b.c, b.w, *avx);
    for (auto* p : {&ref, &vec}) {
      p->anchor(1.7);
      p->set_step(-0.013);
    }
    double scale = 0.0;
    for (const auto& c : b.c) scale += std::abs(c);
    CHECK(std::abs(ref.sum() - vec.sum()) <= 1e-12 * scale);
    for (int step = 0; step < 2000; ++step) {
      const auto a = ref.sum_and_advance();
      const auto v = vec.sum_and_advance();
      REQUIRE(std::abs(a - v) <= 1e-12 * scale);
    }
  }
}

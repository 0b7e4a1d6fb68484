#include <doctest.h>

#include <cmath>
#include <set>
#include <vector>

#include "qldrift/rng.hpp"

using namespace qldrift;

TEST_CASE("philox4x32-10 known-answer vectors") {
  const auto zero = philox4x32({0, 0, 0, 0}, {0, 0});
  CHECK(zero == PhiloxCounter{0x6627e8d5U, 0xe169c58dU, 0xbc57ac4cU, 0x9b00dbd8U});

  const std::uint32_t f = 0xffffffffU;
  const auto ones = philox4x32({f, f, f, f}, {f, f});
  CHECK(ones == PhiloxCounter{0x408f276dU, 0x41c83b0eU, 0xa20bc7c6U, 0x6d5451fdU});

  const auto pi = philox4x32({0x243f6a88U, 0x85a308d3U, 0x13198a2eU, 0x03707344U}, {0xa4093822U, 0x299f31d0U});
  CHECK(pi == PhiloxCounter{0xd16cfe09U, 0x94fdccebU, 0x5001e420U, 0x24126ea1U});
}

TEST_CASE("to_open_unit stays strictly inside (0, 1)") {
  CHECK(to_open_unit(0) > 0.0);
  CHECK(to_open_unit(~std::uint64_t{0}) < 1.0);
  CHECK(to_open_unit(0) == 0x1.0p-53);
  CHECK(1.0 - to_open_unit(~std::uint64_t{0}) == 0x1.0p-53);
}

TEST_CASE("derive_seed separates nearby indices") {
  std::set<std::uint64_t> seen;
  for (std::uint64_t i = 0; i < 10000; ++i) seen.insert(derive_seed(42, i));
  CHECK(seen.size() == 10000);
  CHECK(derive_seed(1, 0) != derive_seed(2, 0));
}

TEST_CASE("counter streams replay exactly and differ across ids") {
  CounterStream a(7, 3), b(7, 3), c(7, 4);
  for (int i = 0; i < 100; ++i) {
    const auto va = a.next_u64();
    CHECK(va == b.next_u64());
    CHECK(va != c.next_u64());
  }
}

TEST_CASE("counter-stream normals have unit variance") {
  CounterStream s(2024, 0);
  const int n = 200000;
  double m1 = 0, m2 = 0, m4 = 0;
  for (int i = 0; i < n; ++i) {
    const double x = s.normal();
    m1 += x;
    m2 += x * x;
    m4 += x * x * x * x;
  }
  m1 /= n;
  m2 /= n;
  m4 /= n;
  CHECK(std::abs(m1) < 3.0 / std::sqrt(n));
  CHECK(std::abs(m2 - 1.0) < 3.0 * std::sqrt(2.0 / n));
  CHECK(std::abs(m4 - 3.0) < 3.0 * std::sqrt(96.0 / n));
}

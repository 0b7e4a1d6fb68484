#include <doctest.h>

#include <cmath>
#include <complex>
#include <map>
#include <numbers>
#include <vector>

#include "qldrift/ensembles.hpp"
#include "qldrift/stats.hpp"

using namespace qldrift;

namespace {

constexpr double kPi = std::numbers::pi;

const StatReport& find(const StatReports& rs, const std::string& name) {
  for (const auto& r : rs)
    if (r.name == name) return r;
  FAIL("missing report " << name);
  return rs.front();
}

}  // namespace

TEST_CASE("four-point law sits on the quarter circle with equal weights") {
  const auto spec = EnsembleSpec::four_point(0.0);
  std::map<int, int> counts;
  const int n = 40000;
  for (int i = 0; i < n; ++i) {
    const auto a = sample_alpha(spec, {99, i, 1});
    CHECK(a.a == 1.0);
    const double k = a.phi / (kPi / 2.0);
    const int ki = static_cast<int>(std::lround(k));
    CHECK(std::abs(k - ki) < 1e-12);
    ++counts[ki % 4];
  }
  REQUIRE(counts.size() == 4);
  for (const auto& [k, c] : counts) CHECK(std::abs(c - n / 4) < 3.0 * std::sqrt(n * 0.25 * 0.75));
}

TEST_CASE("four-point offset rotates the support") {
  const auto spec = EnsembleSpec::four_point(0.3);
  for (int i = 0; i < 200; ++i) {
    const auto a = sample_alpha(spec, {5, i, 2});
    const double k = (a.phi - 0.3) / (kPi / 2.0);
    CHECK(std::abs(k - std::round(k)) < 1e-12);
  }
}

TEST_CASE("steinhaus unit law: unit modulus, uniform phase") {
  const auto spec = EnsembleSpec::steinhaus();
  std::vector<double> phases;
  for (int i = 0; i < 20000; ++i) {
    const auto a = sample_alpha(spec, {11, i % 200, 1 + i / 200});
    CHECK(a.a == 1.0);
    CHECK(a.phi >= 0.0);
    CHECK(a.phi < 2.0 * kPi);
    phases.push_back(a.phi);
  }
  CHECK(chi_square_uniform_pvalue(phases, 0.0, 2.0 * kPi, 32) > 1e-3);
}

TEST_CASE("empirical mean of alpha over 1e5 keys is within 3 SE of 0") {
  const auto spec = EnsembleSpec::steinhaus();
  std::complex<double> s{};
  const int n = 100000;
  for (int i = 0; i < n; ++i) s += sample_alpha(spec, {3, i, 1}).value();
  CHECK(std::abs(s / double(n)) <= 3.0 / std::sqrt(double(n)));
}

TEST_CASE("moment probes for every shipped law") {
  SUBCASE("complex normal: E A^2 = 1 within 3 SE") {
    const auto rs = moment_probe(EnsembleSpec::complex_normal(), 10000, 17);
    CHECK(find(rs, "E A^2 - 1").passed);
    CHECK(all_passed(rs));
  }
  SUBCASE("four-point: E A^4 = 1 exactly") {
    const auto rs = moment_probe(EnsembleSpec::four_point(0.7), 1000, 1);
    CHECK(find(rs, "E A^4").value == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(all_passed(rs));
  }
  SUBCASE("steinhaus unit: |E alpha^2| within 3 SE") {
    const auto rs = moment_probe(EnsembleSpec::steinhaus(), 10000, 23);
    CHECK(find(rs, "|E alpha^2|").passed);
  }
  SUBCASE("rayleigh and uniform moduli") {
    CHECK(all_passed(moment_probe(EnsembleSpec::steinhaus(AmplitudeLaw::rayleigh()), 20000, 5)));
    CHECK(all_passed(moment_probe(EnsembleSpec::steinhaus(AmplitudeLaw::uniform()), 20000, 6)));
  }
  CHECK_THROWS_AS(moment_probe(EnsembleSpec::steinhaus(), 50, 1), std::invalid_argument);
}

TEST_CASE("draws are keyed, not sequential") {
  const auto spec = EnsembleSpec::complex_normal();
  const auto a = sample_alpha(spec, {8, -3, 2});
  for (int i = 0; i < 10; ++i) sample_alpha(spec, {8, i, 1});
  const auto b = sample_alpha(spec, {8, -3, 2});
  CHECK(a.a == b.a);
  CHECK(a.phi == b.phi);
  const auto c = sample_alpha(spec, {8, 3, 2});
  CHECK(a.phi != c.phi);
}

TEST_CASE("seed keys are range-checked") {
  CHECK_NOTHROW(make_seed_key(0, -4, 1, 4, 2));
  CHECK_THROWS_AS(make_seed_key(0, 5, 1, 4, 2), std::out_of_range);
  CHECK_THROWS_AS(make_seed_key(0, 0, 0, 4, 2), std::out_of_range);
  CHECK_THROWS_AS(make_seed_key(0, 0, 3, 4, 2), std::out_of_range);
}

TEST_CASE("custom laws must be normalized with a finite fourth moment") {
  PhaseLaw uniform{"uniform", [](double u) { return 2.0 * kPi * u; }};
  AmplitudeLaw twice{"twice", [](double) { return 2.0; }, 4.0, 16.0};
  CHECK_THROWS_AS(EnsembleSpec::custom(uniform, twice, true), std::invalid_argument);
  AmplitudeLaw heavy{"heavy", [](double) { return 1.0; }, 1.0, INFINITY};
  CHECK_THROWS_AS(EnsembleSpec::custom(uniform, heavy, true), std::invalid_argument);
  const auto ok = EnsembleSpec::custom(uniform, AmplitudeLaw::unit(), true);
  CHECK(ok.kind() == EnsembleKind::Custom);
  CHECK(ok.c4_bound() == 1.0);
}

TEST_CASE("a non-four-symmetric custom law does not assert E alpha^2 = 0") {
  PhaseLaw half{"half", [](double u) { return kPi * u; }};
  const auto spec = EnsembleSpec::custom(half, AmplitudeLaw::unit(), false);
  const auto rs = moment_probe(spec, 5000, 2);
  CHECK(find(rs, "|E alpha^2|").comparison == Comparison::Info);
  CHECK_FALSE(find(rs, "|E alpha|").passed);
}

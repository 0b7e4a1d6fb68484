#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace qldrift {

/// How `value` is compared against `threshold` to produce the verdict.
enum class Comparison {
  AtMost,       // value <= threshold
  AtLeast,      // value >= threshold
  AbsAtMost,    // |value| <= threshold
  Within,       // lower <= value <= threshold
  Info,         // reported only; always passes
};

/// A named statistic together with the verdict it produced.
struct StatReport {
  std::string name;
  double value = 0.0;
  std::optional<double> std_error;
  double threshold = 0.0;
  std::optional<double> lower;
  Comparison comparison = Comparison::AtMost;
  bool passed = false;
  std::size_t n_samples = 0;
  std::optional<std::uint64_t> seed;
  std::string detail;

  /// Builds a report and evaluates `passed` from the comparison.
  static StatReport make(std::string name, double value, double threshold, Comparison cmp,
                         std::size_t n_samples, std::optional<double> std_error = std::nullopt);
  static StatReport info(std::string name, double value, std::size_t n_samples,
                         std::optional<double> std_error = std::nullopt);
  /// Verdict for lo <= value <= hi.
  static StatReport within(std::string name, double value, double lo, double hi, std::size_t n_samples,
                           std::optional<double> std_error = std::nullopt);

  StatReport& with_seed(std::uint64_t s) {
    seed = s;
    return *this;
  }
  StatReport& with_detail(std::string d) {
    detail = std::move(d);
    return *this;
  }
};

using StatReports = std::vector<StatReport>;

bool all_passed(const StatReports& reports);

const char* to_string(Comparison cmp);

/// "<= 0.065", "in [2.83, 3.46]", ...
std::string describe_threshold(const StatReport& r);

/// JSON record {name, value, std_error, threshold, passed, n_samples, seed}.
nlohmann::json to_json(const StatReport& r);
nlohmann::json to_json(const StatReports& rs);

}  // namespace qldrift

#include "qldrift/report.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace qldrift {

namespace {

bool evaluate(double value, double threshold, std::optional<double> lower, Comparison cmp) {
  if (!std::isfinite(value)) return cmp == Comparison::Info;
  switch (cmp) {
    case Comparison::AtMost: return value <= threshold;
    case Comparison::AtLeast: return value >= threshold;
    case Comparison::AbsAtMost: return std::abs(value) <= threshold;
    case Comparison::Within: return value >= lower.value_or(-INFINITY) && value <= threshold;
    case Comparison::Info: return true;
  }
  return false;
}

nlohmann::json number_or_null(double v) {
  if (std::isfinite(v)) return v;
  return nullptr;
}

}  // namespace

StatReport StatReport::make(std::string name, double value, double threshold, Comparison cmp,
                            std::size_t n_samples, std::optional<double> std_error) {
  StatReport r;
  r.name = std::move(name);
  r.value = value;
  r.threshold = threshold;
  r.comparison = cmp;
  r.n_samples = n_samples;
  r.std_error = std_error;
  r.passed = evaluate(value, threshold, std::nullopt, cmp);
  return r;
}

StatReport StatReport::info(std::string name, double value, std::size_t n_samples,
                            std::optional<double> std_error) {
  return make(std::move(name), value, 0.0, Comparison::Info, n_samples, std_error);
}

StatReport StatReport::within(std::string name, double value, double lo, double hi, std::size_t n_samples,
                              std::optional<double> std_error) {
  StatReport r = make(std::move(name), value, hi, Comparison::Within, n_samples, std_error);
  r.lower = lo;
  r.passed = evaluate(value, hi, lo, Comparison::Within);
  return r;
}

bool all_passed(const StatReports& reports) {
  return std::all_of(reports.begin(), reports.end(), [](const StatReport& r) { return r.passed; });
}

const char* to_string(Comparison cmp) {
  switch (cmp) {
    case Comparison::AtMost: return "<=";
    case Comparison::AtLeast: return ">=";
    case Comparison::AbsAtMost: return "|.|<=";
    case Comparison::Within: return "in";
    case Comparison::Info: return "info";
  }
  return "?";
}

std::string describe_threshold(const StatReport& r) {
  std::ostringstream os;
  os.precision(6);
  if (r.comparison == Comparison::Within)
    os << "in [" << r.lower.value_or(-INFINITY) << ", " << r.threshold << ']';
  else if (r.comparison != Comparison::Info)
    os << to_string(r.comparison) << ' ' << r.threshold;
  return os.str();
}

nlohmann::json to_json(const StatReport& r) {
  nlohmann::json j;
  j["name"] = r.name;
  j["value"] = number_or_null(r.value);
  j["std_error"] = r.std_error ? number_or_null(*r.std_error) : nlohmann::json(nullptr);
  if (r.comparison == Comparison::Within) {
    j["threshold"] = {number_or_null(r.lower.value_or(-INFINITY)), number_or_null(r.threshold)};
  } else if (r.comparison == Comparison::Info) {
    j["threshold"] = nullptr;
  } else {
    j["threshold"] = number_or_null(r.threshold);
  }
  j["comparison"] = to_string(r.comparison);
  j["passed"] = r.passed;
  j["n_samples"] = r.n_samples;
  j["seed"] = r.seed ? nlohmann::json(*r.seed) : nlohmann::json(nullptr);
  if (!r.detail.empty()) j["detail"] = r.detail;
  return j;
}

nlohmann::json to_json(const StatReports& rs) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& r : rs) arr.push_back(to_json(r));
  return arr;
}

}  // namespace qldrift

#pragma once

// The acceptance suite: eight criteria, each a set of verdicts over freshly
// generated Monte Carlo data, plus informational diagnostics that never
// affect the exit code.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "qldrift/report.hpp"

namespace qldrift::runner {

inline constexpr std::uint64_t kDefaultAcceptanceSeed = 20240611;
inline constexpr int kCriterionCount = 8;

struct AcceptanceOptions {
  bool quick = false;
  std::uint64_t seed = kDefaultAcceptanceSeed;
  std::filesystem::path out_dir = "qldrift_verify";
  std::size_t workers = 1;
  std::ostream* log = nullptr;
  /// Coupling used by the particle criteria; the default is the physical
  /// value. Exposed so mutation tests can perturb it.
  double force_coupling = 0.0;  // 0: default
};

struct CriterionResult {
  int id = 0;
  std::string title;
  bool passed = false;
  double seconds = 0.0;
  double budget_s = 0.0;
  StatReports reports;
  StatReports diagnostics;  // informational only
  std::vector<std::string> files;
  std::string error;  // set when the criterion aborted
};

struct AcceptanceSummary {
  std::vector<CriterionResult> criteria;
  bool passed = false;
  nlohmann::json report;
};

std::string criterion_title(int id);

/// Runs one criterion, writing its data files under options.out_dir.
CriterionResult run_criterion(int id, const AcceptanceOptions& options);

/// Runs all criteria and writes verify_report.json.
AcceptanceSummary run_acceptance(const AcceptanceOptions& options);

nlohmann::json to_json(const CriterionResult& r);

/// One-line verdict, e.g. "PASS criterion 4 (pairing moments) [1.2 s]".
std::string summary_line(const CriterionResult& r);

}  // namespace qldrift::runner

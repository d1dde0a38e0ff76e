#pragma once

#include <string>
#include <vector>

#include <json.hpp>

namespace cofreq::suite {

struct CheckResult {
  int id = 0;
  std::string name;
  bool pass = false;
  std::string metric;      // what `measured` is
  double measured = 0.0;
  std::string comparison;  // "<", "<=", ">=", "in"
  double tolerance = 0.0;
  double seconds = 0.0;
  double budget = 0.0;     // seconds, 0 when the criterion has none
  std::vector<std::string> details;
};

struct SuiteOptions {
  unsigned long seed = 1;
};

constexpr int kCriteria = 10;

CheckResult run_criterion(int id, const SuiteOptions &opts);
std::vector<CheckResult> run_suite(const std::vector<int> &ids, const SuiteOptions &opts);

/// One line: "criterion k PASS|FAIL <name>: <metric> = v (tol) [t s]".
std::string summary_line(const CheckResult &r);
/// Report entry without wall-clock time, so reports are byte-stable.
nlohmann::json to_json(const CheckResult &r);

}  // namespace cofreq::suite

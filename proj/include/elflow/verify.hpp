#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace elflow::verify {

struct CheckResult {
  std::string name;
  double measured = 0.0;
  double bound = 0.0;
  bool pass = false;
  std::string relation = "<=";  ///< how measured compares with bound
  std::string detail;
};

struct CriterionResult {
  int id = 0;
  std::string title;
  std::vector<CheckResult> checks;
  double seconds = 0.0;

  bool pass() const;
};

/// Number of acceptance criteria.
constexpr int kCriteria = 10;

/// Runs acceptance criterion `id` in 1..kCriteria.
CriterionResult run_criterion(int id);

/// Criteria making up a named suite: operators, energy, picard, weakstrong, all.
std::vector<int> suite_criteria(const std::string& suite);

/// Runs a suite, printing one line per check; returns 0 iff all pass.
/// Unknown suite names throw std::invalid_argument.
int run_suite(const std::string& suite, std::ostream& out);

std::string format_check(const CheckResult& c);

/// Drops cached trajectories shared between criteria.
void clear_cache();

}  // namespace elflow::verify

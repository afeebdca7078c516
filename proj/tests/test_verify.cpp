#include <doctest.h>

#include <sstream>

#include "elflow/operators.hpp"
#include "elflow/verify.hpp"

using namespace elflow;

TEST_CASE("suite membership") {
  CHECK(verify::suite_criteria("operators") == std::vector<int>{1});
  CHECK(verify::suite_criteria("weakstrong") == std::vector<int>{8});
  CHECK(verify::suite_criteria("all").size() == verify::kCriteria);
  CHECK_THROWS_AS(verify::suite_criteria("everything"), std::invalid_argument);
  CHECK_THROWS_AS(verify::run_criterion(0), std::invalid_argument);
}

TEST_CASE("operators suite passes, and fails under a perturbed stencil") {
  std::ostringstream ok;
  CHECK(verify::run_suite("operators", ok) == 0);
  CHECK(ok.str().find("FAIL") == std::string::npos);

  testing::set_stencil_fault(true);
  std::ostringstream bad;
  const int rc = verify::run_suite("operators", bad);
  testing::set_stencil_fault(false);
  CHECK(rc == 4);
  CHECK(bad.str().find("laplacian @16^2") != std::string::npos);
  CHECK(bad.str().find("FAIL") != std::string::npos);
}

TEST_CASE("check formatting") {
  const verify::CheckResult c{"ratio", 3.9, 3.0, true, ">=", "note"};
  const std::string s = verify::format_check(c);
  CHECK(s.find("ratio") != std::string::npos);
  CHECK(s.find("PASS") != std::string::npos);
  CHECK(s.find("(note)") != std::string::npos);
}

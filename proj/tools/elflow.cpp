// Command-line front end: run, verify, scenario list, mms.

#include <cmath>
#include <cstdio>
#include <iostream>

#include <CLI11.hpp>

#include "elflow/io.hpp"
#include "elflow/verify.hpp"

namespace {

int cmd_run(const std::string& path) {
  const elflow::RunSummary s = elflow::run(path);
  std::cout << s.to_json() << "\n";
  if (s.exit_code != elflow::kExitOk) std::cerr << "elflow: " << s.message << "\n";
  return s.exit_code;
}

int cmd_mms(int refine) {
  using namespace elflow;
  std::printf("%6s %12s %14s %8s\n", "n", "dt", "L2 error u", "order");
  double prev = 0.0;
  for (int r = 0; r < refine; ++r) {
    const int n = 16 << r;
    const double h = 1.0 / n;
    const Scenario s =
        build_scenario("mms", {{"n", std::to_string(n)}, {"dt", format_g17(0.5 * h * h)}});
    const State end = advance(initial_state(s), s.t_end, picard_config(s), {});
    const double e = l2_norm(VectorField(end.u - mms_exact_state(s, s.t_end).u));
    if (r == 0) std::printf("%6d %12.4e %14.6e %8s\n", n, s.dt, e, "-");
    else std::printf("%6d %12.4e %14.6e %8.3f\n", n, s.dt, e, std::log2(prev / e));
    prev = e;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Finite-volume solver for incompressible viscoelastic flow"};
  app.require_subcommand(1);

  std::string config;
  auto* run = app.add_subcommand("run", "Run a configured simulation");
  run->add_option("config", config, "key = value config file")->required();

  std::string suite;
  auto* verify = app.add_subcommand("verify", "Run a verification suite");
  verify->add_option("suite", suite, "operators, energy, picard, weakstrong or all")
      ->required()
      ->check(CLI::IsMember({"operators", "energy", "picard", "weakstrong", "all"}));

  auto* scenario = app.add_subcommand("scenario", "Inspect bundled scenarios");
  scenario->require_subcommand(1);
  auto* list = scenario->add_subcommand("list", "List bundled scenarios");

  int refine = 3;
  auto* mms = app.add_subcommand("mms", "Manufactured-solution refinement study");
  mms->add_option("--refine", refine, "number of grids, starting at 16^2")
      ->check(CLI::Range(1, 6));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : elflow::kExitConfig;
  }

  try {
    if (*run) return cmd_run(config);
    if (*verify) return elflow::verify::run_suite(suite, std::cout);
    if (*list) {
      for (const auto& name : elflow::scenario_names())
        std::cout << name << "  " << elflow::scenario_summary(name) << "\n";
      return 0;
    }
    if (*mms) return cmd_mms(refine);
  } catch (const std::exception& e) {
    std::cerr << "elflow: " << e.what() << "\n";
    return elflow::exit_code_for(e);
  }
  return 1;
}

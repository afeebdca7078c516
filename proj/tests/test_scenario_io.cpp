#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <unistd.h>

#include <json.hpp>

#include "elflow/io.hpp"
#include "test_support.hpp"

using namespace elflow;
namespace fs = std::filesystem;

namespace {

ErrorKind kind_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("no elflow::Error thrown");
  return ErrorKind::ConfigError;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& tag)
      : path(fs::temp_directory_path() / ("elflow_" + tag + "_" + std::to_string(::getpid()))) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  fs::path write(const std::string& name, const std::string& text) const {
    std::ofstream(path / name) << text;
    return path / name;
  }
};

}  // namespace

TEST_CASE("scenarios: names, defaults and overrides") {
  const auto& names = scenario_names();
  for (const char* n : {"zero", "small_vortex", "near_identity", "mms"})
    CHECK(std::find(names.begin(), names.end(), n) != names.end());
  for (const auto& n : names) CHECK_FALSE(scenario_summary(n).empty());

  const Scenario v = build_scenario("small_vortex", {{"n", "8"}, {"amplitude", "0.25"}});
  CHECK(v.n == 8);
  CHECK(v.amplitude == 0.25);
  CHECK(v.boundary == Boundary::Dirichlet);

  CHECK(kind_of([] { build_scenario("vortex_street"); }) == ErrorKind::UnknownScenario);
  CHECK(kind_of([] { build_scenario("small_vortex", {{"viscosity", "1"}}); }) ==
        ErrorKind::InvalidOverride);
  CHECK(kind_of([] { build_scenario("small_vortex", {{"n", "eight"}}); }) ==
        ErrorKind::InvalidOverride);
  CHECK(kind_of([] { build_scenario("small_vortex", {{"dt", "-1"}}); }) ==
        ErrorKind::InvalidOverride);
  CHECK(kind_of([] { build_scenario("zero", {{"epsilon", "0.1"}}); }) ==
        ErrorKind::InvalidOverride);
}

TEST_CASE("scenarios: initial data is admissible") {
  for (const auto& name : scenario_names()) {
    CAPTURE(name);
    const Scenario s = build_scenario(name, {{"n", "8"}});
    const State st = initial_state(s);
    CHECK(st.t == 0.0);
    if (name == "mms") continue;  // sampled exact field, divergence-free only as h -> 0
    CHECK(max_abs(div_vector(st.u)) < 1e-8 * std::max(1.0, max_abs(st.u)));
  }
  // Director F is the discrete gradient of w, the F form samples the exact one.
  double diff[2];
  for (int r = 0; r < 2; ++r) {
    const Scenario ni = build_scenario("near_identity", {{"n", std::to_string(16 << r)}});
    const DirectorState d = initial_director_state(ni);
    CHECK(curl_residual(d.F()) < 1e-12);
    diff[r] = test::max_diff(d.F(), initial_state(ni).F);
  }
  CHECK(diff[0] / diff[1] > 3.0);
  CHECK(diff[0] / diff[1] < 5.0);
}

TEST_CASE("config: parsing and validation") {
  const RunConfig cfg = parse_config(
      "# comment\nscenario = small_vortex\nintegrator = both  # trailing\n"
      "n = 8\nmax_picard = 20\nq = 4\n");
  CHECK(cfg.scenario == "small_vortex");
  CHECK(cfg.integrator == "both");
  CHECK(cfg.overrides.at("n") == "8");
  CHECK(cfg.max_picard == 20);
  CHECK(cfg.norms.q == 4.0);

  CHECK(kind_of([] { parse_config("integrator = picard\n"); }) == ErrorKind::ConfigError);
  CHECK(kind_of([] { parse_config("scenario = zero\nbogus = 1\n"); }) == ErrorKind::ConfigError);
  CHECK(kind_of([] { parse_config("scenario = zero\nn = 8\nn = 9\n"); }) ==
        ErrorKind::ConfigError);
  CHECK(kind_of([] { parse_config("scenario = zero\njust words\n"); }) == ErrorKind::ConfigError);
  CHECK(kind_of([] { parse_config("scenario = zero\nintegrator = rk4\n"); }) ==
        ErrorKind::ConfigError);
  CHECK(kind_of([] { parse_config("scenario = zero\ncfl_safety = 2\n"); }) ==
        ErrorKind::ConfigError);
  CHECK(kind_of([] { parse_config("scenario = nowhere\n"); }) == ErrorKind::UnknownScenario);
  CHECK(kind_of([] { parse_config("scenario = zero\nn = 1.5\n"); }) ==
        ErrorKind::InvalidOverride);
}

TEST_CASE("config: hash follows the numbers, not the output location") {
  const RunConfig a = parse_config("scenario = small_vortex\nn = 8\noutput_dir = a\n");
  const RunConfig b = parse_config("scenario = small_vortex\noutput_dir = b\nn = 8\n");
  const RunConfig c = parse_config("scenario = small_vortex\nn = 16\n");
  const RunConfig d = parse_config("scenario = small_vortex\n");
  CHECK(config_hash(a).size() == 16);
  CHECK(config_hash(a) == config_hash(b));
  CHECK(config_hash(a) != config_hash(c));
  // Spelling out a default does not change the run.
  CHECK(config_hash(c) != config_hash(a));
  CHECK(config_hash(d) == config_hash(parse_config("scenario = small_vortex\nn = 32\n")));
}

TEST_CASE("csv: round trip at full precision") {
  const Scenario s = build_scenario("small_vortex", {{"n", "8"}, {"t_end", "0.01"}});
  SeriesSink sink;
  advance(initial_state(s), s.t_end, picard_config(s), {}, &sink);
  const std::string text = diagnostics_csv(sink.records);
  const auto back = parse_diagnostics_csv(text);
  REQUIRE(back.size() == sink.records.size());
  for (std::size_t k = 0; k < back.size(); ++k) {
    const auto x = record_values(sink.records[k]), y = record_values(back[k]);
    REQUIRE(x.size() == y.size());
    for (std::size_t i = 0; i < x.size(); ++i) CHECK(x[i] == y[i]);
  }
  CHECK(diagnostics_csv(back) == text);
  CHECK(text.substr(0, text.find('\n')).rfind("t,energy,dissipation", 0) == 0);

  const auto thinned = parse_diagnostics_csv(diagnostics_csv(sink.records, 4));
  CHECK(thinned.back().t == sink.records.back().t);
  CHECK(thinned.size() < sink.records.size());
}

TEST_CASE("snapshot: write, read, write gives identical bytes") {
  TempDir dir("snap");
  for (const char* name : {"small_vortex", "near_identity"}) {
    const Scenario s = build_scenario(name, {{"n", "8"}});
    State st = initial_state(s);
    st.t = 0.125;
    write_snapshot(dir.path / "a.elf1", st);
    const Snapshot snap = read_snapshot(dir.path / "a.elf1");
    CHECK(snap.dim == 2);
    CHECK(snap.n[0] == 8);
    CHECK(snap.boundary == s.boundary);
    CHECK(snap.t == 0.125);
    const State back = snap.to_state({s.length, s.length, s.length});
    CHECK(test::max_diff(back.u, st.u) == 0.0);
    CHECK(test::max_diff(back.F, st.F) == 0.0);
    CHECK(test::max_diff(back.P, st.P) == 0.0);
    write_snapshot(dir.path / "b.elf1", back);
    CHECK(slurp(dir.path / "a.elf1") == slurp(dir.path / "b.elf1"));
    CHECK(slurp(dir.path / "a.elf1").substr(0, 4) == "ELF1");
  }
  CHECK_THROWS(decode_snapshot("ELF0garbage"));
  const std::string good = encode_snapshot(initial_state(build_scenario("zero", {{"n", "4"}})));
  CHECK_THROWS(decode_snapshot(good.substr(0, good.size() - 3)));
}

TEST_CASE("run: zero scenario") {
  TempDir dir("run_zero");
  const auto cfg = dir.write("zero.cfg", "scenario = zero\nn = 8\noutput_dir = out\n");
  const RunSummary s = run(cfg);
  CHECK(s.exit_code == kExitOk);
  CHECK(s.status == "ok");
  CHECK(s.final_time == doctest::Approx(0.1));
  CHECK(s.worst_energy_margin == 0.0);
  CHECK(s.H_end == 0.0);
  REQUIRE(fs::exists(dir.path / "out" / "picard.csv"));
  const auto records = parse_diagnostics_csv(slurp(dir.path / "out" / "picard.csv"));
  CHECK(records.size() == 11);
  for (const auto& r : records) CHECK(r.energy == 0.0);
  const auto j = nlohmann::json::parse(slurp(dir.path / "out" / "summary.json"));
  CHECK(j.at("scenario") == "zero");
  CHECK(j.at("exit_code") == 0);
  CHECK(j.at("config_hash") == s.config_hash);
}

TEST_CASE("run: unreadable config writes nothing") {
  TempDir dir("run_missing");
  CHECK(kind_of([&] { run(dir.path / "absent.cfg"); }) == ErrorKind::ConfigError);
  const auto bad = dir.write("bad.cfg", "scenario = zero\ncolour = blue\noutput_dir = out\n");
  CHECK(kind_of([&] { run(bad); }) == ErrorKind::ConfigError);
  CHECK_FALSE(fs::exists(dir.path / "out"));
  CHECK(exit_code_for(Error(ErrorKind::ConfigError, "x")) == kExitConfig);
  CHECK(exit_code_for(Error(ErrorKind::InvalidOverride, "x")) == kExitConfig);
  CHECK(exit_code_for(Error(ErrorKind::NotConverged, "x")) == kExitDiverged);
  CHECK(exit_code_for(std::runtime_error("x")) == 1);
}

TEST_CASE("run: both integrators with comparison report") {
  TempDir dir("run_both");
  const auto cfg = dir.write("both.cfg",
                             "scenario = small_vortex\nintegrator = both\nn = 8\nt_end = 0.02\n"
                             "snapshot_every = 10\noutput_dir = out\n");
  const RunSummary s = run(cfg);
  CHECK(s.exit_code == kExitOk);
  const fs::path out = dir.path / "out";
  CHECK(fs::exists(out / "picard.csv"));
  CHECK(fs::exists(out / "weak.csv"));
  CHECK(fs::exists(out / "gronwall.csv"));
  REQUIRE(s.gronwall_pass.has_value());
  CHECK(*s.gronwall_pass);
  CHECK(s.picard.windows == 20);
  CHECK(s.picard.max_iterations >= 2);
  CHECK(fs::exists(out / "snapshots" / "picard_000010.elf1"));
  CHECK(fs::exists(out / "snapshots" / "weak_000020.elf1"));
  const auto p = parse_diagnostics_csv(slurp(out / "picard.csv"));
  const auto w = parse_diagnostics_csv(slurp(out / "weak.csv"));
  REQUIRE(p.size() == w.size());
  for (std::size_t k = 0; k < p.size(); ++k) CHECK(p[k].t == w[k].t);
}

TEST_CASE("run: divergence is reported, not thrown") {
  TempDir dir("run_div");
  const auto cfg = dir.write("div.cfg",
                             "scenario = small_vortex\nn = 8\namplitude = 100\ndt = 0.05\n"
                             "t_end = 0.5\noutput_dir = out\n");
  const RunSummary s = run(cfg);
  CHECK(s.exit_code == kExitDiverged);
  CHECK(s.status == "diverged");
  CHECK(s.message.find("PicardDiverged") != std::string::npos);
  CHECK(fs::exists(dir.path / "out" / "summary.json"));
}

#include "elflow/io.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace elflow {

namespace fs = std::filesystem;

namespace {

[[noreturn]] void config_error(const std::string& what) {
  throw Error(ErrorKind::ConfigError, what);
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& v) {
  double out = 0.0;
  const char* end = v.data() + v.size();
  auto [ptr, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc() || ptr != end || !std::isfinite(out))
    config_error(key + ": '" + v + "' is not a number");
  return out;
}

long to_long(const std::string& key, const std::string& v) {
  long out = 0;
  const char* end = v.data() + v.size();
  auto [ptr, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc() || ptr != end) config_error(key + ": '" + v + "' is not an integer");
  return out;
}

const std::set<std::string>& scenario_keys() {
  static const std::set<std::string> keys = {"dim",   "n",     "length", "boundary", "amplitude",
                                             "epsilon", "mu",  "lambda", "gamma",    "t_end",
                                             "dt",    "snapshot_every"};
  return keys;
}

}  // namespace

std::string format_g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// ---------------------------------------------------------------------------
// Config

RunConfig parse_config(const std::string& text) {
  RunConfig cfg;
  std::set<std::string> seen;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      config_error("line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty())
      config_error("line " + std::to_string(lineno) + ": empty key or value");
    if (!seen.insert(key).second) config_error("duplicate key '" + key + "'");

    if (key == "scenario") {
      cfg.scenario = value;
    } else if (key == "integrator") {
      if (value != "picard" && value != "weak" && value != "both")
        config_error("integrator must be picard, weak or both");
      cfg.integrator = value;
    } else if (key == "output_dir") {
      cfg.output_dir = value;
    } else if (key == "linear_tol") {
      cfg.linear.tol = to_double(key, value);
      if (!(cfg.linear.tol > 0.0)) config_error("linear_tol must be positive");
    } else if (key == "linear_max_iter") {
      cfg.linear.max_iter = to_long(key, value);
      if (cfg.linear.max_iter < 0) config_error("linear_max_iter must be nonnegative");
    } else if (key == "tol_fixed_point") {
      cfg.tol_fixed_point = to_double(key, value);
      if (!(cfg.tol_fixed_point > 0.0)) config_error("tol_fixed_point must be positive");
    } else if (key == "max_picard") {
      cfg.max_picard = static_cast<int>(to_long(key, value));
      if (cfg.max_picard < 1) config_error("max_picard must be at least 1");
    } else if (key == "window") {
      cfg.window = to_double(key, value);
      if (cfg.window < 0.0) config_error("window must be nonnegative");
    } else if (key == "p") {
      cfg.norms.p = to_double(key, value);
      if (!(cfg.norms.p >= 1.0)) config_error("p must be >= 1");
    } else if (key == "q") {
      cfg.norms.q = to_double(key, value);
      if (!(cfg.norms.q >= 1.0)) config_error("q must be >= 1");
    } else if (key == "C_env") {
      cfg.C_env = to_double(key, value);
      if (cfg.C_env < 0.0) config_error("C_env must be nonnegative");
    } else if (key == "envelope_A") {
      cfg.envelope_A = to_double(key, value);
      if (!(cfg.envelope_A > 0.0)) config_error("envelope_A must be positive");
    } else if (key == "cfl_safety") {
      cfg.cfl_safety = to_double(key, value);
      if (!(cfg.cfl_safety > 0.0 && cfg.cfl_safety <= 1.0))
        config_error("cfl_safety must lie in (0, 1]");
    } else if (key == "csv_every") {
      cfg.csv_every = static_cast<int>(to_long(key, value));
      if (cfg.csv_every < 1) config_error("csv_every must be at least 1");
    } else if (scenario_keys().count(key)) {
      cfg.overrides[key] = value;
    } else {
      config_error("unknown key '" + key + "'");
    }
  }
  if (cfg.scenario.empty()) config_error("missing key 'scenario'");
  build_scenario(cfg.scenario, cfg.overrides);  // validates the overrides
  return cfg;
}

RunConfig load_config(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) config_error("cannot read " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  RunConfig cfg = parse_config(os.str());
  if (cfg.output_dir.is_relative()) cfg.output_dir = path.parent_path() / cfg.output_dir;
  return cfg;
}

std::map<std::string, std::string> RunConfig::canonical() const {
  auto out = build_scenario(scenario, overrides).parameters();
  out["integrator"] = integrator;
  out["linear_tol"] = format_g17(linear.tol);
  out["linear_max_iter"] = std::to_string(linear.max_iter);
  out["tol_fixed_point"] = format_g17(tol_fixed_point);
  out["max_picard"] = std::to_string(max_picard);
  out["window"] = format_g17(window);
  out["p"] = format_g17(norms.p);
  out["q"] = format_g17(norms.q);
  out["C_env"] = format_g17(C_env);
  out["envelope_A"] = format_g17(envelope_A);
  out["cfl_safety"] = format_g17(cfl_safety);
  out["csv_every"] = std::to_string(csv_every);
  return out;
}

std::string config_hash(const RunConfig& cfg) {
  std::uint64_t h = 14695981039346656037ull;
  auto feed = [&](const std::string& s) {
    for (unsigned char c : s) {
      h ^= c;
      h *= 1099511628211ull;
    }
  };
  for (const auto& [k, v] : cfg.canonical()) feed(k + "=" + v + "\n");
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

// ---------------------------------------------------------------------------
// Files

void write_file_atomic(const fs::path& path, const std::string& bytes) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw std::runtime_error("short write to " + tmp.string());
  }
  fs::rename(tmp, path);
}

std::string diagnostics_csv(const std::vector<DiagnosticsRecord>& series, int every) {
  std::string out;
  const auto& names = record_field_names();
  for (std::size_t i = 0; i < names.size(); ++i) out += (i ? "," : "") + names[i];
  out += '\n';
  for (std::size_t k = 0; k < series.size(); ++k) {
    if (k % static_cast<std::size_t>(every) != 0 && k + 1 != series.size()) continue;
    const auto values = record_values(series[k]);
    for (std::size_t i = 0; i < values.size(); ++i) {
      if (i) out += ',';
      out += format_g17(values[i]);
    }
    out += '\n';
  }
  return out;
}

std::vector<DiagnosticsRecord> parse_diagnostics_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("diagnostics CSV: empty input");
  std::vector<DiagnosticsRecord> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> values;
    std::istringstream row(line);
    std::string cell;
    while (std::getline(row, cell, ',')) values.push_back(std::strtod(cell.c_str(), nullptr));
    out.push_back(record_from_values(values));
  }
  return out;
}

namespace {

template <typename T>
void put_le(std::string& out, T v) {
  unsigned char b[sizeof(T)];
  std::memcpy(b, &v, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(b, b + sizeof(T));
  out.append(reinterpret_cast<const char*>(b), sizeof(T));
}

template <typename T>
T get_le(const std::string& in, std::size_t& pos) {
  if (pos + sizeof(T) > in.size()) throw std::runtime_error("snapshot: truncated");
  unsigned char b[sizeof(T)];
  std::memcpy(b, in.data() + pos, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(b, b + sizeof(T));
  pos += sizeof(T);
  T v;
  std::memcpy(&v, b, sizeof(T));
  return v;
}

template <typename FieldT>
void put_field(std::string& out, const FieldT& f) {
  for (int c = 0; c < f.components(); ++c)
    for_each_interior(f.grid(), [&](Index idx, int, int, int) { put_le<double>(out, f(c, idx)); });
}

template <typename FieldT>
void get_field(const std::vector<double>& v, std::size_t& pos, FieldT& f) {
  for (int c = 0; c < f.components(); ++c)
    for_each_interior(f.grid(), [&](Index idx, int, int, int) { f(c, idx) = v[pos++]; });
  enforce_boundary(f);
}

}  // namespace

std::string encode_snapshot(const State& s) {
  const Grid& g = s.grid();
  std::string out = "ELF1";
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(g.dim));
  for (int a = 0; a < g.dim; ++a) put_le<std::uint32_t>(out, static_cast<std::uint32_t>(g.n[a]));
  out.push_back(static_cast<char>(g.boundary));
  put_le<double>(out, s.t);
  put_field(out, s.u);
  put_field(out, s.F);
  put_field(out, s.P);
  return out;
}

Snapshot decode_snapshot(const std::string& bytes) {
  if (bytes.size() < 4 || bytes.compare(0, 4, "ELF1") != 0)
    throw std::runtime_error("snapshot: bad magic");
  std::size_t pos = 4;
  Snapshot s;
  s.dim = static_cast<int>(get_le<std::uint32_t>(bytes, pos));
  if (s.dim != 2 && s.dim != 3) throw std::runtime_error("snapshot: bad dimension");
  long cells = 1;
  for (int a = 0; a < s.dim; ++a) {
    s.n[a] = static_cast<int>(get_le<std::uint32_t>(bytes, pos));
    cells *= s.n[a];
  }
  const auto b = get_le<std::uint8_t>(bytes, pos);
  if (b > 1) throw std::runtime_error("snapshot: bad boundary byte");
  s.boundary = static_cast<Boundary>(b);
  s.t = get_le<double>(bytes, pos);
  const long count = cells * (s.dim + s.dim * s.dim + 1);
  if (bytes.size() != pos + static_cast<std::size_t>(count) * 8)
    throw std::runtime_error("snapshot: size does not match header");
  s.values.resize(count);
  for (long i = 0; i < count; ++i) s.values[i] = get_le<double>(bytes, pos);
  return s;
}

State Snapshot::to_state(const std::array<double, 3>& lengths) const {
  const Grid g = make_grid(dim, n, lengths, boundary);
  State s = zero_state(g);
  s.t = t;
  std::size_t pos = 0;
  get_field(values, pos, s.u);
  get_field(values, pos, s.F);
  get_field(values, pos, s.P);
  return s;
}

void write_snapshot(const fs::path& path, const State& s) {
  write_file_atomic(path, encode_snapshot(s));
}

Snapshot read_snapshot(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  return decode_snapshot(os.str());
}

// ---------------------------------------------------------------------------
// Runs

std::string RunSummary::to_json() const {
  nlohmann::ordered_json j;
  j["scenario"] = scenario;
  j["config_hash"] = config_hash;
  j["integrator"] = integrator;
  j["final_time"] = final_time;
  j["cadence"] = cadence;
  j["worst_energy_margin"] = worst_energy_margin;
  j["max_div_residual"] = max_div_residual;
  j["H_end"] = H_end;
  j["integral_G"] = integral_G;
  j["picard"] = {{"windows", picard.windows},
                 {"total_iterations", picard.total_iterations},
                 {"max_iterations", picard.max_iterations},
                 {"mean_ratio", picard.mean_ratio}};
  if (gronwall_pass) {
    j["gronwall"] = {{"pass", *gronwall_pass}, {"max_X", gronwall_max_X}};
    if (gronwall_first_violation) j["gronwall"]["first_violation_t"] = *gronwall_first_violation;
  }
  j["status"] = status;
  j["exit_code"] = exit_code;
  j["message"] = message;
  return j.dump(2) + "\n";
}

int exit_code_for(const std::exception& e) {
  if (const auto* err = dynamic_cast<const Error*>(&e)) {
    switch (err->kind()) {
      case ErrorKind::ConfigError:
      case ErrorKind::InvalidOverride:
      case ErrorKind::UnknownScenario:
        return kExitConfig;
      case ErrorKind::PicardDiverged:
      case ErrorKind::NotConverged:
      case ErrorKind::NotCompatible:
      case ErrorKind::CflViolated:
        return kExitDiverged;
      case ErrorKind::EmptySeries:
      case ErrorKind::MismatchedSeries:
        return kExitVerify;
    }
  }
  return 1;
}

namespace {

// Collects records (and states when asked) and writes snapshots on cadence.
class RunSink : public DiagnosticsSink {
 public:
  RunSink(bool keep_states, int snapshot_every, fs::path dir, std::string prefix)
      : keep_states_(keep_states), every_(snapshot_every), dir_(std::move(dir)),
        prefix_(std::move(prefix)) {}

  void emit(const DiagnosticsRecord& r, const State& s) override {
    if (every_ > 0 && records.size() % static_cast<std::size_t>(every_) == 0) {
      char name[64];
      std::snprintf(name, sizeof name, "%s_%06zu.elf1", prefix_.c_str(), records.size());
      write_snapshot(dir_ / name, s);
    }
    records.push_back(r);
    if (keep_states_) states.push_back(s);
  }

  std::vector<DiagnosticsRecord> records;
  std::vector<State> states;

 private:
  bool keep_states_;
  int every_;
  fs::path dir_;
  std::string prefix_;
};

std::string gronwall_csv(const GronwallReport& rep) {
  std::string out = "t,X,distance,bound,G\n";
  for (std::size_t k = 0; k < rep.times.size(); ++k)
    out += format_g17(rep.times[k]) + "," + format_g17(rep.X[k]) + "," +
           format_g17(rep.distance[k]) + "," + format_g17(rep.bound[k]) + "," +
           format_g17(rep.envelope.G_values[k]) + "\n";
  return out;
}

}  // namespace

RunSummary run(const fs::path& config_path) { return run(load_config(config_path)); }

RunSummary run(const RunConfig& cfg) {
  const Scenario sc = build_scenario(cfg.scenario, cfg.overrides);
  std::error_code ec;
  fs::create_directories(cfg.output_dir, ec);
  if (ec) config_error("cannot create " + cfg.output_dir.string() + ": " + ec.message());
  const fs::path snap_dir = cfg.output_dir / "snapshots";
  if (sc.snapshot_every > 0) fs::create_directories(snap_dir);

  RunSummary sum;
  sum.scenario = sc.name;
  sum.config_hash = config_hash(cfg);
  sum.integrator = cfg.integrator;

  PicardConfig pc = picard_config(sc);
  pc.tol_fixed_point = cfg.tol_fixed_point;
  pc.max_picard = cfg.max_picard;
  pc.window = cfg.window;
  pc.norms = cfg.norms;
  sum.cadence = pc.window_length() * cfg.csv_every;

  const bool both = cfg.integrator == "both";
  const bool use_picard = both || cfg.integrator == "picard";
  const bool use_weak = both || cfg.integrator == "weak";
  RunSink ps(both, sc.snapshot_every, snap_dir, "picard");
  RunSink ws(both, sc.snapshot_every, snap_dir, "weak");

  const State s0 = initial_state(sc, cfg.linear);
  auto fail = [&](const std::exception& e) {
    sum.exit_code = exit_code_for(e);
    sum.status = sum.exit_code == kExitDiverged ? "diverged" : "failed";
    sum.message = e.what();
  };
  try {
    if (use_picard) {
      State end = advance(s0, sc.t_end, pc, cfg.linear, &ps);
      sum.final_time = end.t;
    }
    if (use_weak) {
      WeakConfig wc = weak_config(sc);
      wc.cfl_safety = cfg.cfl_safety;
      wc.norms = cfg.norms;
      State end = weak_advance(s0, sc.t_end, wc, cfg.linear, &ws);
      sum.final_time = end.t;
    }
  } catch (const std::exception& e) {
    fail(e);
  }

  double log_ratio = 0.0;
  long ratio_count = 0;
  for (std::size_t k = 1; k < ps.records.size(); ++k) {
    const auto& r = ps.records[k];
    ++sum.picard.windows;
    sum.picard.total_iterations += r.picard_iters;
    sum.picard.max_iterations = std::max(sum.picard.max_iterations, r.picard_iters);
    if (r.picard_ratio > 0.0) {
      log_ratio += std::log(r.picard_ratio);
      ++ratio_count;
    }
  }
  if (ratio_count) sum.picard.mean_ratio = std::exp(log_ratio / static_cast<double>(ratio_count));

  bool first = true;
  for (const RunSink* s : {&ps, &ws}) {
    if (s->records.empty()) continue;
    const double margin = energy_inequality_check(s->records, 0.0).worst;
    sum.worst_energy_margin = first ? margin : std::min(sum.worst_energy_margin, margin);
    for (const auto& r : s->records) sum.max_div_residual = std::max(sum.max_div_residual, r.div_residual);
    if (first) {
      sum.H_end = s->records.back().H_value;
      sum.integral_G = integrability_check(s->records, cfg.C_env);
      sum.final_time = s->records.back().t;
    }
    first = false;
  }

  if (both && sum.exit_code == kExitOk) {
    GronwallOptions go;
    go.C_env = cfg.C_env;
    go.A = cfg.envelope_A;
    go.dt = sc.dt;
    go.h = sc.grid().min_spacing();
    const auto rep = gronwall_compare(ps.records, ws.records, ps.states, ws.states, go);
    sum.gronwall_pass = rep.pass;
    sum.gronwall_max_X = rep.max_X;
    if (rep.first_violation) sum.gronwall_first_violation = rep.times[*rep.first_violation];
    write_file_atomic(cfg.output_dir / "gronwall.csv", gronwall_csv(rep));
  }
  if (use_picard)
    write_file_atomic(cfg.output_dir / "picard.csv", diagnostics_csv(ps.records, cfg.csv_every));
  if (use_weak)
    write_file_atomic(cfg.output_dir / "weak.csv", diagnostics_csv(ws.records, cfg.csv_every));
  write_file_atomic(cfg.output_dir / "summary.json", sum.to_json());
  return sum;
}

}  // namespace elflow

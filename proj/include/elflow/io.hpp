#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "elflow/scenario.hpp"

namespace elflow {

// ---------------------------------------------------------------------------
// Run configuration: one `key = value` per line, `#` starts a comment.

struct RunConfig {
  std::string scenario;
  std::map<std::string, std::string> overrides;  ///< scenario parameters
  std::string integrator = "picard";            ///< picard | weak | both
  std::filesystem::path output_dir = "out";
  LinearSolveConfig linear{};
  double tol_fixed_point = 1e-10;
  int max_picard = 50;
  double window = 0.0;
  NormExponents norms{};
  double C_env = 1.0;
  double envelope_A = 1e-12;
  double cfl_safety = 0.5;
  int csv_every = 1;

  /// Every setting that affects the numbers, resolved against the scenario
  /// defaults, as canonical strings. The output directory is not included.
  std::map<std::string, std::string> canonical() const;
};

/// Throws Error(ConfigError) on malformed lines, unknown keys or bad values.
RunConfig parse_config(const std::string& text);
/// Relative output directories are taken relative to the config file.
RunConfig load_config(const std::filesystem::path& path);

/// 64-bit FNV-1a over the canonical settings, as 16 hex digits.
std::string config_hash(const RunConfig& cfg);

// ---------------------------------------------------------------------------
// Files

/// Writes to a sibling temporary file, then renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, const std::string& bytes);

std::string format_g17(double v);

/// Header row of field names, then one row per record (every `every`-th
/// record plus the last), 17 significant digits.
std::string diagnostics_csv(const std::vector<DiagnosticsRecord>& series, int every = 1);
std::vector<DiagnosticsRecord> parse_diagnostics_csv(const std::string& text);

/// "ELF1", uint32 dim, uint32 count per axis, uint8 boundary, float64 time,
/// then float64 interior values (x fastest) of the u components, the F
/// entries row-major and P. All little-endian.
std::string encode_snapshot(const State& s);

struct Snapshot {
  int dim = 0;
  std::array<int, 3> n{1, 1, 1};
  Boundary boundary = Boundary::Dirichlet;
  double t = 0.0;
  std::vector<double> values;

  /// Rebuilds the state; box lengths are not stored in the file.
  State to_state(const std::array<double, 3>& lengths) const;
};

Snapshot decode_snapshot(const std::string& bytes);
void write_snapshot(const std::filesystem::path& path, const State& s);
Snapshot read_snapshot(const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Runs

enum ExitCode : int { kExitOk = 0, kExitConfig = 2, kExitDiverged = 3, kExitVerify = 4 };

struct PicardStats {
  long windows = 0;
  long total_iterations = 0;
  int max_iterations = 0;
  double mean_ratio = 0.0;  ///< geometric mean of the per-window last ratios
};

struct RunSummary {
  std::string scenario;
  std::string config_hash;
  std::string integrator;
  double final_time = 0.0;
  double cadence = 0.0;  ///< time between stored records
  double worst_energy_margin = 0.0;
  double max_div_residual = 0.0;
  double H_end = 0.0;
  double integral_G = 0.0;
  PicardStats picard;
  std::optional<bool> gronwall_pass;
  double gronwall_max_X = 0.0;
  std::optional<double> gronwall_first_violation;
  std::string status = "ok";
  int exit_code = kExitOk;
  std::string message;

  std::string to_json() const;
};

/// Loads the config, runs the selected integrators and writes
/// <output_dir>/{picard,weak}.csv, gronwall.csv (both), snapshots/ and
/// summary.json. Configuration problems throw before anything is written;
/// solver failures are recorded in the summary with a nonzero exit code.
RunSummary run(const std::filesystem::path& config_path);
RunSummary run(const RunConfig& cfg);

/// Maps an exception to the process exit code.
int exit_code_for(const std::exception& e);

}  // namespace elflow

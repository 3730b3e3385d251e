#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dweuler/diagnostics.hpp"
#include "dweuler/ic.hpp"
#include "dweuler/kconv.hpp"
#include "dweuler/solver.hpp"

namespace dweuler {

inline constexpr const char* kToolVersion = "0.1.0";

/// Largest ladder index accepted; n = 6 means a 2048^2 grid.
inline constexpr int kMaxLevel = 6;

enum class InitialData { KelvinHelmholtz, Vortex };

/// Everything that determines an experiment. Keys of the flat config format
/// are listed in config_keys().
struct ExperimentConfig {
  InitialData ic = InitialData::KelvinHelmholtz;
  SchemeConfig scheme;
  double gamma = 1.4;
  KHConfig kh;
  VortexConfig vortex{5.0, 1.0 / 16.0, {0.4, 0.45}, {1.0, 0.5}};
  int n_lo = 1;
  int n_hi = 3;
  /// Snapshot every this many steps in addition to the final one; 0 = final only.
  int snapshot_every = 0;
  int workers = 1;
  /// Test functions of the consistency residuals: k1^2 + k2^2 <= max_k^2.
  int consistency_max_k = 3;
  std::filesystem::path out;

  /// n_x = 2^(5 + n) for n = n_lo .. n_hi.
  std::vector<int> resolutions() const;
  void validate() const;

  /// key=value lines in a fixed order. Output location and worker count are
  /// left out since they do not change results.
  std::string canonical() const;
  /// FNV-1a 64 of canonical().
  std::uint64_t hash() const;
  std::string hash_hex() const;
};

using KeyValues = std::map<std::string, std::string>;

const std::vector<std::string>& config_keys();

/// Parses `key = value` lines; '#' starts a comment. Throws UsageError on
/// malformed lines or unknown keys.
KeyValues parse_config_text(const std::string& text, const std::string& origin);
KeyValues read_config_file(const std::filesystem::path& path);

/// Sets one key; throws UsageError on unknown keys or unparsable values.
void apply_setting(ExperimentConfig& cfg, const std::string& key, const std::string& value);

/// Defaults, then `file`, then `overrides`. t_end defaults to 2 for
/// Kelvin-Helmholtz and 0.02 for the vortex when neither source sets it.
ExperimentConfig make_config(const KeyValues& file, const KeyValues& overrides);

std::uint64_t fnv1a64(const std::string& bytes);

/// "# dweuler <version> config_hash=<hex>" followed by a newline.
std::string csv_comment(const std::string& config_hash);

Field initial_state(const ExperimentConfig& cfg, const Grid& grid);

/// One finished resolution of a ladder.
struct LadderRun {
  int n = 0;
  int n_x = 0;
  RunRecord record;
  std::vector<ModeResidual> residuals;
  double wall_seconds = 0.0;
};

/// A run of the ladder failed; `state_dump` names the written last state.
class NumericalFailure : public std::runtime_error {
public:
  NumericalFailure(const std::string& what, std::filesystem::path dump)
      : std::runtime_error(what), state_dump(std::move(dump)) {}
  std::filesystem::path state_dump;
};

/// Runs every resolution, at most cfg.workers at a time, with consistency
/// accumulators attached. Intermediate snapshots are written when
/// cfg.snapshot_every > 0. Results are ordered by resolution.
std::vector<LadderRun> run_ladder(const ExperimentConfig& cfg);

/// File names used inside an output directory.
std::string snapshot_name(int n_x);
std::string stability_name(int n_x);
std::string consistency_name(int n_x);
std::string defect_name(int N);

/// Writes snapshots, per-run CSVs and manifest.json for finished runs.
void write_run_artifacts(const ExperimentConfig& cfg, const std::string& command,
                         const std::vector<LadderRun>& runs);

/// Vortex error against the exact translated solution.
struct ConvergenceRow {
  int n_x = 0;
  double l1_rho = 0.0;
  double l1_momentum = 0.0;
  double l1_energy = 0.0;
  double relative_energy = 0.0;
  /// log2 of the error ratio to the previous row; NaN on the first row.
  double order_rho = 0.0;
};

std::vector<ConvergenceRow> convergence_table(const ExperimentConfig& cfg,
                                              const std::vector<LadderRun>& runs);

/// Residual ratio between consecutive resolutions for one mode and form.
struct ResidualRatio {
  std::string mode;
  std::string form;
  int n_x_coarse = 0;
  int n_x_fine = 0;
  double coarse = 0.0;
  double fine = 0.0;
  double ratio = 0.0;
  /// The coarse residual is at rounding level, so the ratio carries no
  /// information.
  bool at_floor = false;
};

/// Residuals at or below this magnitude are treated as exact zeros.
inline constexpr double kResidualFloor = 1e-12;

std::vector<ResidualRatio> residual_ratios(const std::vector<LadderRun>& runs);

/// Summary of cmd_analyze for one Cesaro level.
struct AnalysisLevel {
  int N = 0;
  TraceReport trace;
  double band_fraction = 0.0;
};

struct AnalysisResult {
  std::vector<RefinementRow> refinement;
  /// Empty when fewer than three resolutions are present.
  std::vector<CesaroCauchyRow> cesaro_cauchy;
  std::vector<AnalysisLevel> levels;
  std::vector<std::filesystem::path> defect_files;
};

/// Loads the manifest and snapshots of `dir` and writes the analysis tables
/// and defect fields. Throws UsageError listing missing files and
/// FormatError for damaged snapshots.
AnalysisResult analyze_directory(const std::filesystem::path& dir);

/// Entry point of the dweuler executable; returns the process exit code.
int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace dweuler

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "pbsim/estimator.hpp"
#include "pbsim/noise.hpp"
#include "pbsim/protocol.hpp"
#include "pbsim/timeseries.hpp"

namespace pbsim {

inline constexpr int kFormatVersion = 1;

// Exit codes of the batch commands.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfigError = 2;
inline constexpr int kExitRuntimeError = 3;
inline constexpr int kExitInsufficientCycles = 4;

// Output file names inside --out directories.
inline constexpr const char* kRecordsFile = "records.csv";
inline constexpr const char* kT1GridFile = "t1_grid.csv";
inline constexpr const char* kEstimatesFile = "estimates.csv";
inline constexpr const char* kSummaryFile = "summary.json";
inline constexpr const char* kHistogramsFile = "histograms.csv";
inline constexpr const char* kSeriesFile = "series.csv";

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Everything one batch run needs: noise scenario, measurement plan, and the
/// analysis knobs. The master seed is mandatory; nothing is ever seeded from
/// the clock.
struct RunConfig {
  ScenarioConfig scenario;
  ExperimentPlan plan;
  WindowConfig window;
  AnalysisOptions analysis;
  std::uint64_t master_seed = 0;
  std::string config_hash;  // FNV-1a 64 of the config bytes, hex
};

/// FNV-1a 64-bit, printed as 16 hex digits.
std::string fnv1a_hex(std::string_view bytes);

/// Parses and validates a config file. Throws ConfigError with a readable
/// message on any schema or invariant violation.
RunConfig load_run_config(const std::filesystem::path& path);

/// Same, from an in-memory JSON string (the hash covers that string).
RunConfig parse_run_config(const std::string& json_text);

/// Flattened window estimate as persisted in estimates.csv.
struct EstimatesRow {
  int window_index = 0;
  double midpoint_h = 0.0;
  std::string point_label;
  double epsilon = 0.0, epsilon_ci_low = 0.0, epsilon_ci_high = 0.0;
  double epsilon_inc = 0.0, inc_ci_low = 0.0, inc_ci_high = 0.0;
  double epsilon_coh = 0.0, coh_ci_low = 0.0, coh_ci_high = 0.0;
  double diamond_lower = 0.0, diamond_upper = 0.0;
  std::string fit_status;  // "ok" or the failure reason
};

EstimatesRow to_estimates_row(const WindowEstimate& estimate);

struct FileMeta {
  std::string config_hash;
  std::uint64_t seed = 0;
};

// --- writers (atomic: temp file + rename) ---------------------------------

void write_records_csv(const std::filesystem::path& path,
                       std::span<const MeasurementRecord> records, const FileMeta& meta);
void write_t1_grid_csv(const std::filesystem::path& path, std::span<const T1Sample> samples,
                       const FileMeta& meta);
void write_estimates_csv(const std::filesystem::path& path, std::span<const EstimatesRow> rows,
                         const FileMeta& meta);
void write_series_csv(const std::filesystem::path& path, std::span<const EstimatesRow> rows,
                      const FileMeta& meta);
void write_histograms_csv(const std::filesystem::path& path,
                          const std::map<std::string, std::map<std::string, Histogram>>& by_point,
                          const FileMeta& meta);
void write_summary_json(const std::filesystem::path& path,
                        const std::map<std::string, std::map<std::string, SummaryStats>>& by_point,
                        const std::map<std::string, std::pair<int, int>>& window_counts,
                        const FileMeta& meta);

// --- readers ---------------------------------------------------------------

struct RecordsParse {
  std::vector<MeasurementRecord> records;
  FileMeta meta;
  std::vector<std::string> malformed;  // "line N: why", capped at 50 samples
  std::size_t malformed_count = 0;
  std::size_t data_rows = 0;
};

/// Rejects unknown format majors; malformed rows are collected, not fatal
/// here (the caller applies its threshold).
RecordsParse read_records_csv(const std::filesystem::path& path);

struct EstimatesParse {
  std::vector<EstimatesRow> rows;
  FileMeta meta;
};

EstimatesParse read_estimates_csv(const std::filesystem::path& path);

struct T1GridParse {
  std::vector<T1Sample> samples;
  FileMeta meta;
};

T1GridParse read_t1_grid_csv(const std::filesystem::path& path);

// --- batch commands ----------------------------------------------------------

/// simulate: run the plan, write records.csv (and t1_grid.csv when the scan
/// is enabled) under out_dir.
int cmd_simulate(const std::filesystem::path& config_path,
                 const std::filesystem::path& out_dir, int workers, std::ostream& diag);

/// analyze: window the records, fit every window, write estimates.csv,
/// summary.json and histograms.csv under out_dir.
int cmd_analyze(const std::filesystem::path& records_path,
                const std::filesystem::path& config_path,
                const std::filesystem::path& out_dir, int workers, std::ostream& diag);

/// report: plot-ready series.csv and histograms.csv from an estimates file,
/// plus a canonical t1_grid.csv when one is supplied.
int cmd_report(const std::filesystem::path& estimates_path,
               const std::optional<std::filesystem::path>& t1_grid_path,
               const std::filesystem::path& out_dir, std::ostream& diag);

}  // namespace pbsim

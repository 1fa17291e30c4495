#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pbsim/estimator.hpp"
#include "pbsim/protocol.hpp"

namespace pbsim {

/// Moving-window segmentation: n cycles per window, consecutive windows
/// shifted by n * (1 - overlap) cycles (rounded, at least 1).
struct WindowConfig {
  int n = 30;
  double overlap_fraction = 0.5;
};

struct CycleRange {
  int start = 0;  // inclusive
  int end = 0;    // exclusive
};

/// Windows [i*step, i*step + n) for all i with i*step + n <= cycle_count.
/// Empty when fewer than n cycles exist.
std::vector<CycleRange> make_windows(int cycle_count, const WindowConfig& config);

struct WindowEstimate {
  int window_index = 0;
  double midpoint_h = 0.0;
  std::string point_label;
  ErrorBudget budget;  // budget.ok == false marks a failed window (kept as a gap)
};

/// Per-operating-point window series. Every window is fitted independently by
/// the estimator pipeline; failures become markers, never aborts. `seed`
/// derives one bootstrap stream per (window, point), so results do not depend
/// on `workers`.
std::map<std::string, std::vector<WindowEstimate>> window_series(
    std::span<const MeasurementRecord> records, const WindowConfig& config,
    const AnalysisOptions& options, std::uint64_t seed, int workers = 1);

struct SummaryStats {
  double mean = 0.0;
  double sd = 0.0;      // sample SD (ddof 1)
  double median = 0.0;
  double iqr = 0.0;     // 75th minus 25th percentile, linear interpolation
  double cv_percent = 0.0;
  bool cv_defined = true;  // false when the mean is zero
};

/// Standard summary of a series; requires at least two values.
std::optional<SummaryStats> summarize(std::span<const double> values);

struct HistogramBin {
  double left = 0.0;
  double right = 0.0;
  int count = 0;
};

struct Histogram {
  std::vector<HistogramBin> bins;
  double normal_mu = 0.0;     // sample mean
  double normal_sigma = 0.0;  // sample SD
  bool degenerate = false;    // zero-range input collapses to a single bin
};

/// Equal-width bins spanning [min, max] (the top edge is inclusive), plus a
/// moment-fitted normal. Requires at least two values.
std::optional<Histogram> histogram_fit(std::span<const double> values, int bins = 15);

}  // namespace pbsim

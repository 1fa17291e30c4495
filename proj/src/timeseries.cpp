#include "pbsim/timeseries.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <thread>

namespace pbsim {

namespace {

double interpolated_quantile(const std::vector<double>& sorted, double q) {
  const double pos = q * (sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(pos);
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - lo;
  return sorted[lo] * (1.0 - frac) + sorted[hi] * frac;
}

constexpr std::uint64_t kWindowSeedDomain = 3;

}  // namespace

std::vector<CycleRange> make_windows(int cycle_count, const WindowConfig& config) {
  if (config.n < 2) throw std::invalid_argument("window size must be >= 2");
  if (config.overlap_fraction < 0.0 || config.overlap_fraction >= 1.0) {
    throw std::invalid_argument("overlap fraction must be in [0, 1)");
  }
  const int step = std::max(1, static_cast<int>(std::lround(config.n * (1.0 - config.overlap_fraction))));
  std::vector<CycleRange> out;
  for (int start = 0; start + config.n <= cycle_count; start += step) {
    out.push_back({start, start + config.n});
  }
  return out;
}

std::map<std::string, std::vector<WindowEstimate>> window_series(
    std::span<const MeasurementRecord> records, const WindowConfig& config,
    const AnalysisOptions& options, std::uint64_t seed, int workers) {
  int cycle_count = 0;
  for (const auto& rec : records) cycle_count = std::max(cycle_count, rec.cycle + 1);
  const auto windows = make_windows(cycle_count, config);

  // Bucket records per cycle once; windows then slice cheaply.
  std::vector<std::vector<const MeasurementRecord*>> by_cycle(cycle_count);
  for (const auto& rec : records) by_cycle[rec.cycle].push_back(&rec);

  const RngStream window_root = RngStream(seed).child(kWindowSeedDomain);

  struct Task {
    int window_index;
    CycleRange range;
  };
  std::vector<Task> tasks;
  tasks.reserve(windows.size());
  for (std::size_t w = 0; w < windows.size(); ++w) {
    tasks.push_back({static_cast<int>(w), windows[w]});
  }

  std::vector<std::vector<WindowEstimate>> results(tasks.size());
  const auto run_task = [&](std::size_t ti) {
    const Task& task = tasks[ti];
    std::vector<MeasurementRecord> slice;
    double t_first = 0.0, t_last = 0.0;
    bool any = false;
    for (int c = task.range.start; c < task.range.end; ++c) {
      for (const auto* rec : by_cycle[c]) {
        slice.push_back(*rec);
        if (!any) t_first = rec->wall_time_h;
        t_last = rec->wall_time_h;
        any = true;
      }
    }
    const RngStream win_rng = window_root.child(task.window_index);
    int point_index = 0;
    for (const auto& point : group_records(slice)) {
      WindowEstimate est;
      est.window_index = task.window_index;
      est.midpoint_h = 0.5 * (t_first + t_last);
      est.point_label = point.point_label;
      est.budget = estimate_budget(point, options, win_rng.child(point_index++));
      results[ti].push_back(std::move(est));
    }
  };

  const int thread_count = std::max(1, std::min<int>(workers, static_cast<int>(tasks.size())));
  if (thread_count == 1) {
    for (std::size_t ti = 0; ti < tasks.size(); ++ti) run_task(ti);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(thread_count);
    for (int t = 0; t < thread_count; ++t) {
      pool.emplace_back([&, t] {
        for (std::size_t ti = t; ti < tasks.size(); ti += thread_count) run_task(ti);
      });
    }
    for (auto& th : pool) th.join();
  }

  std::map<std::string, std::vector<WindowEstimate>> series;
  for (auto& window_result : results) {
    for (auto& est : window_result) series[est.point_label].push_back(std::move(est));
  }
  return series;
}

std::optional<SummaryStats> summarize(std::span<const double> values) {
  if (values.size() < 2) return std::nullopt;
  const auto n = static_cast<double>(values.size());
  double sum = 0.0;
  for (const double v : values) sum += v;
  const double mean = sum / n;
  double ss = 0.0;
  for (const double v : values) ss += (v - mean) * (v - mean);

  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());

  SummaryStats stats;
  stats.mean = mean;
  stats.sd = std::sqrt(ss / (n - 1.0));
  stats.median = interpolated_quantile(sorted, 0.5);
  stats.iqr = interpolated_quantile(sorted, 0.75) - interpolated_quantile(sorted, 0.25);
  if (mean == 0.0) {
    stats.cv_defined = false;
  } else {
    stats.cv_percent = 100.0 * stats.sd / mean;
  }
  return stats;
}

std::optional<Histogram> histogram_fit(std::span<const double> values, int bins) {
  if (values.size() < 2 || bins < 1) return std::nullopt;
  const auto [min_it, max_it] = std::minmax_element(values.begin(), values.end());
  const double lo = *min_it;
  const double hi = *max_it;

  Histogram hist;
  const auto stats = summarize(values);
  hist.normal_mu = stats->mean;
  hist.normal_sigma = stats->sd;

  if (hi <= lo) {
    hist.degenerate = true;
    hist.bins.push_back({lo, hi, static_cast<int>(values.size())});
    return hist;
  }

  hist.bins.resize(bins);
  const double width = (hi - lo) / bins;
  for (int b = 0; b < bins; ++b) {
    hist.bins[b].left = lo + b * width;
    hist.bins[b].right = lo + (b + 1) * width;
  }
  hist.bins.back().right = hi;
  for (const double v : values) {
    auto idx = static_cast<int>((v - lo) / width);
    idx = std::clamp(idx, 0, bins - 1);
    ++hist.bins[idx].count;
  }
  return hist;
}

}  // namespace pbsim

#include "pbsim/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>

namespace pbsim {

namespace {

constexpr int kMinBootstrapSequences = 10;

double component(int ones, int shots) { return 2.0 * ones / shots - 1.0; }

/// Unbiased estimate of the binomial variance of <s> = 2 p_hat - 1.
double shot_variance(double p_hat, int shots) {
  if (shots < 2) return 0.0;
  return 4.0 * p_hat * (1.0 - p_hat) / (shots - 1);
}

struct SeriesPoint {
  double m = 0.0;
  double mean = 0.0;
  double var_of_mean = 0.0;
  int n = 0;
};

// Mean and variance-of-mean of per-sequence values at each length.
std::vector<SeriesPoint> collect_series(
    const PointData& data,
    const std::function<std::optional<double>(const SequenceMeasurement&)>& per_sequence) {
  std::vector<SeriesPoint> out;
  out.reserve(data.lengths.size());
  for (const auto& group : data.lengths) {
    double sum = 0.0, sumsq = 0.0;
    int n = 0;
    for (const auto& seq : group.sequences) {
      if (const auto v = per_sequence(seq)) {
        sum += *v;
        sumsq += *v * *v;
        ++n;
      }
    }
    if (n == 0) continue;
    SeriesPoint pt;
    pt.m = group.m;
    pt.mean = sum / n;
    pt.n = n;
    if (n >= 2) {
      const double var = std::max(0.0, (sumsq - sum * sum / n) / (n - 1));
      pt.var_of_mean = var / n;
    }
    out.push_back(pt);
  }
  return out;
}

// Inverse-variance weights from the per-length scatter; falls back to
// unweighted when any length is too thin to estimate its variance.
std::vector<FitPoint> to_fit_points(const std::vector<SeriesPoint>& series, int min_n_for_weights) {
  bool weighted = !series.empty();
  for (const auto& pt : series) {
    if (pt.n < min_n_for_weights || pt.var_of_mean <= 0.0) weighted = false;
  }
  std::vector<FitPoint> out;
  out.reserve(series.size());
  for (const auto& pt : series) {
    out.push_back({pt.m, pt.mean, weighted ? 1.0 / pt.var_of_mean : 1.0});
  }
  return out;
}

std::optional<double> survival_z(const SequenceMeasurement& seq) {
  const int z = static_cast<int>(Variant::kZ);
  if (!seq.present[z]) return std::nullopt;
  return static_cast<double>(seq.ones[z]) / seq.shots[z];
}

struct PipelineFits {
  DecayFit p_fit;
  DecayFit u_fit;
};

PipelineFits run_fits(const PointData& data, const AnalysisOptions& opt) {
  const bool offset_free = opt.variant == PipelineVariant::kOffsetEliminated;

  const auto survival_stat = [&](const SequenceMeasurement& seq) -> std::optional<double> {
    return offset_free ? a_hat(seq) : survival_z(seq);
  };
  const auto purity_stat = [&](const SequenceMeasurement& seq) -> std::optional<double> {
    const auto triple = expectations_from_records(seq);
    if (!triple) return std::nullopt;
    return purity_point(*triple, opt.bias_correction);
  };

  const auto survival_series = collect_series(data, survival_stat);
  const auto purity_series = collect_series(data, purity_stat);

  PipelineFits fits;
  fits.p_fit = fit_decay(to_fit_points(survival_series, opt.min_sequences_for_weights),
                         offset_free ? DecayModel::kFixedHalfOffset : DecayModel::kWithOffset);
  fits.u_fit = fit_decay(to_fit_points(purity_series, opt.min_sequences_for_weights),
                         offset_free ? DecayModel::kZeroOffset : DecayModel::kWithOffset);
  return fits;
}

int min_sequences_per_length(const PointData& data) {
  int n_min = std::numeric_limits<int>::max();
  for (const auto& group : data.lengths) {
    n_min = std::min(n_min, static_cast<int>(group.sequences.size()));
  }
  return data.lengths.empty() ? 0 : n_min;
}

PointData resample(const PointData& data, RngStream& rng) {
  PointData out;
  out.point_label = data.point_label;
  out.lengths.reserve(data.lengths.size());
  for (const auto& group : data.lengths) {
    LengthGroup g;
    g.m = group.m;
    const auto n = group.sequences.size();
    g.sequences.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
      g.sequences.push_back(group.sequences[rng.uniform_int(n)]);
    }
    out.lengths.push_back(std::move(g));
  }
  return out;
}

// Central 68% interval by linearly interpolated percentiles.
Interval percentile_interval(std::vector<double> values) {
  Interval ci;
  if (values.empty()) return ci;
  std::sort(values.begin(), values.end());
  const auto quantile = [&](double q) {
    const double pos = q * (values.size() - 1);
    const auto lo = static_cast<std::size_t>(pos);
    const std::size_t hi = std::min(lo + 1, values.size() - 1);
    const double frac = pos - lo;
    return values[lo] * (1.0 - frac) + values[hi] * frac;
  };
  ci.lo = quantile(0.16);
  ci.hi = quantile(0.84);
  return ci;
}

Interval widen_if_thin(Interval ci, int n_min) {
  if (n_min >= kMinBootstrapSequences || n_min <= 0) return ci;
  const double factor = std::sqrt(static_cast<double>(kMinBootstrapSequences) / n_min);
  const double mid = 0.5 * (ci.lo + ci.hi);
  const double half = 0.5 * (ci.hi - ci.lo) * factor;
  return {mid - half, mid + half, true};
}

}  // namespace

std::vector<PointData> group_records(std::span<const MeasurementRecord> records) {
  // point -> m -> sequence_id -> measurement, all ordered for determinism.
  std::map<std::string, std::map<int, std::map<std::int64_t, SequenceMeasurement>>> grouped;
  std::map<std::string, int> rejected;
  for (const auto& rec : records) {
    auto& seq = grouped[rec.point_label][rec.m][rec.sequence_id];
    seq.sequence_id = rec.sequence_id;
    const int v = static_cast<int>(rec.variant);
    if (seq.present[v]) ++rejected[rec.point_label];
    seq.present[v] = true;
    seq.shots[v] = rec.shots;
    seq.ones[v] = rec.ones;
  }
  std::vector<PointData> out;
  out.reserve(grouped.size());
  for (auto& [label, by_m] : grouped) {
    PointData data;
    data.point_label = label;
    data.rejected_records = rejected.count(label) ? rejected[label] : 0;
    for (auto& [m, by_id] : by_m) {
      LengthGroup group;
      group.m = m;
      group.sequences.reserve(by_id.size());
      for (auto& [id, seq] : by_id) group.sequences.push_back(seq);
      data.lengths.push_back(std::move(group));
    }
    out.push_back(std::move(data));
  }
  return out;
}

std::optional<ExpectationTriple> expectations_from_records(const SequenceMeasurement& seq,
                                                           std::string* diagnostic) {
  std::string missing;
  for (const Variant v : {Variant::kZ, Variant::kX, Variant::kY}) {
    if (!seq.present[static_cast<int>(v)]) {
      missing += missing.empty() ? variant_name(v) : std::string(",") + variant_name(v);
    }
  }
  if (!missing.empty()) {
    if (diagnostic) {
      *diagnostic = "sequence " + std::to_string(seq.sequence_id) + ": missing variant(s) " +
                    missing;
    }
    return std::nullopt;
  }
  ExpectationTriple t;
  const int z = static_cast<int>(Variant::kZ);
  const int x = static_cast<int>(Variant::kX);
  const int y = static_cast<int>(Variant::kY);
  t.sz = component(seq.ones[z], seq.shots[z]);
  t.sx = component(seq.ones[x], seq.shots[x]);
  t.sy = component(seq.ones[y], seq.shots[y]);
  t.shots_z = seq.shots[z];
  t.shots_x = seq.shots[x];
  t.shots_y = seq.shots[y];
  return t;
}

double purity_point(const ExpectationTriple& triple, bool bias_correct) {
  double value = triple.sx * triple.sx + triple.sy * triple.sy + triple.sz * triple.sz;
  if (bias_correct) {
    value -= shot_variance(0.5 * (triple.sx + 1.0), triple.shots_x);
    value -= shot_variance(0.5 * (triple.sy + 1.0), triple.shots_y);
    value -= shot_variance(0.5 * (triple.sz + 1.0), triple.shots_z);
  }
  return value;
}

std::optional<double> a_hat(const SequenceMeasurement& seq) {
  const int z = static_cast<int>(Variant::kZ);
  const int f = static_cast<int>(Variant::kZFlip);
  if (!seq.present[z] || !seq.present[f]) return std::nullopt;
  const double p_zz = static_cast<double>(seq.ones[z]) / seq.shots[z];
  const double p_zflip = static_cast<double>(seq.ones[f]) / seq.shots[f];
  return 0.5 * (p_zz - p_zflip) + 0.5;
}

std::optional<double> bloch_scatter(const LengthGroup& group, bool bias_correct) {
  std::vector<ExpectationTriple> triples;
  triples.reserve(group.sequences.size());
  for (const auto& seq : group.sequences) {
    if (const auto t = expectations_from_records(seq)) triples.push_back(*t);
  }
  const auto n = static_cast<int>(triples.size());
  if (n < 2) return std::nullopt;

  double total = 0.0;
  double shot_floor = 0.0;
  for (int k = 0; k < 3; ++k) {
    double sum = 0.0, sumsq = 0.0;
    for (const auto& t : triples) {
      const double v = k == 0 ? t.sx : k == 1 ? t.sy : t.sz;
      sum += v;
      sumsq += v * v;
    }
    total += std::max(0.0, (sumsq - sum * sum / n) / (n - 1));
    if (bias_correct) {
      for (const auto& t : triples) {
        const int shots = k == 0 ? t.shots_x : k == 1 ? t.shots_y : t.shots_z;
        const double v = k == 0 ? t.sx : k == 1 ? t.sy : t.sz;
        shot_floor += shot_variance(0.5 * (v + 1.0), shots) / n;
      }
    }
  }
  return total - shot_floor;
}

ErrorBudget budget_from_fits(const DecayFit& p_fit, const DecayFit& u_fit) {
  ErrorBudget budget;
  if (!p_fit.ok) {
    budget.status = "survival fit failed: " + p_fit.error;
    return budget;
  }
  if (!u_fit.ok) {
    budget.status = "purity fit failed: " + u_fit.error;
    return budget;
  }
  const double p = p_fit.rate;
  const double u = u_fit.rate;
  budget.survival_rate = p;
  budget.unitarity = u;
  budget.epsilon = 0.5 * (1.0 - p);
  budget.epsilon_inc = 0.5 * (1.0 - std::sqrt(u));
  budget.epsilon_coh = budget.epsilon - budget.epsilon_inc;

  const double eps_se = 0.5 * p_fit.rate_se;
  const double inc_se = u > 0.0 ? u_fit.rate_se / (4.0 * std::sqrt(u)) : 0.0;
  const double coh_se = std::sqrt(eps_se * eps_se + inc_se * inc_se);
  budget.epsilon_ci_delta = {budget.epsilon - eps_se, budget.epsilon + eps_se};
  budget.inc_ci_delta = {budget.epsilon_inc - inc_se, budget.epsilon_inc + inc_se};
  budget.coh_ci_delta = {budget.epsilon_coh - coh_se, budget.epsilon_coh + coh_se};

  if (budget.epsilon_coh < -3.0 * coh_se) budget.inconsistent = true;

  if (budget.epsilon >= 0.0) {
    const auto [lo, hi] = diamond_bounds(budget.epsilon);
    budget.diamond_lower = lo;
    budget.diamond_upper = hi;
  }
  budget.ok = true;
  budget.status = "ok";
  return budget;
}

std::pair<double, double> diamond_bounds(double epsilon, int dimension) {
  if (epsilon < 0.0 || epsilon > 1.0) {
    throw std::invalid_argument("diamond_bounds: epsilon outside [0, 1]");
  }
  const double d = dimension;
  return {(d + 1.0) / d * epsilon, std::sqrt(d * (d + 1.0) * epsilon)};
}

ErrorBudget estimate_budget(const PointData& data, const AnalysisOptions& options,
                            RngStream rng) {
  const PipelineFits fits = run_fits(data, options);
  ErrorBudget budget = budget_from_fits(fits.p_fit, fits.u_fit);
  if (!budget.ok) return budget;

  const int n_min = min_sequences_per_length(data);
  std::vector<double> eps, inc, coh;
  eps.reserve(options.bootstrap_resamples);
  inc.reserve(options.bootstrap_resamples);
  coh.reserve(options.bootstrap_resamples);
  for (int r = 0; r < options.bootstrap_resamples; ++r) {
    RngStream resample_rng = rng.child(r);
    const PointData boot = resample(data, resample_rng);
    const PipelineFits boot_fits = run_fits(boot, options);
    const ErrorBudget b = budget_from_fits(boot_fits.p_fit, boot_fits.u_fit);
    if (!b.ok) continue;
    eps.push_back(b.epsilon);
    inc.push_back(b.epsilon_inc);
    coh.push_back(b.epsilon_coh);
  }
  if (eps.empty()) {
    budget.status = "bootstrap produced no usable resamples";
    budget.ok = false;
    return budget;
  }
  budget.epsilon_ci = widen_if_thin(percentile_interval(eps), n_min);
  budget.inc_ci = widen_if_thin(percentile_interval(inc), n_min);
  budget.coh_ci = widen_if_thin(percentile_interval(coh), n_min);
  const auto dropped = options.bootstrap_resamples - static_cast<int>(eps.size());
  if (dropped > options.bootstrap_resamples / 5) {
    budget.epsilon_ci.low_confidence = true;
    budget.inc_ci.low_confidence = true;
    budget.coh_ci.low_confidence = true;
  }
  return budget;
}

Interval bootstrap_ci(const PointData& data,
                      const std::function<std::optional<double>(const PointData&)>& statistic,
                      int resamples, RngStream rng) {
  std::vector<double> values;
  values.reserve(resamples);
  for (int r = 0; r < resamples; ++r) {
    RngStream resample_rng = rng.child(r);
    const PointData boot = resample(data, resample_rng);
    if (const auto v = statistic(boot)) values.push_back(*v);
  }
  return widen_if_thin(percentile_interval(values), min_sequences_per_length(data));
}

}  // namespace pbsim

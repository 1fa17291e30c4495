#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pbsim/fitting.hpp"
#include "pbsim/protocol.hpp"
#include "pbsim/rng.hpp"

namespace pbsim {

/// Per-sequence Bloch component estimates from the three measurement bases.
struct ExpectationTriple {
  double sx = 0.0;
  double sy = 0.0;
  double sz = 0.0;
  int shots_x = 0;
  int shots_y = 0;
  int shots_z = 0;
};

/// All variants of one random gate list, keyed by sequence_id.
struct SequenceMeasurement {
  std::int64_t sequence_id = 0;
  std::array<int, 4> shots{};
  std::array<int, 4> ones{};
  std::array<bool, 4> present{};
};

struct LengthGroup {
  int m = 0;
  std::vector<SequenceMeasurement> sequences;
};

/// One operating point's records, grouped by length and sequence.
struct PointData {
  std::string point_label;
  std::vector<LengthGroup> lengths;  // ascending m
  int rejected_records = 0;
};

/// Groups a record span by (point, length, sequence_id). Duplicate variants
/// for one sequence_id count as rejected records (last one wins).
std::vector<PointData> group_records(std::span<const MeasurementRecord> records);

/// <s_k> = 2 * ones/shots - 1 per basis variant. Missing variants reject the
/// sequence; the diagnostic names what was absent.
std::optional<ExpectationTriple> expectations_from_records(const SequenceMeasurement& seq,
                                                           std::string* diagnostic = nullptr);

/// Per-sequence purity metric sum_k <s_k>^2. With bias_correct the binomial
/// sampling variance 4 p(1-p)/(shots-1) of each component is subtracted
/// (unbiased sample form), making the squared-expectation estimator unbiased.
double purity_point(const ExpectationTriple& triple, bool bias_correct);

/// Offset-eliminating survival pair: (P_zz - P_zflip)/2 + 1/2. Needs both the
/// z and z_flip variants.
std::optional<double> a_hat(const SequenceMeasurement& seq);

/// Sum over k of the sample variance (ddof 1) of <s_k> across the sequences
/// of one length; with bias_correct the mean estimated shot variance of each
/// component is subtracted. Needs >= 2 usable sequences.
///
/// Diagnostic statistic: the sequence-to-sequence scatter carries a u^m
/// signal only when unitarity exceeds the squared survival rate (coherent
/// noise); for incoherent channels it collapses to the shot-noise floor. The
/// pipeline's unitarity estimate therefore uses the purity second moment
/// (mean bias-corrected purity_point), not this statistic.
std::optional<double> bloch_scatter(const LengthGroup& group, bool bias_correct);

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  bool low_confidence = false;
};

/// Per-window error budget. epsilon = epsilon_inc + epsilon_coh holds exactly
/// by construction. Bootstrap intervals are the authoritative uncertainty;
/// delta-method intervals are the fast companion.
struct ErrorBudget {
  bool ok = false;
  std::string status;  // "ok" or the failure reason

  double epsilon = 0.0;
  double epsilon_inc = 0.0;
  double epsilon_coh = 0.0;
  double survival_rate = 0.0;  // fitted p
  double unitarity = 0.0;      // fitted u

  Interval epsilon_ci, inc_ci, coh_ci;                    // bootstrap
  Interval epsilon_ci_delta, inc_ci_delta, coh_ci_delta;  // first-order

  double diamond_lower = 0.0;
  double diamond_upper = 0.0;

  /// Set when the split is statistically self-contradictory (epsilon_coh
  /// below -3 combined sigma). Values are reported as-is, never clipped.
  bool inconsistent = false;
};

/// eps = (1-p)/2 and eps_inc = (1-sqrt(u))/2 from successful fits; the
/// coherent part is the remainder. Delta-method intervals only (bootstrap is
/// attached by the window pipeline).
ErrorBudget budget_from_fits(const DecayFit& p_fit, const DecayFit& u_fit);

/// Wallman-Flammia bracket on half the diamond-norm distance:
/// [(D+1)/D * eps, sqrt(D (D+1) eps)].
std::pair<double, double> diamond_bounds(double epsilon, int dimension = 2);

enum class PipelineVariant { kOffsetEliminated, kWithOffset };

struct AnalysisOptions {
  PipelineVariant variant = PipelineVariant::kOffsetEliminated;
  bool bias_correction = true;
  int bootstrap_resamples = 1000;
  int min_sequences_for_weights = 5;
};

/// Full per-window pipeline: per-length survival and purity statistics,
/// weighted decay fits, error budget, bootstrap confidence intervals.
/// `rng` seeds the bootstrap resampling.
ErrorBudget estimate_budget(const PointData& data, const AnalysisOptions& options,
                            RngStream rng);

/// Percentile bootstrap of an arbitrary statistic over the window's
/// sequences. Whole sequence_ids are resampled with replacement
/// (independently per length), preserving variant pairing. Resamples where
/// the statistic is unavailable are dropped. With fewer than 10 sequences at
/// some length the interval is widened by sqrt(10/n) and flagged.
Interval bootstrap_ci(const PointData& data,
                      const std::function<std::optional<double>(const PointData&)>& statistic,
                      int resamples, RngStream rng);

}  // namespace pbsim

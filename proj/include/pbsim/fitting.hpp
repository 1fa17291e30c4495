#pragma once

#include <span>
#include <string>
#include <vector>

namespace pbsim {

/// Decay models used throughout the analysis:
///  kWithOffset     v(m) = A r^m + B
///  kFixedHalfOffset v(m) = A r^m + 1/2   (offset pinned by paired targets)
///  kZeroOffset     v(m) = A r^m          (offset removed by construction)
enum class DecayModel { kWithOffset, kFixedHalfOffset, kZeroOffset };

const char* decay_model_name(DecayModel model);

struct FitPoint {
  double m = 0.0;      // sequence length (need not be integral)
  double value = 0.0;  // observed mean at this length
  double weight = 1.0; // inverse variance of `value`; all-ones means unweighted
};

struct DecayFit {
  DecayModel model = DecayModel::kWithOffset;
  bool ok = false;
  std::string error;

  double amplitude = 0.0;
  double rate = 0.0;    // p or u
  double offset = 0.0;  // 0.5 / 0 for the offset-eliminated models

  double amplitude_se = 0.0;
  double rate_se = 0.0;
  double offset_se = 0.0;

  double residual_sum = 0.0;  // weighted SSE at the solution
  int iterations = 0;
};

struct FitOptions {
  int max_iterations = 200;
  double relative_tolerance = 1e-10;
  /// A fitted rate above 1 is kept while it is statistically consistent with
  /// 1: the acceptance band is 1 + max(rate_cap_abs, rate_cap_sigmas * SE).
  /// Beyond that the fit is reported as failed, never clamped.
  double rate_cap_abs = 1e-6;
  double rate_cap_sigmas = 3.0;
};

/// Weighted least squares for the chosen model: log-domain linear initializer
/// followed by damped Gauss-Newton. Parameter covariance comes from the final
/// Jacobian; with unit weights it is scaled by the reduced chi-square, with
/// inverse-variance weights it is used as-is.
///
/// Failure (too few lengths, all-equal values, non-convergence, rate outside
/// the acceptance band) is reported through `ok`/`error`.
DecayFit fit_decay(std::span<const FitPoint> points, DecayModel model,
                   const FitOptions& options = {});

}  // namespace pbsim

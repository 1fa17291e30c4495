#include "pbsim/fitting.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

namespace pbsim {

namespace {

constexpr double kRateFloor = 1e-12;
constexpr double kRateCeil = 1.5;  // search bound, far above any accepted rate

int parameter_count(DecayModel model) { return model == DecayModel::kWithOffset ? 3 : 2; }

double fixed_offset(DecayModel model) {
  return model == DecayModel::kFixedHalfOffset ? 0.5 : 0.0;
}

struct Params {
  double a = 0.0;
  double r = 0.0;
  double b = 0.0;
};

double model_value(const Params& p, double m) { return p.a * std::pow(p.r, m) + p.b; }

double weighted_sse(std::span<const FitPoint> pts, const Params& p) {
  double sse = 0.0;
  for (const auto& pt : pts) {
    const double res = model_value(p, pt.m) - pt.value;
    sse += pt.weight * res * res;
  }
  return sse;
}

// Weighted linear regression of ln(value - offset) on m. Requires at least
// two points above the offset.
bool log_linear_init(std::span<const FitPoint> pts, double offset, Params* out) {
  double sw = 0, swx = 0, swy = 0, swxx = 0, swxy = 0;
  int used = 0;
  for (const auto& pt : pts) {
    const double shifted = pt.value - offset;
    if (shifted <= 0.0) continue;
    const double y = std::log(shifted);
    const double w = pt.weight * shifted * shifted;  // delta-method weight transfer
    sw += w;
    swx += w * pt.m;
    swy += w * y;
    swxx += w * pt.m * pt.m;
    swxy += w * pt.m * y;
    ++used;
  }
  if (used < 2) return false;
  const double denom = sw * swxx - swx * swx;
  if (std::abs(denom) < 1e-300) return false;
  const double slope = (sw * swxy - swx * swy) / denom;
  const double intercept = (swy * swxx - swx * swxy) / denom;
  out->a = std::exp(intercept);
  out->r = std::clamp(std::exp(slope), kRateFloor, kRateCeil);
  out->b = offset;
  return true;
}

struct GaussNewtonResult {
  Params params;
  bool converged = false;
  int iterations = 0;
  double sse = std::numeric_limits<double>::infinity();
};

GaussNewtonResult gauss_newton(std::span<const FitPoint> pts, DecayModel model, Params start,
                               const FitOptions& opt) {
  const int k = parameter_count(model);
  GaussNewtonResult result;
  Params cur = start;
  double sse = weighted_sse(pts, cur);
  double lambda = 1e-8;

  int iter = 0;
  for (; iter < opt.max_iterations; ++iter) {
    Eigen::MatrixXd jtj = Eigen::MatrixXd::Zero(k, k);
    Eigen::VectorXd jtr = Eigen::VectorXd::Zero(k);
    for (const auto& pt : pts) {
      const double rm1 = std::pow(cur.r, pt.m - 1.0);
      const double rm = rm1 * cur.r;
      Eigen::VectorXd grad(k);
      grad(0) = rm;
      grad(1) = cur.a * pt.m * rm1;
      if (k == 3) grad(2) = 1.0;
      const double res = cur.a * rm + cur.b - pt.value;
      jtj += pt.weight * grad * grad.transpose();
      jtr += pt.weight * grad * res;
    }

    bool stepped = false;
    Eigen::VectorXd delta;
    for (int attempt = 0; attempt < 12; ++attempt) {
      Eigen::MatrixXd damped = jtj;
      for (int i = 0; i < k; ++i) damped(i, i) *= 1.0 + lambda;
      delta = damped.ldlt().solve(-jtr);
      if (!delta.allFinite()) {
        lambda *= 10.0;
        continue;
      }
      Params trial = cur;
      trial.a += delta(0);
      trial.r += delta(1);
      if (k == 3) trial.b += delta(2);
      if (trial.r <= kRateFloor || trial.r > kRateCeil) {
        lambda *= 10.0;
        continue;
      }
      const double trial_sse = weighted_sse(pts, trial);
      if (trial_sse <= sse * (1.0 + 1e-14) || trial_sse < sse + 1e-300) {
        cur = trial;
        sse = trial_sse;
        lambda = std::max(lambda / 3.0, 1e-12);
        stepped = true;
        break;
      }
      lambda *= 10.0;
    }
    if (!stepped) break;

    double rel = 0.0;
    rel = std::max(rel, std::abs(delta(0)) / std::max(std::abs(cur.a), 1e-12));
    rel = std::max(rel, std::abs(delta(1)) / std::max(std::abs(cur.r), 1e-12));
    if (k == 3) rel = std::max(rel, std::abs(delta(2)) / std::max(std::abs(cur.b), 1e-12));
    if (rel <= opt.relative_tolerance) {
      result.converged = true;
      ++iter;
      break;
    }
  }

  result.params = cur;
  result.iterations = iter;
  result.sse = sse;
  return result;
}

}  // namespace

const char* decay_model_name(DecayModel model) {
  switch (model) {
    case DecayModel::kWithOffset: return "with_offset";
    case DecayModel::kFixedHalfOffset: return "fixed_half_offset";
    case DecayModel::kZeroOffset: return "zero_offset";
  }
  return "unknown";
}

DecayFit fit_decay(std::span<const FitPoint> points, DecayModel model, const FitOptions& options) {
  DecayFit fit;
  fit.model = model;
  const int k = parameter_count(model);

  std::set<double> distinct;
  for (const auto& pt : points) distinct.insert(pt.m);
  if (static_cast<int>(distinct.size()) < k) {
    fit.error = "not enough distinct lengths";
    return fit;
  }

  double vmin = std::numeric_limits<double>::infinity();
  double vmax = -std::numeric_limits<double>::infinity();
  for (const auto& pt : points) {
    vmin = std::min(vmin, pt.value);
    vmax = std::max(vmax, pt.value);
  }
  const double range = vmax - vmin;
  if (range <= 1e-14 * std::max(1.0, std::abs(vmax))) {
    fit.error = "degenerate: all values equal";
    return fit;
  }

  // Initializer candidates; with a free offset the asymptote is unknown, so
  // try several plausible floors and keep the best refined solution.
  std::vector<double> offsets;
  if (model == DecayModel::kWithOffset) {
    offsets = {vmin - 0.5 * range, vmin - 0.1 * range, vmin - 1e-3 * range};
    if (vmin > 0.5) offsets.push_back(0.5);
    if (vmin > 0.0) offsets.push_back(0.0);
  } else {
    offsets = {fixed_offset(model)};
  }

  GaussNewtonResult best;
  for (const double b0 : offsets) {
    Params init;
    if (!log_linear_init(points, b0, &init)) continue;
    auto res = gauss_newton(points, model, init, options);
    if (model != DecayModel::kWithOffset) res.params.b = fixed_offset(model);
    if (res.sse < best.sse) best = res;
  }
  if (!std::isfinite(best.sse)) {
    fit.error = "initialization failed (no decaying signal)";
    return fit;
  }
  if (!best.converged) {
    fit.error = "did not converge";
    fit.iterations = best.iterations;
    return fit;
  }

  const Params p = best.params;
  fit.amplitude = p.a;
  fit.rate = p.r;
  fit.offset = p.b;
  fit.residual_sum = best.sse;
  fit.iterations = best.iterations;

  // Covariance from the final Jacobian.
  Eigen::MatrixXd jtj = Eigen::MatrixXd::Zero(k, k);
  bool unit_weights = true;
  for (const auto& pt : points) {
    if (pt.weight != 1.0) unit_weights = false;
    const double rm1 = std::pow(p.r, pt.m - 1.0);
    Eigen::VectorXd grad(k);
    grad(0) = rm1 * p.r;
    grad(1) = p.a * pt.m * rm1;
    if (k == 3) grad(2) = 1.0;
    jtj += pt.weight * grad * grad.transpose();
  }
  Eigen::MatrixXd cov = jtj.ldlt().solve(Eigen::MatrixXd::Identity(k, k));
  const auto n = static_cast<int>(points.size());
  if (unit_weights && n > k) cov *= best.sse / (n - k);
  if (!cov.allFinite() || cov(0, 0) < 0.0 || cov(1, 1) < 0.0) {
    fit.error = "singular covariance";
    return fit;
  }
  fit.amplitude_se = std::sqrt(std::max(cov(0, 0), 0.0));
  fit.rate_se = std::sqrt(std::max(cov(1, 1), 0.0));
  if (k == 3) fit.offset_se = std::sqrt(std::max(cov(2, 2), 0.0));

  if (p.r <= 0.0) {
    fit.error = "rate is non-positive";
    return fit;
  }
  const double cap = 1.0 + std::max(options.rate_cap_abs, options.rate_cap_sigmas * fit.rate_se);
  if (p.r > cap) {
    fit.error = "rate above one beyond tolerance";
    return fit;
  }

  fit.ok = true;
  return fit;
}

}  // namespace pbsim

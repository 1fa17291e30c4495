#include <doctest.h>

#include <cmath>
#include <vector>

#include "pbsim/fitting.hpp"
#include "pbsim/rng.hpp"

using namespace pbsim;

namespace {

const std::vector<double> kLengths = {2, 6, 13, 25, 50, 100, 200};

std::vector<FitPoint> make_points(double a, double r, double b) {
  std::vector<FitPoint> pts;
  for (const double m : kLengths) pts.push_back({m, a * std::pow(r, m) + b, 1.0});
  return pts;
}

}  // namespace

TEST_SUITE("fitting") {

TEST_CASE("noiseless round trips") {
  const auto with_offset = fit_decay(make_points(0.5, 0.99, 0.5), DecayModel::kWithOffset);
  REQUIRE(with_offset.ok);
  CHECK(with_offset.amplitude == doctest::Approx(0.5).epsilon(1e-8));
  CHECK(with_offset.rate == doctest::Approx(0.99).epsilon(1e-8));
  CHECK(with_offset.offset == doctest::Approx(0.5).epsilon(1e-8));

  const auto fixed_half = fit_decay(make_points(0.48, 0.995, 0.5), DecayModel::kFixedHalfOffset);
  REQUIRE(fixed_half.ok);
  CHECK(fixed_half.amplitude == doctest::Approx(0.48).epsilon(1e-8));
  CHECK(fixed_half.rate == doctest::Approx(0.995).epsilon(1e-8));
  CHECK(fixed_half.offset == doctest::Approx(0.5));

  const auto zero = fit_decay(make_points(0.97, 0.996, 0.0), DecayModel::kZeroOffset);
  REQUIRE(zero.ok);
  CHECK(zero.amplitude == doctest::Approx(0.97).epsilon(1e-8));
  CHECK(zero.rate == doctest::Approx(0.996).epsilon(1e-8));
}

TEST_CASE("degenerate inputs fail explicitly") {
  std::vector<FitPoint> constant;
  for (const double m : kLengths) constant.push_back({m, 0.75, 1.0});
  CHECK_FALSE(fit_decay(constant, DecayModel::kZeroOffset).ok);
  CHECK_FALSE(fit_decay(constant, DecayModel::kWithOffset).ok);

  const std::vector<FitPoint> too_few = {{2, 0.9, 1.0}, {6, 0.8, 1.0}};
  CHECK_FALSE(fit_decay(too_few, DecayModel::kWithOffset).ok);
  CHECK(fit_decay(too_few, DecayModel::kZeroOffset).ok);  // 2 params need 2 lengths
}

TEST_CASE("a rate far above one is a failure, never a clamp") {
  std::vector<FitPoint> rising;
  for (const double m : kLengths) rising.push_back({m, 0.5 * std::pow(1.01, m), 1.0});
  const auto fit = fit_decay(rising, DecayModel::kZeroOffset);
  CHECK_FALSE(fit.ok);
  CHECK(fit.error == "rate above one beyond tolerance");
}

TEST_CASE("a rate within noise of one is kept") {
  // Exact r = 1 + 2e-7 with a tight SE would (just) pass the absolute band.
  RngStream rng(42);
  std::vector<FitPoint> pts;
  for (const double m : kLengths) {
    pts.push_back({m, 0.9 * std::pow(1.0, m) + 2e-4 * rng.next_normal(), 1.0 / (2e-4 * 2e-4)});
  }
  const auto fit = fit_decay(pts, DecayModel::kZeroOffset);
  REQUIRE(fit.ok);
  CHECK(std::abs(fit.rate - 1.0) < 3.0 * fit.rate_se + 1e-6);
}

TEST_CASE("Monte Carlo calibration: 1-sigma coverage of the rate") {
  RngStream rng(7);
  const double sigma = 0.005;
  const int trials = 200;
  int covered = 0;
  for (int t = 0; t < trials; ++t) {
    std::vector<FitPoint> pts;
    for (const double m : kLengths) {
      pts.push_back({m, 0.5 * std::pow(0.99, m) + 0.5 + sigma * rng.next_normal(),
                     1.0 / (sigma * sigma)});
    }
    const auto fit = fit_decay(pts, DecayModel::kWithOffset);
    REQUIRE(fit.ok);
    if (std::abs(fit.rate - 0.99) <= fit.rate_se) ++covered;
  }
  // True coverage 0.68; binomial 3-sigma band for 200 trials is +/- 20.
  CHECK(covered >= 116);
  CHECK(covered <= 156);
}

TEST_CASE("weighted fits honor the weights") {
  // One wildly wrong point with near-zero weight must not move the fit.
  auto pts = make_points(0.5, 0.99, 0.5);
  pts.push_back({30, 5.0, 1e-12});
  for (auto& pt : pts) {
    if (pt.weight == 1.0) pt.weight = 1e6;
  }
  const auto fit = fit_decay(pts, DecayModel::kWithOffset);
  REQUIRE(fit.ok);
  CHECK(fit.rate == doctest::Approx(0.99).epsilon(1e-4));
}

}  // TEST_SUITE

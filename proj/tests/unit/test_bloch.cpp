#include <doctest.h>

#include <cmath>
#include <numbers>
#include <complex>
#include <vector>

#include "pbsim/bloch.hpp"
#include "pbsim/rng.hpp"

using namespace pbsim;

namespace {

using cd = std::complex<double>;
struct Mat2 {
  cd a, b, c, d;  // row major
};

Mat2 mul(const Mat2& x, const Mat2& y) {
  return {x.a * y.a + x.b * y.c, x.a * y.b + x.b * y.d,
          x.c * y.a + x.d * y.c, x.c * y.b + x.d * y.d};
}

Mat2 dagger(const Mat2& x) {
  return {std::conj(x.a), std::conj(x.c), std::conj(x.b), std::conj(x.d)};
}

Mat2 add(const Mat2& x, const Mat2& y) { return {x.a + y.a, x.b + y.b, x.c + y.c, x.d + y.d}; }

// rho = (I + a.sigma)/2 in the basis where |0> is at +z.
Mat2 density(const BlochVector& s) {
  return {cd(0.5 * (1 + s.z), 0), cd(0.5 * s.x, -0.5 * s.y),
          cd(0.5 * s.x, 0.5 * s.y), cd(0.5 * (1 - s.z), 0)};
}

BlochVector bloch_of(const Mat2& rho) {
  return {2.0 * rho.b.real(), 2.0 * rho.c.imag(), (rho.a - rho.d).real()};
}

// Independent oracle: apply a Kraus set to the density matrix.
BlochVector kraus_apply(const std::vector<Mat2>& kraus, const BlochVector& in) {
  const Mat2 rho = density(in);
  Mat2 out{0, 0, 0, 0};
  for (const auto& k : kraus) out = add(out, mul(mul(k, rho), dagger(k)));
  return bloch_of(out);
}

Vec3 random_unit(RngStream& rng) {
  // Marsaglia rejection inside the ball, normalized.
  while (true) {
    const double x = 2.0 * rng.next_double() - 1.0;
    const double y = 2.0 * rng.next_double() - 1.0;
    const double z = 2.0 * rng.next_double() - 1.0;
    const double n2 = x * x + y * y + z * z;
    if (n2 > 1e-6 && n2 <= 1.0) {
      const double n = std::sqrt(n2);
      return {x / n, y / n, z / n};
    }
  }
}

// Monte Carlo unitarity: average identity-subtracted output purity over
// Haar-random pure states, i.e. E[|M a|^2] over uniform unit a.
double mc_unitarity(const PauliTransferMap& map, int samples, RngStream& rng, double* se) {
  double sum = 0.0, sumsq = 0.0;
  for (int i = 0; i < samples; ++i) {
    const Vec3 a = random_unit(rng);
    const Vec3 ma = matvec(map.m, a);
    const double v = dot(ma, ma);
    sum += v;
    sumsq += v * v;
  }
  const double mean = sum / samples;
  *se = std::sqrt(std::max(0.0, sumsq / samples - mean * mean) / samples);
  return mean;
}

// Monte Carlo average infidelity: 1 - E[(1 + a.(Ma + t))/2] over unit a.
double mc_infidelity(const PauliTransferMap& map, int samples, RngStream& rng, double* se) {
  double sum = 0.0, sumsq = 0.0;
  for (int i = 0; i < samples; ++i) {
    const Vec3 a = random_unit(rng);
    Vec3 out = matvec(map.m, a);
    for (int k = 0; k < 3; ++k) out[k] += map.t[k];
    const double f = 0.5 * (1.0 + dot(a, out));
    sum += f;
    sumsq += f * f;
  }
  const double mean = sum / samples;
  *se = std::sqrt(std::max(0.0, sumsq / samples - mean * mean) / samples);
  return 1.0 - mean;
}

const Mat2 kId{1, 0, 0, 1};

}  // namespace

TEST_SUITE("bloch") {

TEST_CASE("purity and purity metric") {
  CHECK(purity({0, 0, 1}) == doctest::Approx(1.0));
  CHECK(purity({0, 0, 0}) == doctest::Approx(0.5));
  CHECK(purity({0.6, 0, 0}) == doctest::Approx(0.68));
  CHECK(purity_metric({0, 0, 1}) == doctest::Approx(1.0));
  CHECK(purity_metric({0, 0, 0}) == doctest::Approx(0.0));
  CHECK(purity_metric({0.3, 0.4, 0}) == doctest::Approx(0.25));
}

TEST_CASE("purity identity vs metric") {
  RngStream rng(1);
  for (int i = 0; i < 100; ++i) {
    const Vec3 v = random_unit(rng);
    const double scale = rng.next_double();
    const BlochVector s{v[0] * scale, v[1] * scale, v[2] * scale};
    CHECK(purity(s) == doctest::Approx(0.5 * (1.0 + purity_metric(s))).epsilon(1e-12));
  }
}

TEST_CASE("apply_map basics") {
  const BlochVector in{0.2, 0.1, -0.5};
  const BlochVector out = apply_map(identity_map(), in);
  CHECK(out.x == doctest::Approx(0.2));
  CHECK(out.y == doctest::Approx(0.1));
  CHECK(out.z == doctest::Approx(-0.5));

  const BlochVector dep = apply_map(depolarizing_map(0.9), {0, 0, 1});
  CHECK(dep.z == doctest::Approx(0.9));

  // Full relaxation: everything lands on the ground state at -z.
  const BlochVector relaxed = apply_map(amplitude_damping_map(1.0), {0, 0, 1});
  CHECK(relaxed.z == doctest::Approx(-1.0));
}

TEST_CASE("apply_map rejects maps that leave the ball") {
  PauliTransferMap bad;
  bad.m = {{{1.2, 0, 0}, {0, 1.2, 0}, {0, 0, 1.2}}};
  CHECK_THROWS_AS(apply_map(bad, {0, 0, 1}), std::domain_error);
}

TEST_CASE("kraus oracle agrees with the affine action") {
  RngStream rng(2);
  const double gamma = 0.1;
  const double sg = std::sqrt(gamma);
  const double s1 = std::sqrt(1.0 - gamma);
  // Damping toward -z: |0> (at +z) decays to |1> (at -z).
  const std::vector<Mat2> damping = {Mat2{s1, 0, 0, 1}, Mat2{0, 0, sg, 0}};
  const double p = 0.95;
  const double q = (1.0 - p) / 4.0;
  const std::vector<Mat2> depol = {
      Mat2{std::sqrt(1 - 3 * q), 0, 0, std::sqrt(1 - 3 * q)},
      Mat2{0, std::sqrt(q), std::sqrt(q), 0},
      Mat2{0, cd(0, -std::sqrt(q)), cd(0, std::sqrt(q)), 0},
      Mat2{std::sqrt(q), 0, 0, -std::sqrt(q)}};
  const double lam = 0.9;  // dephasing factor
  const std::vector<Mat2> dephase = {
      Mat2{std::sqrt((1 + lam) / 2), 0, 0, std::sqrt((1 + lam) / 2)},
      Mat2{std::sqrt((1 - lam) / 2), 0, 0, -std::sqrt((1 - lam) / 2)}};

  const struct {
    PauliTransferMap map;
    const std::vector<Mat2>& kraus;
  } cases[] = {{amplitude_damping_map(gamma), damping},
               {depolarizing_map(p), depol},
               {dephasing_map(lam), dephase}};
  for (const auto& tc : cases) {
    for (int i = 0; i < 50; ++i) {
      const Vec3 v = random_unit(rng);
      const double r = rng.next_double();
      const BlochVector in{v[0] * r, v[1] * r, v[2] * r};
      const BlochVector got = apply_map(tc.map, in);
      const BlochVector want = kraus_apply(tc.kraus, in);
      CHECK(got.x == doctest::Approx(want.x).epsilon(1e-10));
      CHECK(got.y == doctest::Approx(want.y).epsilon(1e-10));
      CHECK(got.z == doctest::Approx(want.z).epsilon(1e-10));
    }
  }
}

TEST_CASE("unitarity closed form matches the Haar Monte Carlo oracle") {
  RngStream rng(3);
  const PauliTransferMap maps[] = {
      depolarizing_map(0.9), amplitude_damping_map(0.1), dephasing_map(0.8),
      rotation_map({0, 0, 1}, 0.7),
      compose_maps(rotation_map({1, 0, 0}, 0.3), amplitude_damping_map(0.05))};
  for (const auto& map : maps) {
    double se = 0.0;
    const double mc = mc_unitarity(map, 20000, rng, &se);
    CHECK(std::abs(channel_unitarity(map) - mc) < 3.0 * se + 1e-12);
  }
  CHECK(channel_unitarity(depolarizing_map(0.9)) == doctest::Approx(0.81));
  CHECK(channel_unitarity(amplitude_damping_map(0.1)) == doctest::Approx(0.87));
  CHECK(channel_unitarity(rotation_map({0, 1, 0}, 1.1)) == doctest::Approx(1.0));
}

TEST_CASE("unitarity is invariant under rotations") {
  RngStream rng(4);
  const PauliTransferMap map = compose_maps(dephasing_map(0.9), amplitude_damping_map(0.07));
  for (int i = 0; i < 10; ++i) {
    const Vec3 axis = random_unit(rng);
    const double angle = rng.next_double() * 6.28;
    const PauliTransferMap rot = rotation_map(axis, angle);
    const PauliTransferMap conj = compose_maps(rot, compose_maps(map, rotation_map(axis, -angle)));
    CHECK(channel_unitarity(conj) == doctest::Approx(channel_unitarity(map)).epsilon(1e-12));
  }
}

TEST_CASE("average infidelity closed form and oracle") {
  CHECK(channel_avg_infidelity(identity_map()) == doctest::Approx(0.0));
  CHECK(channel_avg_infidelity(depolarizing_map(0.99)) == doctest::Approx(5.0e-3));
  CHECK(channel_avg_infidelity(rotation_map({0, 0, 1}, std::numbers::pi)) == doctest::Approx(2.0 / 3.0));

  RngStream rng(5);
  const PauliTransferMap maps[] = {depolarizing_map(0.99), rotation_map({0, 0, 1}, 0.2),
                                   amplitude_damping_map(0.02)};
  for (const auto& map : maps) {
    double se = 0.0;
    const double mc = mc_infidelity(map, 20000, rng, &se);
    CHECK(std::abs(channel_avg_infidelity(map) - mc) < 3.0 * se + 1e-12);
  }
}

TEST_CASE("survival probability") {
  CHECK(survival_probability({0, 0, 1}, {0, 0, 1}) == doctest::Approx(1.0));
  CHECK(survival_probability({0, 0, 0}, {0, 0, 1}) == doctest::Approx(0.5));
  CHECK(survival_probability({0, 0, -1}, {0, 0, 1}) == doctest::Approx(0.0));
  CHECK_THROWS_AS(survival_probability({0, 0, 1}, {0, 0, 2}), std::invalid_argument);
}

TEST_CASE("sample_counts") {
  RngStream rng(6);
  CHECK(sample_counts(1.0, 500, rng).ones == 500);
  CHECK(sample_counts(0.0, 500, rng).ones == 0);
  CHECK_THROWS_AS(sample_counts(0.5, 0, rng), std::invalid_argument);

  RngStream r1(77), r2(77);
  CHECK(sample_counts(0.3, 1000, r1).ones == sample_counts(0.3, 1000, r2).ones);
}

TEST_CASE("complete positivity check") {
  CHECK(is_completely_positive(identity_map()));
  CHECK(is_completely_positive(depolarizing_map(0.5)));
  CHECK(is_completely_positive(amplitude_damping_map(0.3)));
  CHECK(is_completely_positive(rotation_map({0, 1, 0}, 0.4)));

  // Transpose map: positive but not completely positive.
  PauliTransferMap transpose_map;
  transpose_map.m = {{{1, 0, 0}, {0, -1, 0}, {0, 0, 1}}};
  CHECK_FALSE(is_completely_positive(transpose_map));

  // Uniform shrink needs p in [-1/3, 1] for CP.
  CHECK(is_completely_positive(depolarizing_map(-1.0 / 3.0 + 1e-6)));
  CHECK_FALSE(is_completely_positive(depolarizing_map(-0.5)));
}

TEST_CASE("CP maps keep physical states physical (sampled)") {
  RngStream rng(8);
  const PauliTransferMap maps[] = {
      depolarizing_map(0.97), amplitude_damping_map(0.2), dephasing_map(0.6),
      compose_maps(rotation_map({0, 0, 1}, 0.5),
                   compose_maps(dephasing_map(0.95), amplitude_damping_map(0.1)))};
  for (const auto& map : maps) {
    REQUIRE(is_completely_positive(map));
    for (int i = 0; i < 200; ++i) {
      const Vec3 a = random_unit(rng);
      const BlochVector out = apply_map(map, BlochVector::from_vec(a));
      CHECK(out.norm2() <= 1.0 + 1e-9);
    }
  }
}

}  // TEST_SUITE

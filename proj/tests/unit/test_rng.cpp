#include <doctest.h>

#include <cmath>
#include <vector>

#include "pbsim/rng.hpp"

using namespace pbsim;

TEST_SUITE("rng") {

// Known-answer vectors from the Random123 reference distribution.
TEST_CASE("philox4x32-10 known answers") {
  CHECK(philox4x32_10({0, 0, 0, 0}, {0, 0}) ==
        std::array<std::uint32_t, 4>{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u});
  CHECK(philox4x32_10({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu},
                      {0xffffffffu, 0xffffffffu}) ==
        std::array<std::uint32_t, 4>{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu});
  CHECK(philox4x32_10({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u},
                      {0xa4093822u, 0x299f31d0u}) ==
        std::array<std::uint32_t, 4>{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u});
}

TEST_CASE("streams are reproducible and children are independent of parent use") {
  RngStream a(42);
  RngStream b(42);
  for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());

  // Child derivation reads nothing from the parent's position.
  RngStream parent1(7);
  RngStream parent2(7);
  (void)parent1.next_u64();
  RngStream c1 = parent1.child(3);
  RngStream c2 = parent2.child(3);
  CHECK(c1.next_u64() == c2.next_u64());

  // Distinct children disagree.
  CHECK(RngStream(7).child(0).next_u64() != RngStream(7).child(1).next_u64());
  CHECK(RngStream(7).child(0).next_u64() != RngStream(8).child(0).next_u64());
}

TEST_CASE("next_double stays in [0,1)") {
  RngStream rng(11);
  for (int i = 0; i < 10000; ++i) {
    const double u = rng.next_double();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
  }
}

TEST_CASE("binomial edge cases and concentration") {
  RngStream rng(5);
  CHECK(rng.binomial(500, 1.0) == 500);
  CHECK(rng.binomial(500, 0.0) == 0);

  const int n = 1000000;
  const int ones = rng.binomial(n, 0.5);
  // 4 sigma band: 0.5 +/- 4 * sqrt(0.25/n) = 0.5 +/- 0.002
  CHECK(std::abs(static_cast<double>(ones) / n - 0.5) < 0.002);
}

TEST_CASE("uniform_int is unbiased across its range") {
  RngStream rng(123);
  std::vector<int> counts(24, 0);
  const int draws = 100000;
  for (int i = 0; i < draws; ++i) ++counts[rng.uniform_int(24)];
  double chi2 = 0.0;
  const double expected = draws / 24.0;
  for (const int c : counts) chi2 += (c - expected) * (c - expected) / expected;
  // chi-square 0.999 quantile at 23 dof
  CHECK(chi2 < 49.728);
}

TEST_CASE("normal moments") {
  RngStream rng(99);
  const int n = 200000;
  double sum = 0.0, sumsq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double z = rng.next_normal();
    sum += z;
    sumsq += z * z;
  }
  CHECK(std::abs(sum / n) < 0.01);
  CHECK(std::abs(sumsq / n - 1.0) < 0.02);
}

}  // TEST_SUITE

#pragma once

#include <array>
#include <cstdint>

namespace pbsim {

/// One block of the Philox4x32-10 counter-based generator (Salmon et al.,
/// "Parallel random numbers: as easy as 1, 2, 3"). Exposed for known-answer
/// tests; normal users go through RngStream.
std::array<std::uint32_t, 4> philox4x32_10(const std::array<std::uint32_t, 4>& counter,
                                           const std::array<std::uint32_t, 2>& key);

/// Deterministic random stream with hierarchical splitting.
///
/// Every stream is a Philox4x32-10 keyed by a 64-bit seed; the counter walks
/// forward one 128-bit block per 4 outputs. child(i) derives an independent
/// stream by hashing (seed, i) through the same primitive, so a tree of
/// streams (master -> per-cycle -> per-sequence -> per-variant) is fully
/// determined by the master seed, regardless of evaluation order or thread
/// scheduling. Derivation counters live in a region the block counter cannot
/// reach (it would take 2^96 draws), so parent and child outputs never alias.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed);

  /// Derived independent stream; the parent is left untouched.
  [[nodiscard]] RngStream child(std::uint64_t index) const;

  std::uint32_t next_u32();
  std::uint64_t next_u64();

  /// Uniform on [0, 1) with 53 random bits.
  double next_double();

  /// Standard normal via Box-Muller (no rejection, fixed draw count).
  double next_normal();

  /// Uniform integer on [0, n). n must be positive.
  std::uint64_t uniform_int(std::uint64_t n);

  /// Number of successes in `trials` Bernoulli(prob) draws.
  int binomial(int trials, double prob);

  std::uint64_t seed() const { return seed_; }

 private:
  std::uint64_t seed_;
  std::array<std::uint32_t, 2> key_;
  std::array<std::uint32_t, 4> counter_{};
  std::array<std::uint32_t, 4> buffer_{};
  int buffer_pos_ = 4;

  void refill();
};

}  // namespace pbsim

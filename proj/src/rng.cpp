#include "pbsim/rng.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace pbsim {

namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53u;
constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

// Counter word used to mark key-derivation blocks. The running block counter
// carries into word 2 only after 2^64 blocks, so these never collide with
// output blocks of the same key.
constexpr std::uint32_t kDeriveTag = 0x5EEDB10Cu;

}  // namespace

std::array<std::uint32_t, 4> philox4x32_10(const std::array<std::uint32_t, 4>& counter,
                                           const std::array<std::uint32_t, 2>& key) {
  std::array<std::uint32_t, 4> c = counter;
  std::array<std::uint32_t, 2> k = key;
  for (int round = 0; round < 10; ++round) {
    if (round > 0) {
      k[0] += kWeyl0;
      k[1] += kWeyl1;
    }
    const std::uint64_t p0 = std::uint64_t{kMul0} * c[0];
    const std::uint64_t p1 = std::uint64_t{kMul1} * c[2];
    const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
    const auto lo0 = static_cast<std::uint32_t>(p0);
    const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
    const auto lo1 = static_cast<std::uint32_t>(p1);
    c = {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
  }
  return c;
}

RngStream::RngStream(std::uint64_t seed)
    : seed_(seed),
      key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)} {}

RngStream RngStream::child(std::uint64_t index) const {
  const std::array<std::uint32_t, 4> ctr = {static_cast<std::uint32_t>(index),
                                            static_cast<std::uint32_t>(index >> 32),
                                            kDeriveTag, 0u};
  const auto out = philox4x32_10(ctr, key_);
  return RngStream((std::uint64_t{out[1]} << 32) | out[0]);
}

void RngStream::refill() {
  buffer_ = philox4x32_10(counter_, key_);
  buffer_pos_ = 0;
  // 128-bit counter increment.
  for (int i = 0; i < 4; ++i) {
    if (++counter_[i] != 0) break;
  }
}

std::uint32_t RngStream::next_u32() {
  if (buffer_pos_ >= 4) refill();
  return buffer_[buffer_pos_++];
}

std::uint64_t RngStream::next_u64() {
  const std::uint64_t lo = next_u32();
  const std::uint64_t hi = next_u32();
  return (hi << 32) | lo;
}

double RngStream::next_double() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double RngStream::next_normal() {
  // u1 in (0, 1] keeps the log finite.
  const double u1 = 1.0 - next_double();
  const double u2 = next_double();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::uint64_t RngStream::uniform_int(std::uint64_t n) {
  if (n == 0) throw std::invalid_argument("uniform_int: n must be positive");
  const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n + 1) % n;
  std::uint64_t draw;
  do {
    draw = next_u64();
  } while (draw > limit);
  return draw % n;
}

int RngStream::binomial(int trials, double prob) {
  if (trials < 0) throw std::invalid_argument("binomial: negative trial count");
  int successes = 0;
  for (int i = 0; i < trials; ++i) {
    if (next_double() < prob) ++successes;
  }
  return successes;
}

}  // namespace pbsim

#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace amlgnn {

// Counter-based, splittable generator ("SplitMix64-CB").
//
// State is a 64-bit key plus a 64-bit counter. Output number i of a stream is
//
//   x = key + (i + 1) * 0x9E3779B97F4A7C15      (mod 2^64)
//   x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9
//   x = (x ^ (x >> 27)) * 0x94D049BB133111EB
//   out = x ^ (x >> 31)
//
// i.e. the SplitMix64 finaliser applied to a Weyl sequence. A child stream is
// keyed by mix(key ^ mix(stream_id + 0x632BE59BD9B4E019)) and starts at
// counter 0, so split() never consumes parent output. Doubles take the top
// 53 bits: u = (out >> 11) * 2^-53, giving u in [0, 1).
class Rng {
 public:
  static constexpr std::uint64_t kWeyl = 0x9E3779B97F4A7C15ULL;
  static constexpr std::uint64_t kSplitSalt = 0x632BE59BD9B4E019ULL;

  explicit constexpr Rng(std::uint64_t seed = 42) : key_(mix(seed)) {}

  static constexpr std::uint64_t mix(std::uint64_t x) {
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
  }

  // Random access into the stream; does not advance.
  constexpr std::uint64_t at(std::uint64_t counter) const {
    return mix(key_ + (counter + 1) * kWeyl);
  }

  constexpr std::uint64_t next_u64() { return at(counter_++); }

  constexpr Rng split(std::uint64_t stream_id) const {
    Rng child;
    child.key_ = mix(key_ ^ mix(stream_id + kSplitSalt));
    child.counter_ = 0;
    return child;
  }

  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [0, n), rejection-sampled to avoid modulo bias.
  std::uint64_t below(std::uint64_t n) {
    if (n <= 1) return 0;
    const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
    std::uint64_t x = next_u64();
    while (x >= limit) x = next_u64();
    return x % n;
  }

  // Box-Muller; consumes two outputs per call.
  double normal() {
    const double u1 = 1.0 - uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  std::uint64_t key() const { return key_; }
  std::uint64_t counter() const { return counter_; }

 private:
  std::uint64_t key_ = 0;
  std::uint64_t counter_ = 0;
};

}  // namespace amlgnn

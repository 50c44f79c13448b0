#pragma once

#include <cstdint>
#include <cstddef>

// Deterministic random streams. The generator is xoshiro256** seeded through
// splitmix64; uniform draws are built from the raw 64-bit output instead of
// <random> distributions so that sequences are identical across standard
// libraries and platforms. Every offspring-producing event in the search gets
// its own stream derived from (seed, a, b, c), which keeps parallel and
// serial execution byte-identical.

namespace evonarx {

class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) { reseed(seed); }

  void reseed(std::uint64_t seed);

  std::uint64_t next_u64();

  // Uniform on [0, 1): 53 random mantissa bits.
  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // Uniform integer on [lo, hi] inclusive, unbiased.
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);

  bool bernoulli(double p) {
    if (p <= 0.0) return false;
    if (p >= 1.0) return true;
    return uniform01() < p;
  }

 private:
  std::uint64_t s_[4];
};

// Stable key-derived child stream: same inputs, same stream, regardless of
// how many draws other streams have consumed.
RngStream derive_stream(std::uint64_t seed, std::uint64_t a, std::uint64_t b,
                        std::uint64_t c);

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b,
                          std::uint64_t c);

}  // namespace evonarx

#include "evonarx/rng.hpp"

namespace evonarx {

namespace {

inline std::uint64_t splitmix64(std::uint64_t& x) {
  x += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = x;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::uint64_t rotl(std::uint64_t x, int k) {
  return (x << k) | (x >> (64 - k));
}

}  // namespace

void RngStream::reseed(std::uint64_t seed) {
  std::uint64_t x = seed;
  s_[0] = splitmix64(x);
  s_[1] = splitmix64(x);
  s_[2] = splitmix64(x);
  s_[3] = splitmix64(x);
}

std::uint64_t RngStream::next_u64() {
  const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
  const std::uint64_t t = s_[1] << 17;
  s_[2] ^= s_[0];
  s_[3] ^= s_[1];
  s_[1] ^= s_[2];
  s_[0] ^= s_[3];
  s_[2] ^= t;
  s_[3] = rotl(s_[3], 45);
  return result;
}

std::int64_t RngStream::uniform_int(std::int64_t lo, std::int64_t hi) {
  if (hi <= lo) return lo;
  const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
  // Rejection sampling to stay unbiased.
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % span;
  std::uint64_t v;
  do {
    v = next_u64();
  } while (v >= limit);
  return lo + static_cast<std::int64_t>(v % span);
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b,
                          std::uint64_t c) {
  std::uint64_t x = seed;
  std::uint64_t h = splitmix64(x);
  x ^= a * 0x9e3779b97f4a7c15ULL;
  h ^= splitmix64(x);
  x ^= b * 0xc2b2ae3d27d4eb4fULL;
  h ^= splitmix64(x);
  x ^= c * 0x165667b19e3779f9ULL;
  h ^= splitmix64(x);
  return h;
}

RngStream derive_stream(std::uint64_t seed, std::uint64_t a, std::uint64_t b,
                        std::uint64_t c) {
  return RngStream(derive_seed(seed, a, b, c));
}

}  // namespace evonarx

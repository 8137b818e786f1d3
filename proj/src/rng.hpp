#pragma once

#include <array>
#include <cstdint>

namespace dppmb {

inline uint64_t splitmix64(uint64_t& state) {
  uint64_t z = (state += 0x9e3779b97f4a7c15ull);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

inline uint64_t mix64(uint64_t a, uint64_t b) {
  uint64_t s = a + 0x9e3779b97f4a7c15ull * (b + 1);
  return splitmix64(s);
}

// Stream ids for every random decision in a run. Each consumer derives its
// own stream from (phase, step, index), so results never depend on thread
// scheduling or on which other phases ran before.
namespace stream {

inline constexpr uint64_t rollout = 1;
inline constexpr uint64_t selection = 2;
inline constexpr uint64_t metrics_picker = 3;
inline constexpr uint64_t prior_corpus = 4;
inline constexpr uint64_t oracle_motifs = 5;
inline constexpr uint64_t rnd_target = 6;
inline constexpr uint64_t rnd_predictor = 7;

inline uint64_t id(uint64_t phase, uint64_t a = 0, uint64_t b = 0) {
  return mix64(mix64(phase, a), b);
}

}  // namespace stream

// xoshiro256++ seeded from (seed, stream) through splitmix64. Identical
// (seed, stream) pairs produce identical sequences on every platform.
class Rng {
 public:
  Rng(uint64_t seed, uint64_t stream_id) {
    uint64_t s = seed ^ mix64(0x5851f42d4c957f2dull, stream_id);
    for (auto& w : state_) w = splitmix64(s);
  }

  uint64_t next() {
    const uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
    const uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  // Uniform in [0, 1) with 53-bit resolution.
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  // Unbiased uniform integer in [0, n); n must be positive.
  uint64_t below(uint64_t n) {
    const uint64_t threshold = (-n) % n;
    for (;;) {
      const uint64_t r = next();
      if (r >= threshold) return r % n;
    }
  }

 private:
  static uint64_t rotl(uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

  std::array<uint64_t, 4> state_;
};

}  // namespace dppmb

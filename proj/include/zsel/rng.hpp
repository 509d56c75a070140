#pragma once

#include <cmath>
#include <cstdint>

namespace zsel {

// splitmix64 finalizer; bijective avalanche used for seeding and stream mixing.
inline uint64_t mix64(uint64_t z) {
  z += 0x9E3779B97F4A7C15ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

// Combines a base seed with a stream/index into a fresh 64-bit seed.
inline uint64_t mix_seed(uint64_t seed, uint64_t stream) {
  return mix64(seed ^ mix64(stream + 0x632BE59BD9B4E019ull));
}

// Deterministic random stream (xoshiro256++). Identical sequences on every
// platform, which the reproducibility contract relies on: a result must be a
// pure function of (seed, stream), never of scheduling or the host library.
class RngStream {
 public:
  explicit RngStream(uint64_t seed) {
    uint64_t x = seed;
    for (auto& s : state_) {
      x = mix64(x);
      s = x;
    }
    state_[0] |= 1;  // xoshiro must not start all-zero
  }

  // Independent stream for (seed, stream); used for per-pass / per-sample RNG.
  static RngStream derive(uint64_t seed, uint64_t stream) {
    return RngStream(mix_seed(seed, stream));
  }

  uint64_t next_u64() {
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

  // [0, 1)
  double uniform() { return double(next_u64() >> 11) * 0x1.0p-53; }

  // (0, 1); safe as a log() argument
  double uniform_open() {
    double u;
    do {
      u = uniform();
    } while (u <= 0.0);
    return u;
  }

  // Inclusive, unbiased via rejection.
  int uniform_int(int lo, int hi) {
    const uint64_t range = uint64_t(int64_t(hi) - int64_t(lo)) + 1;
    const uint64_t threshold = (0 - range) % range;  // 2^64 mod range
    uint64_t x;
    do {
      x = next_u64();
    } while (x < threshold);
    return int(lo + int64_t(x % range));
  }

  // Standard normal, Box-Muller with a cached spare.
  float normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double u1 = uniform_open();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double t = 6.283185307179586476925286766559 * u2;
    spare_ = float(r * std::sin(t));
    have_spare_ = true;
    return float(r * std::cos(t));
  }

  float sign() { return (next_u64() >> 63) ? 1.0f : -1.0f; }

 private:
  static uint64_t rotl(uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

  uint64_t state_[4];
  bool have_spare_ = false;
  float spare_ = 0.0f;
};

}  // namespace zsel

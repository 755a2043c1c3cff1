#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace replicore {

// Generator identity, embedded in every report so paired runs can be
// reproduced across builds.
inline constexpr const char* kGeneratorName = "xoshiro256++/splitmix64";
inline constexpr const char* kGeneratorVersion = "1";

inline uint64_t splitmix64(uint64_t& state) {
  uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

inline uint64_t mix64(uint64_t x) {
  uint64_t s = x;
  return splitmix64(s);
}

// Deterministic stream of internal random choices keyed by a 64-bit seed.
// Two instances with equal seeds produce bit-identical value sequences on
// any platform; the position counter advances by one per 64-bit word drawn
// and the digest folds every drawn word, so paired executions can assert
// that they consumed identical streams.
class SharedRandomness {
 public:
  explicit SharedRandomness(uint64_t seed) : seed_(seed) {
    uint64_t sm = seed;
    for (auto& word : state_) word = splitmix64(sm);
  }

  uint64_t seed() const { return seed_; }
  uint64_t position() const { return position_; }
  uint64_t digest() const { return digest_; }

  uint64_t next_u64() {
    const uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
    const uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    ++position_;
    digest_ = mix64(digest_ ^ result);
    return result;
  }

  // Uniform in [0,1), 53-bit mantissa, exactly one stream unit.
  double uniform01() { return double(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform in (0,1); used where a logarithm of the draw is taken.
  double uniform01_open() {
    return (double(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  // Uniform integer in [0, n); one stream unit (negligible 2^-53 bias).
  uint64_t uniform_int(uint64_t n) {
    return uint64_t(uniform01() * double(n)) % n;
  }

  // Standard normal via Box-Muller, two stream units per draw.
  double normal() {
    double u1 = uniform01_open();
    double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925287 * u2);
  }

  // Independent stream derived from (seed, index); a pure function of both,
  // so paired runs obtain identical children regardless of how far the
  // parent streams have advanced.
  SharedRandomness child(uint64_t index) const {
    return SharedRandomness(mix64(seed_ ^ mix64(index + 0x51AFD6ED558CCD6DULL)));
  }

 private:
  static uint64_t rotl(uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

  uint64_t seed_;
  uint64_t state_[4];
  uint64_t position_ = 0;
  uint64_t digest_ = 0;
};

inline double draw_uniform_interval(SharedRandomness& rand, double lo, double hi) {
  if (!(lo < hi)) throw std::invalid_argument("draw_uniform_interval: need lo < hi");
  return lo + (hi - lo) * rand.uniform01();
}

inline std::vector<double> draw_uniform_cube(SharedRandomness& rand, int n, double q) {
  if (n < 1) throw std::invalid_argument("draw_uniform_cube: need N >= 1");
  if (!(q > 0)) throw std::invalid_argument("draw_uniform_cube: need Q > 0");
  std::vector<double> x(static_cast<size_t>(n), 0.0);
  for (auto& xi : x) xi = draw_uniform_interval(rand, -q, q);
  return x;
}

}  // namespace replicore

#pragma once

#include <cmath>
#include <cstdint>

namespace matkit {

// splitmix64 stream. All stochastic code in the toolkit draws through this
// struct instead of <random> distributions, so sequences are identical across
// standard library implementations and every output is reproducible from the
// seeds recorded in manifests.
class Rng {
 public:
  explicit Rng(uint64_t seed) : state_(seed) {}

  uint64_t next_u64() {
    uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1), 53-bit resolution.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [0, n). n must be > 0; modulo bias is irrelevant at
  // the n values used here (image extents, control grids).
  uint64_t below(uint64_t n) { return next_u64() % n; }

  // Standard normal via Box-Muller; second sample of each pair is cached.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    double u2 = uniform();
    double r = std::sqrt(-2.0 * std::log(1.0 - u1));
    double theta = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
  }

 private:
  uint64_t state_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

// Derives an independent child seed from a master seed and up to three
// context indices (e.g. material index, view index, stream tag). Runs the
// inputs through a short splitmix chain so nearby indices decorrelate.
inline uint64_t derive_seed(uint64_t master, uint64_t a = 0, uint64_t b = 0,
                            uint64_t tag = 0) {
  Rng mix(master ^ (a * 0x9e3779b97f4a7c15ull) ^ (b * 0xd1b54a32d192ed03ull) ^
          (tag * 0x2545f4914f6cdd1dull));
  mix.next_u64();
  return mix.next_u64();
}

}  // namespace matkit

#pragma once
#include <cstdint>

namespace plm {

// Deterministic generator used for every seeded sampling path. Stdlib
// distributions are implementation-defined, so doubles are produced directly
// from the 53 high bits.
class Rng {
 public:
  explicit Rng(uint64_t seed) : state_(seed + 0x9e3779b97f4a7c15ULL) {}

  // independent stream for a (seed, batch) pair; batches merge deterministically
  static Rng stream(uint64_t seed, uint64_t batch) {
    Rng r(seed);
    r.state_ ^= 0xbf58476d1ce4e5b9ULL * (batch + 1);
    r.next();
    return r;
  }

  uint64_t next() {
    uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // uniform in [0,1)
  double unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * unit(); }

  // uniform integer in [0, n)
  uint64_t below(uint64_t n) { return n ? next() % n : 0; }

 private:
  uint64_t state_;
};

}  // namespace plm

// Deterministic RNG wrapper. All sampling goes through the mappings below so
// results do not depend on the standard library's distribution internals.
#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace ernn {

class Rng {
 public:
  explicit Rng(uint64_t seed) : engine_(seed) {}

  uint64_t next_u64() { return engine_(); }

  // Uniform in [0, 1) with 53-bit resolution.
  double uniform01() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // Uniform in {0, ..., n-1}. Modulo bias is irrelevant at our scales.
  size_t index(size_t n) { return static_cast<size_t>(engine_() % n); }

  bool bernoulli(double p) { return uniform01() < p; }

  template <class T>
  void shuffle(std::vector<T>& v) {
    for (size_t i = v.size(); i > 1; --i) {
      std::swap(v[i - 1], v[index(i)]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace ernn

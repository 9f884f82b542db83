#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace actens {

// Deterministic splittable RNG. Children are derived from the stored seed
// value (not the evolved engine state), so the draw order in one stream never
// perturbs another. All floating-point draws are built from the raw 64-bit
// output to keep sequences identical across standard library versions.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : seed_(seed), gen_(mix64(seed ^ 0x9e3779b97f4a7c15ull)) {}

  std::uint64_t seed() const { return seed_; }

  Rng child(std::uint64_t stream) const {
    return Rng(mix64(seed_ + 0x9e3779b97f4a7c15ull * (stream + 1)));
  }

  Rng child(std::uint64_t a, std::uint64_t b) const { return child(a).child(b); }

  std::uint64_t next_u64() { return gen_(); }

  // uniform in [0, 1)
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // uniform in (0, hi]: complements the half-open unit draw
  double uniform_pos(double hi) { return hi * (1.0 - uniform()); }

  // uniform integer in [0, n)
  int uniform_int(int n) {
    // rejection sampling keeps the draw exactly uniform
    const std::uint64_t bound = static_cast<std::uint64_t>(n);
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
    std::uint64_t v = next_u64();
    while (v >= limit) v = next_u64();
    return static_cast<int>(v % bound);
  }

  double normal() {
    const double u1 = 1.0 - uniform();  // (0, 1]
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925287 * u2);
  }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (int i = static_cast<int>(v.size()) - 1; i > 0; --i) {
      const int j = uniform_int(i + 1);
      std::swap(v[static_cast<std::size_t>(i)], v[static_cast<std::size_t>(j)]);
    }
  }

  static std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

 private:
  std::uint64_t seed_;
  std::mt19937_64 gen_;
};

}  // namespace actens

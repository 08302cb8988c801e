#pragma once

#include <cstdint>

namespace stabreg::detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Counter-based generator: output i of stream s is a pure function of
// (seed, s, i), so results do not depend on platform or call order elsewhere.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed, std::uint64_t stream = 0)
      : key_(splitmix64(seed ^ splitmix64(stream + 0x632be59bd9b4e019ULL))) {}

  std::uint64_t next() { return splitmix64(key_ ^ splitmix64(counter_++)); }

  // Uniform on [0,1), a multiple of 2^-53.
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  // Uniform on [-1,1], a multiple of 2^-52.
  double uniform_signed() { return static_cast<double>(next() >> 11) * 0x1.0p-52 - 1.0; }

  // Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n) {
    if (n <= 1) return 0;
    const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
    std::uint64_t x;
    do x = next();
    while (x >= limit);
    return x % n;
  }

  bool bernoulli(double p) { return uniform() < p; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace stabreg::detail

#pragma once

#include <cstdint>
#include <random>

namespace retone {

/// Seeded RNG wrapper. std::mt19937_64 has a standard-pinned output
/// sequence; the value mappings below avoid std::*_distribution, whose
/// results vary between standard library implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t next() { return gen_(); }

  /// Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, n). Multiply-shift; slight bias is irrelevant
  /// here (n is always tiny against 2^64).
  std::size_t index(std::size_t n) {
    return static_cast<std::size_t>((static_cast<unsigned __int128>(gen_()) * n) >> 64);
  }

  /// Independent stream for one training iteration, derived from the run
  /// seed. Keeps batch sampling stateless across iterations so a resumed
  /// run reproduces the exact segment choices of an uninterrupted one.
  static Rng for_iteration(std::uint64_t seed, std::uint64_t iteration) {
    // splitmix64 of (seed, iteration)
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ull * (iteration + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    z = z ^ (z >> 31);
    return Rng(z);
  }

 private:
  std::mt19937_64 gen_;
};

}  // namespace retone

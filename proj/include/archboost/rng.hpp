#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace archboost {

// SplitMix64 stream expander, used for seeding and deriving per-task streams.
struct SplitMix64 {
  std::uint64_t state;

  explicit SplitMix64(std::uint64_t seed) : state(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }
};

// xoshiro256++ generator with all sampling algorithms fixed in-source
// (Box-Muller normals, Marsaglia-Tsang gamma), so that a given seed yields
// bit-identical draws on every platform and standard library.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  // Independent stream for (seed, stream); used by parallel experiment cells.
  static Rng derive(std::uint64_t seed, std::uint64_t stream);

  std::uint64_t next_u64();

  double uniform();      // [0, 1), 53-bit resolution
  double uniform_pos();  // (0, 1]
  double normal();       // standard normal, Box-Muller with cached pair
  double gamma(double shape);  // shape > 0, unit scale
  double chi_square(double df);
  double student_t(double df);

  // Uniform over {0, ..., n-1} without modulo bias.
  std::size_t below(std::size_t n);

  // k distinct indices from {0,...,n-1} (partial Fisher-Yates), sorted.
  std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t k);

 private:
  std::uint64_t s_[4];
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace archboost

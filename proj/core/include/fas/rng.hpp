#pragma once

#include <cstdint>
#include <limits>

namespace fas {

// SplitMix64 finalizer; used to derive independent seeds.
std::uint64_t splitmix64(std::uint64_t& state);

// Seed for substream `index` of a root seed. Distinct (root, index) pairs
// give statistically independent streams.
std::uint64_t derive_seed(std::uint64_t root, std::uint64_t index);

// xoshiro256** (Blackman & Vigna), state filled from SplitMix64.
class Xoshiro256 {
 public:
  using result_type = std::uint64_t;

  explicit Xoshiro256(std::uint64_t seed);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()();

  // Uniform on [0, 1) with 53 random bits.
  double uniform();

 private:
  std::uint64_t s_[4];
};

// Standard normal variates by Marsaglia's polar method; each pair of
// accepted uniforms yields two variates, the second cached.
class NormalSource {
 public:
  explicit NormalSource(std::uint64_t seed) : engine_(seed) {}

  double operator()();

 private:
  Xoshiro256 engine_;
  double cached_ = 0.0;
  bool has_cached_ = false;
};

}  // namespace fas

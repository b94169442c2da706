#pragma once

// Correlated Nakagami-m envelope generators.
//
// generate_physical builds each port envelope as the root of a sum of m
// squared, spatially correlated complex Gaussians: the coefficient-level
// correlation is imposed through the eigendecomposition of Jake's matrix, so
// marginals stay exactly Nakagami(m, mu) and the gain correlation is J^2.
// This requires integer m.
//
// There is no generator that mixes Nakagami envelopes linearly (a weighted
// sum of Nakagami variates is not Nakagami) or that square-roots correlated
// Gamma gains (the correlated Gamma variates come out with different shape
// and scale, so the envelopes would not be Nakagami(m, mu)).
//
// generate_copula draws envelopes from a Gaussian copula with Nakagami
// marginals for an arbitrary correlation matrix (J, J_h, an estimated R...).

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>

#include "fas/correlation.hpp"
#include "fas/ensemble.hpp"
#include "fas/matrix.hpp"
#include "fas/nakagami.hpp"

namespace fas {

// Samples per RNG substream. Chunk c of a run with seed s always draws from
// derive_seed(s, c), whatever the thread count.
inline constexpr std::size_t kChunkSamples = 4096;

struct GeneratorConfig {
  FasGeometry geom;
  NakagamiParams params;  // m must be a positive integer for generate_physical
  std::uint64_t seed = 1;
  std::size_t n_samples = 1'000'000;
  unsigned threads = 0;  // 0: hardware concurrency
};

// Holds the mixing matrix U Lambda^{1/2} of Jake's matrix (negative
// eigenvalues floored at 0) and produces sample chunks on demand.
class PhysicalGenerator {
 public:
  PhysicalGenerator(const FasGeometry& geom, const NakagamiParams& params);

  std::size_t ports() const { return mixing_.rows(); }
  const Matrix& mixing() const { return mixing_; }

  // Fills out (rows x ports, row-major) with the envelopes of chunk
  // `chunk_index` of the stream rooted at `seed`. rows <= kChunkSamples.
  void fill_chunk(std::uint64_t seed, std::size_t chunk_index, std::size_t rows, std::span<double> out) const;

 private:
  NakagamiParams params_;
  int branches_;
  Matrix mixing_;
};

ChannelEnsemble generate_physical(const GeneratorConfig& cfg);

// Gaussian-copula sampler: z ~ N(0, I), x = L z with L the Cholesky factor of
// psd_repair(cov), u = Phi(x) clamped to [1e-16, 1 - 1e-16], envelope =
// Nakagami quantile(u).
class CopulaGenerator {
 public:
  CopulaGenerator(const NakagamiParams& params, const CorrelationMatrix& cov);

  std::size_t ports() const { return factor_.rows(); }
  const Matrix& factor() const { return factor_; }

  void fill_chunk(std::uint64_t seed, std::size_t chunk_index, std::size_t rows, std::span<double> out) const;

 private:
  NakagamiDistribution marginal_;
  Matrix factor_;
};

ChannelEnsemble generate_copula(const FasGeometry& geom, const NakagamiParams& params, const CorrelationMatrix& cov,
                                std::uint64_t seed, std::size_t n_samples, unsigned threads = 0,
                                std::string covariance_id = "custom");

inline constexpr double kCdfClampLo = 1e-16;
inline constexpr double kCdfClampHi = 1.0 - 1e-16;

}  // namespace fas

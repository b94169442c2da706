#include "fas/chan_gen.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "fas/error.hpp"
#include "fas/numerics.hpp"
#include "fas/parallel.hpp"
#include "fas/rng.hpp"

namespace fas {
namespace {

std::size_t chunk_count(std::size_t n_samples) { return (n_samples + kChunkSamples - 1) / kChunkSamples; }

template <class Generator>
Matrix run_chunks(const Generator& gen, std::uint64_t seed, std::size_t n_samples, unsigned threads) {
  Matrix out(n_samples, gen.ports());
  const std::size_t ports = gen.ports();
  parallel_for(chunk_count(n_samples), threads, [&](std::size_t c) {
    const std::size_t first = c * kChunkSamples;
    const std::size_t rows = std::min(kChunkSamples, n_samples - first);
    gen.fill_chunk(seed, c, rows, out.data().subspan(first * ports, rows * ports));
  });
  return out;
}

}  // namespace

std::string_view to_string(GeneratorId id) {
  return id == GeneratorId::physical ? "physical" : "copula";
}

GeneratorId generator_id_from_string(std::string_view s) {
  if (s == "physical") return GeneratorId::physical;
  if (s == "copula") return GeneratorId::copula;
  throw DomainError("unknown generator id: " + std::string(s));
}

void ChannelEnsemble::validate() const {
  for (double v : envelopes.data())
    if (!std::isfinite(v) || v < 0.0) throw NumericalError("ChannelEnsemble: envelopes must be finite and >= 0");
}

PhysicalGenerator::PhysicalGenerator(const FasGeometry& geom, const NakagamiParams& params) : params_(params) {
  geom.validate();
  params.validate();
  if (params.m != std::floor(params.m) || params.m < 1.0)
    throw DomainError("generate_physical: m must be a positive integer");
  branches_ = static_cast<int>(params.m);

  const auto eig = sym_eigen(jakes_matrix(geom).matrix());
  const std::size_t n = geom.n_ports;
  mixing_ = Matrix(n, n);
  for (std::size_t k = 0; k < n; ++k) {
    const double root = std::sqrt(std::max(eig.eigenvalues[k], 0.0));
    for (std::size_t i = 0; i < n; ++i) mixing_(i, k) = eig.eigenvectors(i, k) * root;
  }
}

void PhysicalGenerator::fill_chunk(std::uint64_t seed, std::size_t chunk_index, std::size_t rows,
                                   std::span<double> out) const {
  const std::size_t n = ports();
  NormalSource normal(derive_seed(seed, chunk_index));
  // Each real and imaginary part has variance mu / (2m), so E|Z|^2 = mu / m.
  const double sigma = std::sqrt(params_.mu / (2.0 * params_.m));
  std::vector<double> re(n), im(n);
  for (std::size_t s = 0; s < rows; ++s) {
    auto gain = out.subspan(s * n, n);
    std::fill(gain.begin(), gain.end(), 0.0);
    for (int j = 0; j < branches_; ++j) {
      for (std::size_t i = 0; i < n; ++i) re[i] = sigma * normal();
      for (std::size_t i = 0; i < n; ++i) im[i] = sigma * normal();
      for (std::size_t p = 0; p < n; ++p) {
        auto a = mixing_.row(p);
        double gr = 0.0, gi = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
          gr += a[k] * re[k];
          gi += a[k] * im[k];
        }
        gain[p] += gr * gr + gi * gi;
      }
    }
    for (double& g : gain) g = std::sqrt(g);
  }
}

ChannelEnsemble generate_physical(const GeneratorConfig& cfg) {
  if (cfg.n_samples < 1) throw DomainError("generate_physical: n_samples must be >= 1");
  const PhysicalGenerator gen(cfg.geom, cfg.params);
  ChannelEnsemble ens{run_chunks(gen, cfg.seed, cfg.n_samples, cfg.threads),
                      Provenance{GeneratorId::physical, "jakes", cfg.seed, cfg.geom.n_ports, cfg.geom.aperture,
                                 cfg.params.m, cfg.params.mu}};
  return ens;
}

CopulaGenerator::CopulaGenerator(const NakagamiParams& params, const CorrelationMatrix& cov)
    : marginal_(params), factor_(cholesky(psd_repair(cov.matrix()))) {}

void CopulaGenerator::fill_chunk(std::uint64_t seed, std::size_t chunk_index, std::size_t rows,
                                 std::span<double> out) const {
  const std::size_t n = ports();
  NormalSource normal(derive_seed(seed, chunk_index));
  std::vector<double> z(n);
  for (std::size_t s = 0; s < rows; ++s) {
    for (double& v : z) v = normal();
    auto env = out.subspan(s * n, n);
    for (std::size_t i = 0; i < n; ++i) {
      auto l = factor_.row(i);
      double x = 0.0;
      for (std::size_t k = 0; k <= i; ++k) x += l[k] * z[k];
      const double u = std::clamp(std_normal_cdf(x), kCdfClampLo, kCdfClampHi);
      env[i] = marginal_.quantile(u);
    }
  }
}

ChannelEnsemble generate_copula(const FasGeometry& geom, const NakagamiParams& params, const CorrelationMatrix& cov,
                                std::uint64_t seed, std::size_t n_samples, unsigned threads,
                                std::string covariance_id) {
  geom.validate();
  if (n_samples < 1) throw DomainError("generate_copula: n_samples must be >= 1");
  if (cov.size() != geom.n_ports) throw DomainError("generate_copula: covariance size does not match n_ports");
  const CopulaGenerator gen(params, cov);
  return ChannelEnsemble{run_chunks(gen, seed, n_samples, threads),
                         Provenance{GeneratorId::copula, std::move(covariance_id), seed, geom.n_ports,
                                    geom.aperture, params.m, params.mu}};
}

}  // namespace fas

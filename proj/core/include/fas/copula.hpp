#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "fas/correlation.hpp"
#include "fas/nakagami.hpp"

namespace fas {

// P(X <= upper_limits) for X ~ N(0, covariance). Limits may be +-infinity.
struct MvnSpec {
  CorrelationMatrix covariance;
  std::vector<double> upper_limits;
};

struct CdfResult {
  double value = 0.0;
  double error_estimate = 0.0;  // 3-sigma spread across randomized shifts
  std::size_t n_evaluations = 0;
};

struct MvnOptions {
  double abs_tol = 1e-4;
  // When > 0, also require error_estimate <= rel_tol * value, so small
  // probabilities are resolved to relative accuracy.
  double rel_tol = 0.0;
  std::size_t max_evaluations = std::size_t{1} << 22;
  int shifts = 8;
};

inline constexpr double kDefaultMvnTol = 1e-4;

// Randomized lattice-rule QMC over Genz's sequential-conditioning transform,
// with variables reordered so the tightest conditional limit comes first.
// Deterministic for a given seed. When the budget runs out first the result
// is returned with error_estimate above the tolerance.
CdfResult mvn_cdf(const MvnSpec& spec, const MvnOptions& options, std::uint64_t seed);
CdfResult mvn_cdf(const MvnSpec& spec, double tol, std::uint64_t seed);

// CDF of the peak envelope max_n |h^(n)| under a Gaussian copula with
// covariance `cov` and identical Nakagami marginals.
CdfResult peak_cdf_result(double r, const NakagamiParams& params, const CorrelationMatrix& cov,
                          const MvnOptions& options, std::uint64_t seed);
double peak_cdf(double r, const NakagamiParams& params, const CorrelationMatrix& cov, double tol,
                std::uint64_t seed);

// Central-difference density of the peak envelope; the MVN tolerance is
// tightened to tol * h. Requires r > h.
double peak_pdf(double r, const NakagamiParams& params, const CorrelationMatrix& cov, double tol,
                std::uint64_t seed, double h);

// 1e-3 * sqrt(mu).
double default_pdf_step(const NakagamiParams& params);

}  // namespace fas

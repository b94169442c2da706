#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "fas/copula.hpp"
#include "fas/correlation.hpp"
#include "fas/nakagami.hpp"

namespace fas {

struct OutageQuery {
  double snr_db = 10.0;        // average transmit SNR
  double threshold_db = 10.0;  // decoding threshold
  FasGeometry geom;
  NakagamiParams params;

  void validate() const;
};

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

// Envelope level below which the link is in outage: sqrt(gamma_th / gamma).
double outage_radius(const OutageQuery& q);

enum class MatrixChoice { coefficient, envelope };

// The copula covariance used for a geometry: Jake's J, or the repaired
// envelope-level matrix J_h.
CorrelationMatrix copula_covariance(const FasGeometry& geom, double m, MatrixChoice choice);

double op_theory(const OutageQuery& q, MatrixChoice choice, double tol, std::uint64_t seed);
CdfResult op_theory_result(const OutageQuery& q, MatrixChoice choice, const MvnOptions& options,
                           std::uint64_t seed);

struct McEstimate {
  double op = 0.0;
  double std_error = 0.0;  // sqrt(op (1 - op) / K)
  std::size_t samples = 0;
};

// Event frequency of max_n |h^(n)| < outage_radius over K physical-generator
// realisations, streamed in chunks.
McEstimate op_monte_carlo(const OutageQuery& q, std::size_t n_samples, std::uint64_t seed, unsigned threads = 0);

// FAS (all ports) and TAS (port 1 alone) outage counted on the same
// realisations, so fas.op <= tas.op holds exactly.
struct SharedMcEstimate {
  McEstimate fas;
  McEstimate tas;
};
SharedMcEstimate op_monte_carlo_shared(const OutageQuery& q, std::size_t n_samples, std::uint64_t seed,
                                       unsigned threads = 0);

// Single fixed antenna: the Nakagami CDF at the outage radius.
double op_tas(const OutageQuery& q);

inline constexpr std::size_t kMinMcSamples = 10'000;
inline constexpr std::size_t kLowOpFloor = 1'000'000;
inline constexpr std::size_t kLowOpCap = 100'000'000;

// max(1e6, 100 / pilot) capped at 1e8: enough trials to see ~100 outages.
std::size_t low_op_sample_count(double pilot_op);

enum class OutageMethod { mc_fas, theory_coeff, theory_enve, tas_theory, tas_mc };

std::string_view to_string(OutageMethod m);

struct OutagePoint {
  double snr_db = 0.0;
  double op = 0.0;
  double std_error = 0.0;  // 0 for theory points
  double k_or_tol = 0.0;   // MC sample count, or the MVN tolerance
  std::uint64_t seed = 0;
};

struct OutageCurve {
  OutageMethod method = OutageMethod::mc_fas;
  std::vector<OutagePoint> points;  // sorted by snr_db
};

struct SweepOptions {
  double tol = kDefaultMvnTol;
  double rel_tol = 0.0;
  // 0 sizes each MC point with low_op_sample_count(theory_enve pilot).
  std::size_t mc_samples = 0;
  std::uint64_t seed = 1;
  unsigned threads = 0;
};

// Evaluates `method` over an SNR grid (dB) for the base query. Each point i
// draws from derive_seed(seed, i).
OutageCurve outage_curve(const OutageQuery& base, std::span<const double> snr_db, OutageMethod method,
                         const SweepOptions& options);

}  // namespace fas

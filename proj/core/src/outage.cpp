#include "fas/outage.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "fas/chan_gen.hpp"
#include "fas/error.hpp"
#include "fas/numerics.hpp"
#include "fas/parallel.hpp"
#include "fas/rng.hpp"

namespace fas {
namespace {

struct OutageCounts {
  std::size_t fas = 0;
  std::size_t tas = 0;
};

OutageCounts count_outages(const OutageQuery& q, std::size_t n_samples, std::uint64_t seed, unsigned threads) {
  q.validate();
  if (n_samples < kMinMcSamples) throw DomainError("op_monte_carlo: need at least 1e4 samples");
  const PhysicalGenerator gen(q.geom, q.params);
  const double radius = outage_radius(q);
  const std::size_t ports = gen.ports();
  const std::size_t chunks = (n_samples + kChunkSamples - 1) / kChunkSamples;
  std::vector<OutageCounts> per_chunk(chunks);
  parallel_for(chunks, threads, [&](std::size_t c) {
    const std::size_t rows = std::min(kChunkSamples, n_samples - c * kChunkSamples);
    std::vector<double> buf(rows * ports);
    gen.fill_chunk(seed, c, rows, buf);
    OutageCounts local;
    for (std::size_t s = 0; s < rows; ++s) {
      const double* row = buf.data() + s * ports;
      const double peak = *std::max_element(row, row + ports);
      local.fas += peak < radius;
      local.tas += row[0] < radius;
    }
    per_chunk[c] = local;
  });
  OutageCounts total;
  for (const auto& c : per_chunk) {
    total.fas += c.fas;
    total.tas += c.tas;
  }
  return total;
}

McEstimate make_estimate(std::size_t events, std::size_t n) {
  const double p = static_cast<double>(events) / static_cast<double>(n);
  return {p, std::sqrt(p * (1.0 - p) / static_cast<double>(n)), n};
}

}  // namespace

void OutageQuery::validate() const {
  if (!std::isfinite(snr_db) || !std::isfinite(threshold_db))
    throw DomainError("OutageQuery: SNR and threshold must be finite dB values");
  geom.validate();
  params.validate();
}

double outage_radius(const OutageQuery& q) {
  q.validate();
  return std::sqrt(db_to_linear(q.threshold_db) / db_to_linear(q.snr_db));
}

CorrelationMatrix copula_covariance(const FasGeometry& geom, double m, MatrixChoice choice) {
  CorrelationMatrix j = jakes_matrix(geom);
  if (choice == MatrixChoice::coefficient) return j;
  const CorrelationMatrix h = envelope_correlation(gain_correlation(j), m);
  return CorrelationMatrix(CorrelationLevel::envelope, psd_repair(h.matrix()));
}

CdfResult op_theory_result(const OutageQuery& q, MatrixChoice choice, const MvnOptions& options,
                           std::uint64_t seed) {
  q.validate();
  return peak_cdf_result(outage_radius(q), q.params, copula_covariance(q.geom, q.params.m, choice), options, seed);
}

double op_theory(const OutageQuery& q, MatrixChoice choice, double tol, std::uint64_t seed) {
  MvnOptions options;
  options.abs_tol = tol;
  return op_theory_result(q, choice, options, seed).value;
}

McEstimate op_monte_carlo(const OutageQuery& q, std::size_t n_samples, std::uint64_t seed, unsigned threads) {
  return make_estimate(count_outages(q, n_samples, seed, threads).fas, n_samples);
}

SharedMcEstimate op_monte_carlo_shared(const OutageQuery& q, std::size_t n_samples, std::uint64_t seed,
                                       unsigned threads) {
  const OutageCounts c = count_outages(q, n_samples, seed, threads);
  return {make_estimate(c.fas, n_samples), make_estimate(c.tas, n_samples)};
}

double op_tas(const OutageQuery& q) {
  q.validate();
  return nakagami::cdf(q.params, outage_radius(q));
}

std::size_t low_op_sample_count(double pilot_op) {
  if (!(pilot_op > 0.0)) return kLowOpCap;
  const double wanted = std::ceil(100.0 / pilot_op);
  if (wanted >= static_cast<double>(kLowOpCap)) return kLowOpCap;
  return std::max(kLowOpFloor, static_cast<std::size_t>(wanted));
}

std::string_view to_string(OutageMethod m) {
  switch (m) {
    case OutageMethod::mc_fas: return "mc_fas";
    case OutageMethod::theory_coeff: return "theory_coeff";
    case OutageMethod::theory_enve: return "theory_enve";
    case OutageMethod::tas_theory: return "tas_theory";
    case OutageMethod::tas_mc: return "tas_mc";
  }
  return "unknown";
}

OutageCurve outage_curve(const OutageQuery& base, std::span<const double> snr_db, OutageMethod method,
                         const SweepOptions& options) {
  std::vector<double> grid(snr_db.begin(), snr_db.end());
  if (!std::is_sorted(grid.begin(), grid.end())) throw DomainError("outage_curve: SNR grid must be sorted");

  OutageCurve curve;
  curve.method = method;
  curve.points.resize(grid.size());
  MvnOptions mvn;
  mvn.abs_tol = options.tol;
  mvn.rel_tol = options.rel_tol;

  auto query_at = [&](std::size_t i) {
    OutageQuery q = base;
    q.snr_db = grid[i];
    return q;
  };

  switch (method) {
    case OutageMethod::theory_coeff:
    case OutageMethod::theory_enve: {
      const MatrixChoice choice =
          method == OutageMethod::theory_coeff ? MatrixChoice::coefficient : MatrixChoice::envelope;
      parallel_for(grid.size(), options.threads, [&](std::size_t i) {
        const std::uint64_t seed = derive_seed(options.seed, i);
        const CdfResult r = op_theory_result(query_at(i), choice, mvn, seed);
        curve.points[i] = {grid[i], r.value, 0.0, options.tol, seed};
      });
      break;
    }
    case OutageMethod::tas_theory:
      for (std::size_t i = 0; i < grid.size(); ++i) curve.points[i] = {grid[i], op_tas(query_at(i)), 0.0, 0.0, 0};
      break;
    case OutageMethod::mc_fas:
    case OutageMethod::tas_mc:
      for (std::size_t i = 0; i < grid.size(); ++i) {
        const OutageQuery q = query_at(i);
        const std::uint64_t seed = derive_seed(options.seed, i);
        std::size_t k = options.mc_samples;
        if (k == 0) {
          const double pilot = method == OutageMethod::tas_mc ? op_tas(q) : op_theory_result(q, MatrixChoice::envelope, mvn, seed).value;
          k = low_op_sample_count(pilot);
        }
        const SharedMcEstimate est = op_monte_carlo_shared(q, k, seed, options.threads);
        const McEstimate& e = method == OutageMethod::mc_fas ? est.fas : est.tas;
        curve.points[i] = {grid[i], e.op, e.std_error, static_cast<double>(k), seed};
      }
      break;
  }
  return curve;
}

}  // namespace fas

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "fas/nakagami.hpp"
#include "fascop/config.hpp"
#include "json.hpp"

namespace fascop {

// Files (relative to cfg.out) written by a run, in write order, plus the
// command's JSON report (validate only; null otherwise).
struct RunResult {
  std::vector<std::string> files;
  nlohmann::json report;
};

// Runs cfg.command and writes its CSVs, the resolved config.json and
// manifest.json into cfg.out.
RunResult run(const ExperimentConfig& cfg);

// "N10_W3.5_m3_mu1"
std::string case_tag(const Case& c);

// Fit of one sample column against the Nakagami law on [0, quantile(0.9999)]:
// CDF RMSE at `points` equally spaced abscissae, and RMSE of the per-bin
// probability mass over `points` equal bins (the histogram normalised to
// probabilities). The RMSE of the bin densities is reported alongside.
struct MarginalFit {
  double cdf_rmse = 0.0;
  double pdf_rmse = 0.0;
  double pdf_density_rmse = 0.0;
};
MarginalFit marginal_fit(std::span<const double> column, const fas::NakagamiParams& p, std::size_t points = 200);

// One row per lag 1..N-1: envelope Pearson correlation between port 1 and
// port 1 + lag under the physical generator (sim) and the Gaussian copula
// with J (coeff) and repaired J_h (enve). `table_row` names the reference
// table row this lag appears under, empty for the lag-2 pair.
struct CorrRow {
  std::size_t lag = 0;
  std::string table_row;
  double sim = 0.0;
  double coeff = 0.0;
  double enve = 0.0;
};
std::vector<CorrRow> corr_table(const Case& c, std::size_t samples, std::uint64_t seed, unsigned threads);

}  // namespace fascop

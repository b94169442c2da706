#include "fas/correlation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <string>
#include <vector>

#include "fas/error.hpp"
#include "fas/numerics.hpp"

namespace fas {
namespace {

void require_level(const CorrelationMatrix& c, CorrelationLevel level, const char* op) {
  if (c.level() != level)
    throw DomainError(std::string(op) + ": expected a " + std::string(to_string(level)) +
                      "-level matrix, got " + std::string(to_string(c.level())));
}

// Pearson correlation of the columns of a K x N matrix (two-pass).
Matrix pearson(const Matrix& x) {
  const std::size_t k = x.rows();
  const std::size_t n = x.cols();
  std::vector<double> mean(n, 0.0);
  for (std::size_t r = 0; r < k; ++r) {
    auto row = x.row(r);
    for (std::size_t c = 0; c < n; ++c) mean[c] += row[c];
  }
  for (double& v : mean) v /= static_cast<double>(k);

  Matrix cov(n, n);
  std::vector<double> centered(n);
  for (std::size_t r = 0; r < k; ++r) {
    auto row = x.row(r);
    for (std::size_t c = 0; c < n; ++c) centered[c] = row[c] - mean[c];
    for (std::size_t i = 0; i < n; ++i) {
      const double ci = centered[i];
      for (std::size_t j = i; j < n; ++j) cov(i, j) += ci * centered[j];
    }
  }
  for (std::size_t i = 0; i < n; ++i)
    // A constant column can leave rounding residue of order eps * |mean|.
    if (!(cov(i, i) > static_cast<double>(k) * std::pow(64.0 * std::numeric_limits<double>::epsilon() * mean[i], 2)))
      throw NumericalError("correlation: degenerate (constant) column " + std::to_string(i));

  Matrix out(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    out(i, i) = 1.0;
    for (std::size_t j = i + 1; j < n; ++j) {
      const double v = std::clamp(cov(i, j) / std::sqrt(cov(i, i) * cov(j, j)), -1.0, 1.0);
      out(i, j) = v;
      out(j, i) = v;
    }
  }
  return out;
}

void require_samples(const Matrix& samples, std::size_t min_ports, const char* op) {
  if (samples.rows() < kMinCorrelationSamples)
    throw DomainError(std::string(op) + ": need at least 100 samples");
  if (samples.cols() < min_ports) throw DomainError(std::string(op) + ": too few ports");
}

}  // namespace

void FasGeometry::validate() const {
  if (n_ports < 1) throw DomainError("FasGeometry: n_ports must be >= 1");
  if (!std::isfinite(aperture) || aperture < 0.0) throw DomainError("FasGeometry: aperture must be finite and >= 0");
}

std::string_view to_string(CorrelationLevel level) {
  switch (level) {
    case CorrelationLevel::coefficient: return "coefficient";
    case CorrelationLevel::gain: return "gain";
    case CorrelationLevel::envelope: return "envelope";
    case CorrelationLevel::normal_scores: return "normal_scores";
  }
  return "unknown";
}

CorrelationMatrix::CorrelationMatrix(CorrelationLevel level, Matrix entries)
    : level_(level), entries_(std::move(entries)) {
  if (!entries_.square()) throw DomainError("CorrelationMatrix: matrix is not square");
  if (max_asymmetry(entries_) > 1e-12) throw DomainError("CorrelationMatrix: matrix is not symmetric");
  for (std::size_t i = 0; i < entries_.rows(); ++i) {
    if (std::abs(entries_(i, i) - 1.0) > 1e-9) throw DomainError("CorrelationMatrix: diagonal must be 1");
    entries_(i, i) = 1.0;
  }
  for (double v : entries_.data())
    if (!(v >= -1.0 && v <= 1.0)) throw DomainError("CorrelationMatrix: entries must lie in [-1, 1]");
}

CorrelationMatrix CorrelationMatrix::identity(std::size_t n, CorrelationLevel level) {
  return CorrelationMatrix(level, Matrix::identity(n));
}

CorrelationMatrix jakes_matrix(const FasGeometry& geom) {
  geom.validate();
  const std::size_t n = geom.n_ports;
  if (n == 1) return CorrelationMatrix::identity(1);

  // Toeplitz: one Bessel evaluation per lag.
  std::vector<double> by_lag(n);
  const double step = 2.0 * std::numbers::pi * geom.aperture / static_cast<double>(n - 1);
  for (std::size_t lag = 0; lag < n; ++lag) by_lag[lag] = bessel_j0(step * static_cast<double>(lag));
  by_lag[0] = 1.0;

  Matrix j(n, n);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < n; ++c) j(r, c) = by_lag[r > c ? r - c : c - r];
  return CorrelationMatrix(CorrelationLevel::coefficient, std::move(j));
}

CorrelationMatrix gain_correlation(const CorrelationMatrix& coefficient) {
  require_level(coefficient, CorrelationLevel::coefficient, "gain_correlation");
  Matrix g = coefficient.matrix();
  for (double& v : g.data()) v *= v;
  return CorrelationMatrix(CorrelationLevel::gain, std::move(g));
}

CorrelationMatrix envelope_correlation(const CorrelationMatrix& gain, double m) {
  require_level(gain, CorrelationLevel::gain, "envelope_correlation");
  const double denom = psi_ratio(m) - 1.0;
  Matrix h = gain.matrix();
  const std::size_t n = h.rows();
  for (std::size_t i = 0; i < n; ++i) {
    h(i, i) = 1.0;
    for (std::size_t j = i + 1; j < n; ++j) {
      const double v = std::clamp((gauss_2f1_symmetric(m, h(i, j)) - 1.0) / denom, 0.0, 1.0);
      h(i, j) = v;
      h(j, i) = v;
    }
  }
  return CorrelationMatrix(CorrelationLevel::envelope, std::move(h));
}

CorrelationMatrix normal_scores_correlation(const Matrix& samples) {
  require_samples(samples, 2, "normal_scores_correlation");
  const std::size_t k = samples.rows();
  const std::size_t n = samples.cols();
  Matrix scores(k, n);
  std::vector<std::size_t> order(k);
  for (std::size_t c = 0; c < n; ++c) {
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return samples(a, c) < samples(b, c); });
    if (samples(order.front(), c) == samples(order.back(), c))
      throw NumericalError("normal_scores_correlation: degenerate (constant) column " + std::to_string(c));
    const double denom = static_cast<double>(k) + 1.0;
    for (std::size_t lo = 0; lo < k;) {
      std::size_t hi = lo + 1;
      while (hi < k && samples(order[hi], c) == samples(order[lo], c)) ++hi;
      // Ranks are 1-based; ties share the mean of their ranks.
      const double avg_rank = 0.5 * static_cast<double>(lo + 1 + hi);
      const double score = std_normal_quantile(avg_rank / denom);
      for (std::size_t t = lo; t < hi; ++t) scores(order[t], c) = score;
      lo = hi;
    }
  }
  return CorrelationMatrix(CorrelationLevel::normal_scores, psd_repair(pearson(scores)));
}

CorrelationMatrix empirical_pearson(const Matrix& samples, PearsonTransform transform) {
  require_samples(samples, 1, "empirical_pearson");
  if (transform == PearsonTransform::envelope) return CorrelationMatrix(CorrelationLevel::envelope, pearson(samples));
  Matrix squared = samples;
  for (double& v : squared.data()) v *= v;
  return CorrelationMatrix(CorrelationLevel::gain, pearson(squared));
}

}  // namespace fas

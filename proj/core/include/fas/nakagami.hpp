#pragma once

namespace fas {

// Nakagami-m envelope law: shape m >= 1/2 (fading severity) and scale mu > 0
// (mean power E[r^2]).
struct NakagamiParams {
  double m = 3.0;
  double mu = 1.0;

  void validate() const;
};

namespace nakagami {

// 2 m^m / (Gamma(m) mu^m) r^{2m-1} exp(-m r^2 / mu)
double pdf(const NakagamiParams& p, double r);

// P(m, m r^2 / mu)
double cdf(const NakagamiParams& p, double r);

// Inverse of cdf on [0, 1); quantile(p, 0) == 0.
double quantile(const NakagamiParams& p, double u);

}  // namespace nakagami

// Caches the shape-dependent constants so the quantile can sit in a
// sampling inner loop.
class NakagamiDistribution {
 public:
  explicit NakagamiDistribution(const NakagamiParams& p);

  const NakagamiParams& params() const { return params_; }

  double pdf(double r) const;
  double cdf(double r) const;
  double quantile(double u) const;

 private:
  // Regularized lower incomplete gamma with the cached log Gamma(m).
  double lower_gamma(double y) const;
  double gamma_density(double y) const;

  NakagamiParams params_;
  double log_gamma_m_;
  double log_pdf_const_;
};

}  // namespace fas

#include "fas/nakagami.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "fas/error.hpp"
#include "fas/numerics.hpp"

namespace fas {

void NakagamiParams::validate() const {
  if (!(m >= 0.5) || !std::isfinite(m)) throw DomainError("NakagamiParams: m must be finite and >= 0.5");
  if (!(mu > 0.0) || !std::isfinite(mu)) throw DomainError("NakagamiParams: mu must be finite and > 0");
}

NakagamiDistribution::NakagamiDistribution(const NakagamiParams& p) : params_(p) {
  params_.validate();
  log_gamma_m_ = std::lgamma(p.m);
  log_pdf_const_ = std::log(2.0) + p.m * std::log(p.m) - log_gamma_m_ - p.m * std::log(p.mu);
}

double NakagamiDistribution::lower_gamma(double y) const {
  if (y <= 0.0) return 0.0;
  const double m = params_.m;
  const double log_prefix = -y + m * std::log(y) - log_gamma_m_;
  if (y < m + 1.0) {
    double ap = m;
    double del = 1.0 / m;
    double sum = del;
    for (int i = 0; i < 100000; ++i) {
      ap += 1.0;
      del *= y / ap;
      sum += del;
      if (std::abs(del) < std::abs(sum) * 1e-17) break;
    }
    return std::min(1.0, sum * std::exp(log_prefix));
  }
  return regularized_lower_gamma(m, y);
}

double NakagamiDistribution::gamma_density(double y) const {
  return std::exp((params_.m - 1.0) * std::log(y) - y - log_gamma_m_);
}

double NakagamiDistribution::pdf(double r) const {
  if (!(r >= 0.0)) throw DomainError("nakagami::pdf: r must be >= 0");
  if (std::isinf(r)) return 0.0;
  const double m = params_.m;
  if (r == 0.0) return m == 0.5 ? std::exp(log_pdf_const_) : 0.0;
  return std::exp(log_pdf_const_ + (2.0 * m - 1.0) * std::log(r) - m * r * r / params_.mu);
}

double NakagamiDistribution::cdf(double r) const {
  if (!(r >= 0.0)) throw DomainError("nakagami::cdf: r must be >= 0");
  if (std::isinf(r)) return 1.0;
  return lower_gamma(params_.m * r * r / params_.mu);
}

double NakagamiDistribution::quantile(double u) const {
  if (!(u >= 0.0 && u < 1.0)) throw DomainError("nakagami::quantile: u must lie in [0, 1)");
  if (u == 0.0) return 0.0;
  const double m = params_.m;

  // Solve P(m, y) = u for y = m r^2 / mu, then map back.
  double y;
  const double small_u_guess = std::pow(u * std::exp(std::lgamma(m + 1.0)), 1.0 / m);
  if (u < 0.05) {
    y = small_u_guess;
  } else {
    const double z = std_normal_quantile(u);
    const double c = 1.0 - 1.0 / (9.0 * m) + z / (3.0 * std::sqrt(m));
    y = c > 0.0 ? m * c * c * c : small_u_guess;
  }

  double lo = 0.0;
  double hi = std::max(2.0 * y, 1.0);
  while (lower_gamma(hi) < u) {
    lo = hi;
    hi *= 2.0;
  }
  y = std::clamp(y, lo, hi);

  for (int it = 0; it < 200; ++it) {
    const double f = lower_gamma(y) - u;
    if (f == 0.0) break;
    if (f < 0.0) lo = y; else hi = y;
    const double d = gamma_density(y);
    double next;
    if (d > 0.0 && std::isfinite(d)) {
      // Halley: the density's log-derivative is (m - 1) / y - 1.
      const double newton = f / d;
      const double curv = (m - 1.0) / y - 1.0;
      const double denom = 1.0 - 0.5 * newton * curv;
      next = y - (denom > 0.5 ? newton / denom : newton);
    } else {
      next = 0.5 * (lo + hi);
    }
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    const double step = std::abs(next - y);
    y = next;
    if (step <= 4.0 * std::numeric_limits<double>::epsilon() * y) break;
    if (hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * hi) break;
  }
  return std::sqrt(params_.mu * y / m);
}

namespace nakagami {

double pdf(const NakagamiParams& p, double r) { return NakagamiDistribution(p).pdf(r); }
double cdf(const NakagamiParams& p, double r) { return NakagamiDistribution(p).cdf(r); }
double quantile(const NakagamiParams& p, double u) { return NakagamiDistribution(p).quantile(u); }

}  // namespace nakagami
}  // namespace fas

#pragma once

// Reference computations for the test suites. Each one takes a route that
// does not share code with the library path it checks: quadrature instead of
// series, bisection instead of Halley, closed forms where they exist.

#include <cmath>
#include <functional>
#include <numbers>
#include <vector>

namespace fas::oracle {

// J0(x) = (1/pi) int_0^pi cos(x sin t) dt. The integrand is smooth and
// periodic, so the trapezoid rule converges geometrically.
inline double bessel_j0(double x, int nodes = 4000) {
  long double sum = 0.0L;
  const long double h = std::numbers::pi_v<long double> / nodes;
  for (int i = 0; i <= nodes; ++i) {
    const long double w = (i == 0 || i == nodes) ? 0.5L : 1.0L;
    sum += w * std::cos(static_cast<long double>(x) * std::sin(h * i));
  }
  return static_cast<double>(sum * h / std::numbers::pi_v<long double>);
}

// Ascending power series sum (-x^2/4)^k / (k!)^2, long double.
inline double bessel_j0_series(double x) {
  long double term = 1.0L, sum = 1.0L;
  const long double q = -0.25L * x * x;
  for (int k = 1; k < 300; ++k) {
    term *= q / (static_cast<long double>(k) * k);
    sum += term;
  }
  return static_cast<double>(sum);
}

// Root of a monotone function on [lo, hi] by bisection.
inline double bisect(const std::function<double(double)>& f, double lo, double hi, int iters = 200) {
  double flo = f(lo);
  for (int i = 0; i < iters; ++i) {
    const double mid = 0.5 * (lo + hi);
    const double fm = f(mid);
    if ((fm < 0.0) == (flo < 0.0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

inline double normal_pdf(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi); }

inline double erf_inv(double p) {
  return bisect([p](double x) { return std::erf(x) - p; }, -7.0, 7.0);
}

inline double normal_quantile(double u) {
  return bisect([u](double x) { return normal_cdf(x) - u; }, -40.0, 40.0);
}

// P(m, x) for integer m: 1 - e^{-x} sum_{k<m} x^k / k!.
inline double lower_gamma_integer(int m, double x) {
  double term = 1.0, sum = 1.0;
  for (int k = 1; k < m; ++k) {
    term *= x / k;
    sum += term;
  }
  return 1.0 - std::exp(-x) * sum;
}

// 2F1(-1/2, -1/2; c; x) by brute-force term summation.
inline double hyp2f1_series(double c, double x, int terms) {
  long double term = 1.0L, sum = 1.0L;
  for (int k = 0; k < terms; ++k) {
    const long double a = k - 0.5L;
    term *= a * a / ((c + k) * (k + 1.0L)) * x;
    sum += term;
  }
  return static_cast<double>(sum);
}

// P(X1 <= 0, X2 <= 0) for a standard bivariate normal with correlation rho.
inline double bivariate_orthant(double rho) { return 0.25 + std::asin(rho) / (2.0 * std::numbers::pi); }

// Nakagami CDF by Simpson quadrature of the density on [0, r].
inline double nakagami_cdf_quadrature(double m, double mu, double r, int intervals = 4000) {
  auto pdf = [&](double x) {
    if (x == 0.0) return m == 0.5 ? 2.0 * std::pow(m / mu, m) / std::tgamma(m) : 0.0;
    return 2.0 * std::pow(m, m) / (std::tgamma(m) * std::pow(mu, m)) * std::pow(x, 2 * m - 1) *
           std::exp(-m * x * x / mu);
  };
  const double h = r / intervals;
  double s = pdf(0.0) + pdf(r);
  for (int i = 1; i < intervals; ++i) s += (i % 2 ? 4.0 : 2.0) * pdf(i * h);
  return s * h / 3.0;
}

// Joint CDF P(R1 <= r, R2 <= r) of two Nakagami(m, mu) envelopes coupled by
// a Gaussian copula with correlation rho, as a midpoint tensor-grid
// integral of the copula density times the marginal densities over [0, r]^2.
inline double copula_peak_cdf_2d(double m, double mu, double rho, double r, int nodes = 1200) {
  const double h = r / nodes;
  std::vector<double> z(nodes), f(nodes);
  for (int i = 0; i < nodes; ++i) {
    const double x = (i + 0.5) * h;
    const double cdf = nakagami_cdf_quadrature(m, mu, x, 400);
    z[i] = normal_quantile(std::min(std::max(cdf, 1e-300), 1.0 - 1e-16));
    f[i] = 2.0 * std::pow(m, m) / (std::tgamma(m) * std::pow(mu, m)) * std::pow(x, 2 * m - 1) *
           std::exp(-m * x * x / mu);
  }
  const double one_minus = 1.0 - rho * rho;
  const double norm = 1.0 / std::sqrt(one_minus);
  long double total = 0.0L;
  for (int i = 0; i < nodes; ++i) {
    for (int j = 0; j < nodes; ++j) {
      const double a = z[i], b = z[j];
      const double expo = -(rho * rho * (a * a + b * b) - 2.0 * rho * a * b) / (2.0 * one_minus);
      total += norm * std::exp(expo) * f[i] * f[j];
    }
  }
  return static_cast<double>(total) * h * h;
}

}  // namespace fas::oracle

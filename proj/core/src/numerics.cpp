#include "fas/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <string>

#include "fas/error.hpp"

namespace fas {
namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kSqrt2 = std::numbers::sqrt2;
constexpr double kTwoOverSqrtPi = 2.0 * std::numbers::inv_sqrtpi;

void require_finite(double x, const char* what) {
  if (!std::isfinite(x)) throw DomainError(std::string(what) + ": non-finite argument");
}

// Ascending series sum_k (-x^2/4)^k / (k!)^2. Extended precision keeps the
// cancellation error near 1e-15 up to the switchover.
double j0_series(double x) {
  const long double q = -0.25L * static_cast<long double>(x) * x;
  long double term = 1.0L;
  long double sum = 1.0L;
  for (int k = 1; k < 200; ++k) {
    term *= q / (static_cast<long double>(k) * k);
    sum += term;
    if (std::fabs(term) < 1e-22L * (1.0L + std::fabs(sum)) && k > static_cast<int>(x)) break;
  }
  return static_cast<double>(sum);
}

// Hankel asymptotic expansion; x >= the switchover so the divergent series
// is truncated well before its smallest term.
double j0_hankel(double x) {
  double p = 0.0;
  double q = 0.0;
  double b = 1.0;  // prod_{j<=k} (2j-1)^2 / (k! (8x)^k)
  double prev = std::numeric_limits<double>::infinity();
  for (int k = 0; k < 60; ++k) {
    if (k > 0) {
      const double odd = 2.0 * k - 1.0;
      b *= odd * odd / (k * 8.0 * x);
    }
    if (b > prev) break;
    prev = b;
    switch (k % 4) {
      case 0: p += b; break;
      case 1: q -= b; break;
      case 2: p -= b; break;
      case 3: q += b; break;
    }
    if (b < 1e-17) break;
  }
  // chi = x - pi/4 expanded so that x itself is never shifted.
  const double c = std::cos(x);
  const double s = std::sin(x);
  const double cos_chi = (c + s) / kSqrt2;
  const double sin_chi = (s - c) / kSqrt2;
  return std::sqrt(2.0 / (kPi * x)) * (p * cos_chi - q * sin_chi);
}

constexpr double kJ0Switchover = 17.0;

// Single-precision rational/polynomial initial guess for erf_inv(p),
// with w = -log((1-p)(1+p)) supplied by the caller to keep tails accurate.
double erf_inv_guess(double p, double w) {
  double r;
  if (w < 5.0) {
    w -= 2.5;
    r = 2.81022636e-08;
    r = 3.43273939e-07 + r * w;
    r = -3.5233877e-06 + r * w;
    r = -4.39150654e-06 + r * w;
    r = 0.00021858087 + r * w;
    r = -0.00125372503 + r * w;
    r = -0.00417768164 + r * w;
    r = 0.246640727 + r * w;
    r = 1.50140941 + r * w;
  } else if (w < 80.0) {
    w = std::sqrt(w) - 3.0;
    r = -0.000200214257;
    r = 0.000100950558 + r * w;
    r = 0.00134934322 + r * w;
    r = -0.00367342844 + r * w;
    r = 0.00573950773 + r * w;
    r = -0.0076224613 + r * w;
    r = 0.00943887047 + r * w;
    r = 1.00167406 + r * w;
    r = 2.83297682 + r * w;
  } else {
    // erfc(x) ~ exp(-x^2) / (x sqrt(pi)) far in the tail.
    const double x = std::sqrt(0.5 * w);
    return std::copysign(std::sqrt(std::max(0.0, 0.5 * w - std::log(x * std::sqrt(kPi)))), p);
  }
  return r * p;
}

// Halley's method for f(x) = g(x) - target where g' = +-(2/sqrt(pi)) e^{-x^2}
// and g'' = -2x g'; the step reduces to f / (g' + x f).
template <class Residual, class Derivative>
double halley_refine(double x, Residual residual, Derivative derivative) {
  for (int it = 0; it < 12; ++it) {
    const double f = residual(x);
    const double d = derivative(x);
    if (d == 0.0) break;
    const double step = f / (d + x * f);
    x -= step;
    if (it >= 1 && std::abs(step) <= 4.0 * std::numeric_limits<double>::epsilon() * std::abs(x))
      break;
  }
  return x;
}

// Inverse of erfc on (0, 1]; result >= 0.
double erfc_inv_upper(double q) {
  if (q == 1.0) return 0.0;
  const double w = -std::log(q * (2.0 - q));
  const double guess = erf_inv_guess(1.0 - q, w);
  return halley_refine(
      guess, [q](double x) { return std::erfc(x) - q; },
      [](double x) { return -kTwoOverSqrtPi * std::exp(-x * x); });
}

// Continued fraction for Q(m, x), valid for x >= m + 1 (modified Lentz).
double upper_gamma_cf(double m, double x) {
  constexpr double kTiny = 1e-300;
  double b = x + 1.0 - m;
  double c = 1.0 / kTiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < 100000; ++i) {
    const double an = -i * (i - m);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < kTiny) d = kTiny;
    c = b + an / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < 1e-16) break;
  }
  return std::exp(-x + m * std::log(x) - std::lgamma(m)) * h;
}

// Power series for P(m, x), valid for x < m + 1.
double lower_gamma_series(double m, double x) {
  double ap = m;
  double del = 1.0 / m;
  double sum = del;
  for (int n = 0; n < 100000; ++n) {
    ap += 1.0;
    del *= x / ap;
    sum += del;
    if (std::abs(del) < std::abs(sum) * 1e-17) break;
  }
  return sum * std::exp(-x + m * std::log(x) - std::lgamma(m));
}

void check_gamma_args(double m, double x) {
  if (!(m > 0.0) || std::isinf(m)) throw DomainError("incomplete gamma: shape must be finite and > 0");
  if (!(x >= 0.0)) throw DomainError("incomplete gamma: x must be >= 0");
}

}  // namespace

RealGrid::RealGrid(std::vector<double> points) : points_(std::move(points)) {
  for (std::size_t i = 0; i < points_.size(); ++i) {
    if (!std::isfinite(points_[i])) throw DomainError("RealGrid: non-finite point");
    if (i > 0 && !(points_[i] > points_[i - 1]))
      throw DomainError("RealGrid: points must be strictly increasing");
  }
}

RealGrid RealGrid::linspace(double lo, double hi, std::size_t n) {
  if (n < 2 || !(hi > lo)) throw DomainError("RealGrid::linspace: need n >= 2 and hi > lo");
  std::vector<double> pts(n);
  const double step = (hi - lo) / static_cast<double>(n - 1);
  for (std::size_t i = 0; i < n; ++i) pts[i] = lo + step * static_cast<double>(i);
  pts.back() = hi;
  return RealGrid(std::move(pts));
}

double bessel_j0(double x) {
  require_finite(x, "bessel_j0");
  const double ax = std::abs(x);
  return ax <= kJ0Switchover ? j0_series(ax) : j0_hankel(ax);
}

double erf_inv(double p) {
  if (!(std::abs(p) < 1.0)) throw DomainError("erf_inv: |p| must be < 1");
  if (p == 0.0) return 0.0;
  if (std::abs(p) > 0.5) return std::copysign(erfc_inv_upper(1.0 - std::abs(p)), p);
  const double w = -std::log((1.0 - p) * (1.0 + p));
  return halley_refine(
      erf_inv_guess(p, w), [p](double x) { return std::erf(x) - p; },
      [](double x) { return kTwoOverSqrtPi * std::exp(-x * x); });
}

double std_normal_cdf(double x) { return 0.5 * std::erfc(-x / kSqrt2); }

double std_normal_quantile(double u) {
  if (!(u > 0.0 && u < 1.0)) throw DomainError("std_normal_quantile: u must lie in (0, 1)");
  if (u == 0.5) return 0.0;
  if (u < 0.5) return -kSqrt2 * erfc_inv_upper(2.0 * u);
  return kSqrt2 * erfc_inv_upper(2.0 * (1.0 - u));
}

double regularized_lower_gamma(double m, double x) {
  check_gamma_args(m, x);
  if (x == 0.0) return 0.0;
  if (std::isinf(x)) return 1.0;
  if (x < m + 1.0) return std::min(1.0, lower_gamma_series(m, x));
  return std::clamp(1.0 - upper_gamma_cf(m, x), 0.0, 1.0);
}

double regularized_upper_gamma(double m, double x) {
  check_gamma_args(m, x);
  if (x == 0.0) return 1.0;
  if (std::isinf(x)) return 0.0;
  if (x < m + 1.0) return std::clamp(1.0 - lower_gamma_series(m, x), 0.0, 1.0);
  return std::min(1.0, upper_gamma_cf(m, x));
}

double psi_ratio(double m) {
  if (!(m >= 0.5) || std::isinf(m)) throw DomainError("psi_ratio: m must be finite and >= 0.5");
  if (m < 150.0) {
    const double g = std::tgamma(m + 0.5);
    return (std::tgamma(m) / g) * (std::tgamma(m + 1.0) / g);
  }
  return std::exp(std::lgamma(m) + std::lgamma(m + 1.0) - 2.0 * std::lgamma(m + 0.5));
}

double gauss_2f1_symmetric(double m, double x) {
  if (!(m >= 0.5) || std::isinf(m)) throw DomainError("gauss_2f1_symmetric: m must be finite and >= 0.5");
  if (!(x >= 0.0 && x <= 1.0)) throw DomainError("gauss_2f1_symmetric: x must lie in [0, 1]");
  if (x == 0.0) return 1.0;
  if (x == 1.0) return psi_ratio(m);
  // Every term past the first is positive and the term ratio is bounded by
  // x, so t_k * x / (1 - x) bounds the remaining tail.
  const double tail_factor = x / (1.0 - x);
  double term = 1.0;
  double sum = 1.0;
  constexpr long kMaxTerms = 1'000'000;
  for (long k = 0; k < kMaxTerms; ++k) {
    const double a = static_cast<double>(k) - 0.5;
    term *= a * a / ((m + static_cast<double>(k)) * (static_cast<double>(k) + 1.0)) * x;
    sum += term;
    if (term * tail_factor < 1e-16 * sum) break;
  }
  return sum;
}

EigenDecomposition sym_eigen(const Matrix& m) {
  if (!m.square()) throw DomainError("sym_eigen: matrix is not square");
  if (max_asymmetry(m) > 1e-12) throw DomainError("sym_eigen: matrix is not symmetric");
  const std::size_t n = m.rows();
  for (double v : m.data()) require_finite(v, "sym_eigen");

  Matrix a = m;
  Matrix v = Matrix::identity(n);
  auto off_norm = [&] {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) s += a(i, j) * a(i, j);
    return std::sqrt(2.0 * s);
  };

  bool converged = n < 2;
  for (int sweep = 0; sweep < 100 && !converged; ++sweep) {
    if (off_norm() < 1e-13) {
      converged = true;
      break;
    }
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = std::copysign(1.0, theta) / (std::abs(theta) + std::hypot(theta, 1.0));
        const double c = 1.0 / std::hypot(t, 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a(k, p);
          const double akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a(p, k);
          const double aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        a(p, q) = 0.0;
        a(q, p) = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = v(k, p);
          const double vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }
  if (!converged && off_norm() >= 1e-13) throw NumericalError("sym_eigen: Jacobi sweeps did not converge");

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return a(i, i) > a(j, j); });

  EigenDecomposition out;
  out.eigenvalues.resize(n);
  out.eigenvectors = Matrix(n, n);
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t src = order[k];
    out.eigenvalues[k] = a(src, src);
    // Sign convention: the first non-negligible component is positive.
    double sign = 1.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (std::abs(v(i, src)) > 1e-12) {
        sign = v(i, src) < 0.0 ? -1.0 : 1.0;
        break;
      }
    }
    for (std::size_t i = 0; i < n; ++i) out.eigenvectors(i, k) = sign * v(i, src);
  }
  return out;
}

Matrix psd_repair(const Matrix& m, double floor) {
  if (!(floor >= 0.0) || std::isinf(floor)) throw DomainError("psd_repair: floor must be finite and >= 0");
  if (!m.square()) throw DomainError("psd_repair: matrix is not square");
  for (std::size_t i = 0; i < m.rows(); ++i)
    if (std::abs(m(i, i) - 1.0) > 1e-9) throw DomainError("psd_repair: diagonal must be 1");

  const auto eig = sym_eigen(m);
  if (eig.eigenvalues.empty() || eig.eigenvalues.back() >= floor) return m;

  const std::size_t n = m.rows();
  // Rescaling to a unit diagonal can pull the clipped eigenvalues slightly
  // under the floor, so the clip level is raised until the result clears it.
  double clip = floor;
  for (int attempt = 0; attempt < 60; ++attempt, clip = clip > 0.0 ? 2.0 * clip : 1e-300) {
    Matrix out(n, n);
    for (std::size_t k = 0; k < n; ++k) {
      const double lambda = std::max(eig.eigenvalues[k], clip);
      for (std::size_t i = 0; i < n; ++i) {
        const double ui = eig.eigenvectors(i, k) * lambda;
        for (std::size_t j = 0; j < n; ++j) out(i, j) += ui * eig.eigenvectors(j, k);
      }
    }
    std::vector<double> scale(n);
    for (std::size_t i = 0; i < n; ++i) scale[i] = 1.0 / std::sqrt(out(i, i));
    for (std::size_t i = 0; i < n; ++i) {
      out(i, i) = 1.0;
      for (std::size_t j = i + 1; j < n; ++j) {
        const double v = std::clamp(0.5 * (out(i, j) + out(j, i)) * scale[i] * scale[j], -1.0, 1.0);
        out(i, j) = v;
        out(j, i) = v;
      }
    }
    if (sym_eigen(out).eigenvalues.back() >= floor) return out;
  }
  throw NumericalError("psd_repair: could not lift eigenvalues to the floor");
}

Matrix cholesky(const Matrix& m) {
  if (!m.square()) throw DomainError("cholesky: matrix is not square");
  const std::size_t n = m.rows();
  Matrix l(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    double d = m(j, j);
    for (std::size_t k = 0; k < j; ++k) d -= l(j, k) * l(j, k);
    if (!(d > 0.0)) throw NumericalError("cholesky: matrix is not positive definite");
    const double ljj = std::sqrt(d);
    l(j, j) = ljj;
    for (std::size_t i = j + 1; i < n; ++i) {
      double s = m(i, j);
      for (std::size_t k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
      l(i, j) = s / ljj;
    }
  }
  return l;
}

}  // namespace fas

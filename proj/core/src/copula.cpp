#include "fas/copula.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <utility>
#include <vector>

#include "fas/chan_gen.hpp"
#include "fas/error.hpp"
#include "fas/numerics.hpp"
#include "fas/rng.hpp"

namespace fas {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
// Conditional variances below this are treated as exactly zero: the
// variable is then a deterministic combination of the earlier ones.
constexpr double kSingularVariance = 1e-14;

// Extensible rank-1 lattice in base 2: point k is frac(phi_2(k) z), with
// phi_2 the radical inverse, so every power-of-two prefix is a full lattice
// rule and doubling the point count keeps the earlier points. z is a
// Korobov vector (1, a, a^2, ...) mod 2^20; a was picked by minimising a
// weighted P_2 criterion over 8..20 bits with weights 1/j^2.
constexpr unsigned kLatticeBits = 20;
constexpr std::uint64_t kLatticeSize = std::uint64_t{1} << kLatticeBits;
constexpr std::uint64_t kKorobovMultiplier = 999957;

std::vector<std::uint64_t> korobov_vector(std::size_t dims) {
  std::vector<std::uint64_t> z(dims);
  std::uint64_t v = 1;
  for (auto& zj : z) {
    zj = v;
    v = (v * kKorobovMultiplier) % kLatticeSize;
  }
  return z;
}

std::uint64_t radical_inverse_bits(std::uint64_t k) {
  std::uint64_t r = 0;
  for (unsigned b = 0; b < kLatticeBits; ++b, k >>= 1) r = (r << 1) | (k & 1);
  return r;
}

double std_normal_pdf(double x) { return std::exp(-0.5 * x * x) * (0.5 * std::numbers::inv_sqrtpi * std::numbers::sqrt2); }

// Cholesky factor of a permuted covariance, built column by column while
// choosing the next variable as the one with the smallest conditional
// probability given the truncated means of the variables already placed.
struct OrderedFactor {
  Matrix lower;                // n x n, lower triangular; zero diagonal marks a singular pivot
  std::vector<double> limits;  // permuted upper limits
};

OrderedFactor reorder_and_factor(Matrix cov, std::vector<double> b) {
  const std::size_t n = b.size();
  Matrix l(n, n);
  std::vector<double> y_mean(n, 0.0);

  auto swap_vars = [&](std::size_t i, std::size_t k) {
    if (i == k) return;
    std::swap(b[i], b[k]);
    for (std::size_t c = 0; c < n; ++c) std::swap(cov(i, c), cov(k, c));
    for (std::size_t r = 0; r < n; ++r) std::swap(cov(r, i), cov(r, k));
    for (std::size_t c = 0; c < i; ++c) std::swap(l(i, c), l(k, c));
  };

  for (std::size_t i = 0; i < n; ++i) {
    std::size_t best = i;
    double best_prob = kInf;
    for (std::size_t k = i; k < n; ++k) {
      double var = cov(k, k);
      double mean = 0.0;
      for (std::size_t j = 0; j < i; ++j) {
        var -= l(k, j) * l(k, j);
        mean += l(k, j) * y_mean[j];
      }
      double prob;
      if (var > kSingularVariance) prob = std_normal_cdf((b[k] - mean) / std::sqrt(var));
      else prob = mean <= b[k] ? 1.0 : 0.0;
      if (prob < best_prob) {
        best_prob = prob;
        best = k;
      }
    }
    swap_vars(i, best);

    double var = cov(i, i);
    double mean = 0.0;
    for (std::size_t j = 0; j < i; ++j) {
      var -= l(i, j) * l(i, j);
      mean += l(i, j) * y_mean[j];
    }
    if (var > kSingularVariance) {
      const double sd = std::sqrt(var);
      l(i, i) = sd;
      for (std::size_t k = i + 1; k < n; ++k) {
        double s = cov(k, i);
        for (std::size_t j = 0; j < i; ++j) s -= l(k, j) * l(i, j);
        l(k, i) = s / sd;
      }
      // Mean of a standard normal truncated to (-inf, a].
      const double a = (b[i] - mean) / sd;
      const double mass = std_normal_cdf(a);
      y_mean[i] = mass > 1e-300 ? -std_normal_pdf(a) / mass : a;
    } else {
      l(i, i) = 0.0;
      y_mean[i] = 0.0;
    }
  }
  return {std::move(l), std::move(b)};
}

class GenzIntegrand {
 public:
  GenzIntegrand(const Matrix& lower, const std::vector<double>& limits)
      : l_(lower), b_(limits), y_(limits.size()) {}

  std::size_t dims() const { return b_.size(); }

  // w has dims() - 1 coordinates in [0, 1].
  double operator()(const double* w) {
    const std::size_t n = b_.size();
    double prod = 1.0;
    for (std::size_t i = 0; i < n; ++i) {
      double t = 0.0;
      for (std::size_t j = 0; j < i; ++j) t += l_(i, j) * y_[j];
      const double sd = l_(i, i);
      double e;
      if (sd > 0.0) e = std_normal_cdf((b_[i] - t) / sd);
      else e = t <= b_[i] ? 1.0 : 0.0;
      prod *= e;
      if (prod == 0.0) return 0.0;
      if (i + 1 < n) {
        if (sd > 0.0) {
          const double u = std::clamp(w[i] * e, std::numeric_limits<double>::min(), kCdfClampHi);
          y_[i] = std_normal_quantile(u);
        } else {
          y_[i] = 0.0;
        }
      }
    }
    return prod;
  }

 private:
  const Matrix& l_;
  const std::vector<double>& b_;
  std::vector<double> y_;
};

void check_options(const MvnOptions& o) {
  if (!(o.abs_tol > 0.0 && o.abs_tol <= 0.1)) throw DomainError("mvn_cdf: tol must lie in (0, 0.1]");
  if (!(o.rel_tol >= 0.0)) throw DomainError("mvn_cdf: rel_tol must be >= 0");
  if (o.shifts < 2) throw DomainError("mvn_cdf: need at least 2 random shifts");
  if (o.max_evaluations < 1) throw DomainError("mvn_cdf: evaluation budget must be positive");
}

// Randomly shifted lattice estimate of the integral of f over [0, 1]^dims,
// doubling the points per shift until the 3-sigma spread across shifts
// meets the tolerance or the budget is spent. The value is clamped to
// [0, 1] when `probability` is set.
template <class F>
CdfResult lattice_integrate(std::size_t dims, const MvnOptions& options, std::uint64_t seed, F&& f,
                            bool probability = true) {
  const std::size_t shifts = static_cast<std::size_t>(options.shifts);
  const std::vector<std::uint64_t> z = korobov_vector(dims);

  Xoshiro256 engine(seed);
  std::vector<double> shift(shifts * dims);
  for (double& s : shift) s = engine.uniform();

  std::vector<double> sums(shifts, 0.0);
  std::vector<double> w(dims), w_anti(dims);
  std::size_t points = 0;  // per shift
  std::size_t target = 256;
  CdfResult result;
  for (;;) {
    for (std::size_t s = 0; s < shifts; ++s) {
      const double* delta = &shift[s * dims];
      double acc = 0.0;
      for (std::size_t k = points; k < target; ++k) {
        const std::uint64_t r = radical_inverse_bits(k);
        for (std::size_t j = 0; j < dims; ++j) {
          double x = static_cast<double>((r * z[j]) % kLatticeSize) / static_cast<double>(kLatticeSize) + delta[j];
          x -= std::floor(x);
          // Baker's (tent) transform periodizes the integrand.
          w[j] = std::abs(2.0 * x - 1.0);
          w_anti[j] = 1.0 - w[j];
        }
        acc += 0.5 * (f(w.data()) + f(w_anti.data()));
      }
      sums[s] += acc;
    }
    points = target;

    double mean = 0.0;
    for (double s : sums) mean += s / static_cast<double>(points);
    mean /= static_cast<double>(shifts);
    double var = 0.0;
    for (double s : sums) {
      const double d = s / static_cast<double>(points) - mean;
      var += d * d;
    }
    var /= static_cast<double>(shifts * (shifts - 1));

    result.value = probability ? std::clamp(mean, 0.0, 1.0) : mean;
    result.error_estimate = 3.0 * std::sqrt(var);
    result.n_evaluations = 2 * shifts * points;

    double goal = options.abs_tol;
    if (options.rel_tol > 0.0) goal = std::min(goal, options.rel_tol * std::abs(result.value));
    if (result.error_estimate <= goal) break;
    const std::size_t next = 2 * target;
    if (2 * shifts * next > options.max_evaluations || next > kLatticeSize) break;
    target = next;
  }
  return result;
}

}  // namespace

CdfResult mvn_cdf(const MvnSpec& spec, const MvnOptions& options, std::uint64_t seed) {
  check_options(options);
  const std::size_t total = spec.covariance.size();
  if (spec.upper_limits.size() != total) throw DomainError("mvn_cdf: limit count does not match covariance size");

  std::vector<std::size_t> active;
  for (std::size_t i = 0; i < total; ++i) {
    const double b = spec.upper_limits[i];
    if (std::isnan(b)) throw DomainError("mvn_cdf: NaN limit");
    if (b == -kInf) return {0.0, 0.0, 0};
    if (b != kInf) active.push_back(i);
  }
  if (active.empty()) return {1.0, 0.0, 0};

  const std::size_t n = active.size();
  Matrix cov(n, n);
  std::vector<double> b(n);
  for (std::size_t i = 0; i < n; ++i) {
    b[i] = spec.upper_limits[active[i]];
    for (std::size_t j = 0; j < n; ++j) cov(i, j) = spec.covariance(active[i], active[j]);
  }

  const OrderedFactor factor = reorder_and_factor(std::move(cov), std::move(b));
  GenzIntegrand integrand(factor.lower, factor.limits);
  if (n == 1) {
    const double w = 0.0;
    return {integrand(&w), 0.0, 1};
  }

  return lattice_integrate(n - 1, options, seed, [&](const double* w) { return integrand(w); });
}

CdfResult mvn_cdf(const MvnSpec& spec, double tol, std::uint64_t seed) {
  MvnOptions options;
  options.abs_tol = tol;
  return mvn_cdf(spec, options, seed);
}

CdfResult peak_cdf_result(double r, const NakagamiParams& params, const CorrelationMatrix& cov,
                          const MvnOptions& options, std::uint64_t seed) {
  if (!(r >= 0.0)) throw DomainError("peak_cdf: r must be >= 0");
  const double f = std::clamp(nakagami::cdf(params, r), kCdfClampLo, kCdfClampHi);
  const double limit = std_normal_quantile(f);
  return mvn_cdf(MvnSpec{cov, std::vector<double>(cov.size(), limit)}, options, seed);
}

double peak_cdf(double r, const NakagamiParams& params, const CorrelationMatrix& cov, double tol,
                std::uint64_t seed) {
  MvnOptions options;
  options.abs_tol = tol;
  return peak_cdf_result(r, params, cov, options, seed).value;
}

double peak_pdf(double r, const NakagamiParams& params, const CorrelationMatrix& cov, double tol,
                std::uint64_t seed, double h) {
  if (!(h > 0.0)) throw DomainError("peak_pdf: step h must be > 0");
  if (!(r > h)) throw DomainError("peak_pdf: r must exceed the step h");
  if (!(tol > 0.0 && tol <= 0.1)) throw DomainError("peak_pdf: tol must lie in (0, 0.1]");
  auto limit = [&](double x) {
    return std_normal_quantile(std::clamp(nakagami::cdf(params, x), kCdfClampLo, kCdfClampHi));
  };
  const std::size_t n = cov.size();
  const std::vector<double> lo(n, limit(r - h)), hi(n, limit(r + h));
  // Equal limits give both CDFs the same variable order and factor, so the
  // difference can be integrated directly on shared lattice points; its
  // error then largely cancels instead of adding up.
  const OrderedFactor factor = reorder_and_factor(cov.matrix(), std::vector<double>(n, limit(r)));
  GenzIntegrand upper(factor.lower, hi), lower(factor.lower, lo);
  if (n == 1) {
    const double w = 0.0;
    return (upper(&w) - lower(&w)) / (2.0 * h);
  }
  MvnOptions options;
  options.abs_tol = 2.0 * tol * h;
  const CdfResult diff = lattice_integrate(
      n - 1, options, seed, [&](const double* w) { return upper(w) - lower(w); }, false);
  return diff.value / (2.0 * h);
}

double default_pdf_step(const NakagamiParams& params) { return 1e-3 * std::sqrt(params.mu); }

}  // namespace fas

#include <cmath>
#include <limits>
#include <numbers>
#include <utility>
#include <vector>

#include "doctest.h"
#include "fas/copula.hpp"
#include "fas/correlation.hpp"
#include "fas/error.hpp"
#include "fas/nakagami.hpp"
#include "fas/numerics.hpp"
#include "oracles.hpp"

using namespace fas;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

CorrelationMatrix equicorrelated(std::size_t n, double rho) {
  Matrix m(n, n, rho);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return CorrelationMatrix(CorrelationLevel::coefficient, m);
}

CorrelationMatrix repaired_envelope(const FasGeometry& g, double m) {
  return CorrelationMatrix(CorrelationLevel::envelope,
                           psd_repair(envelope_correlation(gain_correlation(jakes_matrix(g)), m).matrix()));
}

}  // namespace

TEST_CASE("mvn_cdf examples") {
  const CdfResult one = mvn_cdf({CorrelationMatrix::identity(1), {0.0}}, 1e-4, 1);
  CHECK(std::abs(one.value - 0.5) < 1e-15);

  const std::vector<double> b{-0.3, 0.4, 1.7};
  const double product = oracle::normal_cdf(b[0]) * oracle::normal_cdf(b[1]) * oracle::normal_cdf(b[2]);
  CHECK(std::abs(mvn_cdf({CorrelationMatrix::identity(3), b}, 1e-4, 2).value - product) < 1e-4);

  CHECK(std::abs(mvn_cdf({equicorrelated(2, 0.5), {0.0, 0.0}}, 1e-4, 3).value - 1.0 / 3.0) < 1e-4);
}

TEST_CASE("mvn_cdf reproduces bivariate and trivariate orthant closed forms") {
  for (double rho : {-0.9, -0.5, 0.0, 0.5, 0.9, 0.99}) {
    const CdfResult r = mvn_cdf({equicorrelated(2, rho), {0.0, 0.0}}, 1e-4, 4);
    CHECK(std::abs(r.value - oracle::bivariate_orthant(rho)) < 1e-4);
    CHECK(r.error_estimate <= 1e-4);
  }
  // P(X <= 0) in 3-D: 1/8 + (sum of asin rho_ij) / (4 pi).
  const Matrix c{{1.0, 0.3, -0.2}, {0.3, 1.0, 0.6}, {-0.2, 0.6, 1.0}};
  const double expected = 0.125 + (std::asin(0.3) + std::asin(-0.2) + std::asin(0.6)) / (4.0 * std::numbers::pi);
  CHECK(std::abs(mvn_cdf({CorrelationMatrix(CorrelationLevel::coefficient, c), {0.0, 0.0, 0.0}}, 1e-5, 5).value -
                 expected) < 1e-5);
}

TEST_CASE("mvn_cdf independence factorization for larger N") {
  for (std::size_t n : {2u, 5u, 10u, 30u}) {
    std::vector<double> b(n);
    double product = 1.0;
    for (std::size_t i = 0; i < n; ++i) {
      b[i] = -1.0 + 0.37 * static_cast<double>(i % 7);
      product *= oracle::normal_cdf(b[i]);
    }
    CHECK(std::abs(mvn_cdf({CorrelationMatrix::identity(n), b}, 1e-4, 6).value - product) < 1e-4);
  }
}

TEST_CASE("mvn_cdf infinite limits are exact") {
  const CorrelationMatrix c = equicorrelated(4, 0.4);
  CHECK(mvn_cdf({c, {kInf, kInf, kInf, kInf}}, 1e-4, 1).value == 1.0);
  CHECK(mvn_cdf({c, {0.3, -kInf, 1.0, kInf}}, 1e-4, 1).value == 0.0);
  // Infinite limits drop out: a 4-D query with two +inf limits is the 2-D one.
  const double two_d = mvn_cdf({equicorrelated(2, 0.4), {0.0, 0.0}}, 1e-5, 9).value;
  CHECK(std::abs(mvn_cdf({c, {0.0, kInf, 0.0, kInf}}, 1e-5, 9).value - two_d) < 1e-12);
  CHECK(std::abs(two_d - oracle::bivariate_orthant(0.4)) < 1e-5);
}

TEST_CASE("mvn_cdf is reproducible for a fixed seed and rejects bad input") {
  const CorrelationMatrix c = repaired_envelope({8, 1.0}, 2.0);
  const MvnSpec spec{c, std::vector<double>(8, -0.5)};
  const CdfResult a = mvn_cdf(spec, 1e-4, 77);
  const CdfResult b = mvn_cdf(spec, 1e-4, 77);
  CHECK(a.value == b.value);
  CHECK(a.error_estimate == b.error_estimate);
  CHECK(a.n_evaluations == b.n_evaluations);

  CHECK_THROWS_AS(mvn_cdf(spec, 0.0, 1), DomainError);
  CHECK_THROWS_AS(mvn_cdf(spec, 0.2, 1), DomainError);
  CHECK_THROWS_AS(mvn_cdf({c, {0.0, 1.0}}, 1e-4, 1), DomainError);
  CHECK_THROWS_AS(mvn_cdf({CorrelationMatrix::identity(2), {0.0, std::nan("")}}, 1e-4, 1), DomainError);
}

TEST_CASE("mvn_cdf flags an exhausted budget") {
  MvnOptions o;
  o.abs_tol = 1e-9;
  o.max_evaluations = 1 << 14;
  const CdfResult r = mvn_cdf({repaired_envelope({6, 0.8}, 3.0), std::vector<double>(6, 0.2)}, o, 3);
  CHECK(r.error_estimate > o.abs_tol);
  CHECK(r.n_evaluations <= o.max_evaluations);
  CHECK(r.value >= 0.0);
  CHECK(r.value <= 1.0);
}

TEST_CASE("mvn_cdf relative tolerance resolves small probabilities") {
  // Trivariate orthant shifted far into the tail: compare against the
  // conditional 1-D integral P = int phi(t) Phi(...)^2 dt for an
  // equicorrelated (rho) vector, X_i = sqrt(rho) T + sqrt(1 - rho) E_i.
  const double rho = 0.5, b = -3.0;
  const int nodes = 20000;
  double ref = 0.0;
  const double h = 20.0 / nodes;
  for (int i = 0; i <= nodes; ++i) {
    const double t = -10.0 + i * h;
    const double w = (i == 0 || i == nodes) ? 0.5 : 1.0;
    const double inner = oracle::normal_cdf((b - std::sqrt(rho) * t) / std::sqrt(1.0 - rho));
    ref += w * h * oracle::normal_pdf(t) * inner * inner * inner;
  }
  MvnOptions o;
  o.abs_tol = 1e-4;
  o.rel_tol = 1e-3;
  const CdfResult r = mvn_cdf({equicorrelated(3, rho), {b, b, b}}, o, 8);
  CHECK(ref < 1e-4);
  CHECK(std::abs(r.value - ref) < 3e-3 * ref);
}

TEST_CASE("peak_cdf: single port collapses to the marginal") {
  const NakagamiParams p{3.0, 1.0};
  for (double r = 0.05; r < 3.0; r += 0.1)
    CHECK(std::abs(peak_cdf(r, p, CorrelationMatrix::identity(1), 1e-4, 1) - nakagami::cdf(p, r)) < 1e-10);
  CHECK(peak_cdf(0.0, p, CorrelationMatrix::identity(1), 1e-4, 1) < 1e-4);
  CHECK_THROWS_AS(peak_cdf(-0.1, p, CorrelationMatrix::identity(1), 1e-4, 1), DomainError);
}

TEST_CASE("peak_cdf: independent ports give F^N") {
  const NakagamiParams p{2.0, 1.5};
  for (std::size_t n : {2u, 4u, 10u})
    for (double r = 0.05; r < 3.0; r += 0.06) {
      const double f = nakagami::cdf(p, r);
      CHECK(std::abs(peak_cdf(r, p, CorrelationMatrix::identity(n), 1e-4, 2) - std::pow(f, n)) < 2e-4);
    }
}

TEST_CASE("peak_cdf matches brute-force 2-D copula integration") {
  const NakagamiParams p{3.0, 1.0};
  for (double w : {0.1, 0.5}) {
    const CorrelationMatrix j = jakes_matrix({2, w});
    for (double r : {0.5, 0.8, 1.1, 1.5}) {
      const double brute = oracle::copula_peak_cdf_2d(3.0, 1.0, j(0, 1), r);
      CHECK(std::abs(peak_cdf(r, p, j, 1e-5, 3) - brute) < 1e-3);
    }
  }
}

TEST_CASE("property: peak_cdf is monotone and sits between F^N and F") {
  const NakagamiParams p{3.0, 1.0};
  // The dense geometries make the integrand nearly singular and slow to
  // converge, so they run at a looser tolerance; the bounds scale with it.
  for (auto [w, tol] : {std::pair{0.5, 1e-3}, std::pair{1.0, 1e-3}, std::pair{3.5, 1e-4}}) {
    const CorrelationMatrix c = repaired_envelope({10, w}, 3.0);
    double prev = 0.0;
    for (int i = 0; i < 100; ++i) {
      const double r = 0.02 + 0.025 * i;
      const double v = peak_cdf(r, p, c, tol, 4);
      const double f = nakagami::cdf(p, r);
      CHECK(v >= prev - 2.0 * tol);
      CHECK(v <= f + 2.0 * tol);
      CHECK(v >= std::pow(f, 10) - 2.0 * tol);
      CHECK(v >= 0.0);
      CHECK(v <= 1.0);
      prev = v;
    }
  }
}

TEST_CASE("peak_pdf") {
  const NakagamiParams p{3.0, 1.0};
  const double h = default_pdf_step(p);
  CHECK(h == 1e-3);
  for (double r = 0.1; r < 2.5; r += 0.2)
    CHECK(std::abs(peak_pdf(r, p, CorrelationMatrix::identity(1), 1e-4, 1, h) - nakagami::pdf(p, r)) < 1e-3);

  // Integral over [0, 6] by the trapezoid rule.
  const CorrelationMatrix c = repaired_envelope({3, 0.5}, 3.0);
  const double step = 0.05;
  double integral = 0.0, prev = 0.0;
  for (double r = step; r <= 6.0 + 1e-9; r += step) {
    const double v = peak_pdf(r, p, c, 1e-3, 2, h);
    integral += 0.5 * step * (prev + v);
    prev = v;
  }
  CHECK(std::abs(integral - 1.0) < 1e-2);

  // Order statistics of independent ports: the mode moves right with N.
  auto mode = [&](std::size_t n) {
    double best = 0.0, arg = 0.0;
    for (double r = 0.05; r < 3.0; r += 0.01) {
      const double v = peak_pdf(r, p, CorrelationMatrix::identity(n), 1e-4, 3, h);
      if (v > best) best = v, arg = r;
    }
    return arg;
  };
  CHECK(mode(1) < mode(8));

  CHECK_THROWS_AS(peak_pdf(h / 2, p, c, 1e-4, 1, h), DomainError);
  CHECK_THROWS_AS(peak_pdf(1.0, p, c, 1e-4, 1, 0.0), DomainError);
}

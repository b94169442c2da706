#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "fas/matrix.hpp"

namespace fas {

// Ordered evaluation grid; strictly increasing finite abscissae.
class RealGrid {
 public:
  explicit RealGrid(std::vector<double> points);

  // n >= 2 equally spaced points covering [lo, hi] inclusive.
  static RealGrid linspace(double lo, double hi, std::size_t n);

  std::size_t size() const { return points_.size(); }
  double operator[](std::size_t i) const { return points_[i]; }
  std::span<const double> points() const { return points_; }
  auto begin() const { return points_.begin(); }
  auto end() const { return points_.end(); }

 private:
  std::vector<double> points_;
};

struct EigenDecomposition {
  std::vector<double> eigenvalues;  // descending
  Matrix eigenvectors;              // column k pairs with eigenvalues[k]
};

// Zero-order Bessel function of the first kind.
double bessel_j0(double x);

// Inverse of erf on (-1, 1).
double erf_inv(double p);

// Standard normal CDF, 0.5 * erfc(-x / sqrt(2)).
double std_normal_cdf(double x);

// Inverse standard normal CDF on (0, 1), sqrt(2) * erf_inv(2u - 1). The
// tails are evaluated through erfc so that Phi(result) == u holds to full
// relative precision for small u.
double std_normal_quantile(double u);

// P(m, x) = gamma(m, x) / Gamma(m).
double regularized_lower_gamma(double m, double x);

// Upper-tail complement Q(m, x) = 1 - P(m, x), accurate when P is close to 1.
double regularized_upper_gamma(double m, double x);

// 2F1(-1/2, -1/2; m; x) on 0 <= x <= 1.
double gauss_2f1_symmetric(double m, double x);

// Gamma(m) Gamma(m + 1) / Gamma(m + 1/2)^2, the value of
// gauss_2f1_symmetric(m, 1).
double psi_ratio(double m);

// Symmetric eigendecomposition by cyclic Jacobi rotations. Throws
// NumericalError when the input is asymmetric beyond 1e-12.
EigenDecomposition sym_eigen(const Matrix& m);

inline constexpr double kDefaultPsdFloor = 1e-10;

// Clips eigenvalues of a unit-diagonal symmetric matrix to >= floor and
// rescales back to a unit diagonal. Matrices whose smallest eigenvalue is
// already >= floor are returned unchanged.
Matrix psd_repair(const Matrix& m, double floor = kDefaultPsdFloor);

// Lower-triangular L with L * L^T == m. Throws NumericalError on a
// non-positive pivot.
Matrix cholesky(const Matrix& m);

}  // namespace fas

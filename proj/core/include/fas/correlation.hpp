#pragma once

#include <cstddef>
#include <string_view>

#include "fas/matrix.hpp"

namespace fas {

// N ports spread evenly over an aperture of `aperture` carrier wavelengths.
struct FasGeometry {
  std::size_t n_ports = 2;
  double aperture = 0.5;

  void validate() const;
};

enum class CorrelationLevel { coefficient, gain, envelope, normal_scores };

std::string_view to_string(CorrelationLevel level);

// Symmetric unit-diagonal matrix with entries in [-1, 1], tagged with the
// quantity it correlates.
class CorrelationMatrix {
 public:
  CorrelationMatrix(CorrelationLevel level, Matrix entries);

  static CorrelationMatrix identity(std::size_t n, CorrelationLevel level = CorrelationLevel::coefficient);

  CorrelationLevel level() const { return level_; }
  const Matrix& matrix() const { return entries_; }
  std::size_t size() const { return entries_.rows(); }
  double operator()(std::size_t i, std::size_t j) const { return entries_(i, j); }

 private:
  CorrelationLevel level_;
  Matrix entries_;
};

// Jake's spatial correlation J(n, k) = J0(2 pi (n - k) W / (N - 1)).
// A single-port geometry yields [1].
CorrelationMatrix jakes_matrix(const FasGeometry& geom);

// Gain (squared-envelope) correlation of a coefficient-level matrix: J^2
// entrywise.
CorrelationMatrix gain_correlation(const CorrelationMatrix& coefficient);

// Envelope correlation of Nakagami-m envelopes with the given gain
// correlation:
//   (2F1(-1/2, -1/2; m; Jr) - 1) / (psi(m) - 1).
CorrelationMatrix envelope_correlation(const CorrelationMatrix& gain, double m);

// Copula correlation estimate: each column is mapped to normal scores
// Phi^{-1}(rank / (K + 1)) (average rank on ties) and the Pearson matrix of
// the scores is psd-repaired. `samples` is K x N.
CorrelationMatrix normal_scores_correlation(const Matrix& samples);

enum class PearsonTransform { envelope, gain };

// Pearson correlation of the K x N sample columns, squared first for
// PearsonTransform::gain.
CorrelationMatrix empirical_pearson(const Matrix& samples, PearsonTransform transform);

inline constexpr std::size_t kMinCorrelationSamples = 100;

}  // namespace fas

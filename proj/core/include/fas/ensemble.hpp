#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>

#include "fas/matrix.hpp"

namespace fas {

enum class GeneratorId { physical, copula };

std::string_view to_string(GeneratorId id);
GeneratorId generator_id_from_string(std::string_view s);

struct Provenance {
  GeneratorId generator = GeneratorId::physical;
  // Which covariance drove a copula ensemble ("J", "J_h", "R", ...);
  // "jakes" for the physical generator.
  std::string covariance_id;
  std::uint64_t seed = 0;
  std::size_t n_ports = 0;
  double aperture = 0.0;
  double m = 0.0;
  double mu = 0.0;
};

// K x N envelope samples |h^(n)|, one row per channel realisation.
struct ChannelEnsemble {
  Matrix envelopes;
  Provenance provenance;

  std::size_t samples() const { return envelopes.rows(); }
  std::size_t ports() const { return envelopes.cols(); }

  // Throws NumericalError unless every entry is finite and >= 0.
  void validate() const;
};

}  // namespace fas

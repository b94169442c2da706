#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace fascop {

enum class Command { scatter, pdf_cdf, validate, op_sweep, corr_table };

std::string_view to_string(Command c);
Command command_from_string(std::string_view s);

struct Case {
  std::size_t n_ports = 2;
  double aperture = 0.5;
  double m = 3.0;
  double mu = 1.0;
};

// Everything a run needs. Each command expands its cases from the list
// fields (n_ports x apertures x m x mu), unless `cases` pins explicit
// (n_ports, aperture) pairs.
struct ExperimentConfig {
  Command command = Command::op_sweep;
  std::vector<std::size_t> n_ports;
  std::vector<double> apertures;
  std::vector<std::pair<std::size_t, double>> cases;
  std::vector<double> m;
  std::vector<double> mu;
  double threshold_db = 10.0;
  std::vector<double> snr_db;
  std::vector<std::string> methods;
  std::size_t samples = 0;  // 0 in op-sweep: low-OP sizing rule
  double tol = 1e-4;
  double rel_tol = 0.0;
  double r_max = 6.0;
  std::size_t r_points = 241;
  std::uint64_t seed = 1;
  unsigned threads = 0;
  std::string out = "out";

  std::vector<Case> expand() const;
  void validate() const;
};

ExperimentConfig defaults_for(Command c);

// Overlays the keys present in `j` on `cfg`. Scalars are accepted where a
// list is expected. Unknown keys throw fas::DomainError.
void apply_json(ExperimentConfig& cfg, const nlohmann::json& j);

nlohmann::json to_json(const ExperimentConfig& cfg);

// Values given on the command line; unset ones leave the config alone.
struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<unsigned> threads;
  std::optional<std::size_t> samples;
  std::optional<double> tol;
};

// Defaults for `c`, then the config file (a config or a run manifest),
// then the overrides.
ExperimentConfig resolve_config(Command c, const std::optional<std::string>& config_path, const Overrides& o);

}  // namespace fascop

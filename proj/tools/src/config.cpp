#include "fascop/config.hpp"

#include <cmath>
#include <fstream>
#include <set>

#include "fas/error.hpp"
#include "fas/outage.hpp"

namespace fascop {
namespace {

using nlohmann::json;

template <class T>
std::vector<T> as_list(const json& v) {
  if (v.is_array()) return v.get<std::vector<T>>();
  return {v.get<T>()};
}

const std::set<std::string>& known_methods() {
  static const std::set<std::string> names{"mc_fas", "theory_coeff", "theory_enve", "tas_theory", "tas_mc"};
  return names;
}

}  // namespace

std::string_view to_string(Command c) {
  switch (c) {
    case Command::scatter: return "scatter";
    case Command::pdf_cdf: return "pdf-cdf";
    case Command::validate: return "validate";
    case Command::op_sweep: return "op-sweep";
    case Command::corr_table: return "corr-table";
  }
  return "unknown";
}

Command command_from_string(std::string_view s) {
  for (Command c : {Command::scatter, Command::pdf_cdf, Command::validate, Command::op_sweep, Command::corr_table})
    if (to_string(c) == s) return c;
  throw fas::DomainError("unknown experiment '" + std::string(s) + "'");
}

ExperimentConfig defaults_for(Command c) {
  ExperimentConfig cfg;
  cfg.command = c;
  cfg.m = {3.0};
  cfg.mu = {1.0};
  switch (c) {
    case Command::scatter:
      cfg.n_ports = {2};
      cfg.apertures = {0.1, 0.3, 0.5};
      cfg.samples = 10'000;
      break;
    case Command::pdf_cdf:
      cfg.n_ports = {2};
      cfg.apertures = {0.5};
      cfg.samples = 1'000'000;
      break;
    case Command::validate:
      cfg.n_ports = {10};
      cfg.apertures = {1.0};
      cfg.m = {1.0, 2.0, 3.0};
      cfg.samples = 1'000'000;
      break;
    case Command::op_sweep:
      cfg.n_ports = {10};
      cfg.apertures = {0.5, 3.5};
      cfg.snr_db = {0.0, 5.0, 10.0, 15.0, 20.0, 25.0, 30.0};
      cfg.methods = {"mc_fas", "theory_coeff", "theory_enve", "tas_theory"};
      cfg.rel_tol = 0.01;
      cfg.samples = 0;
      break;
    case Command::corr_table:
      cfg.cases = {{10, 3.5}, {8, 2.5}};
      cfg.samples = 1'000'000;
      break;
  }
  return cfg;
}

std::vector<Case> ExperimentConfig::expand() const {
  std::vector<std::pair<std::size_t, double>> geoms = cases;
  if (geoms.empty())
    for (std::size_t n : n_ports)
      for (double w : apertures) geoms.emplace_back(n, w);
  std::vector<Case> out;
  for (const auto& [n, w] : geoms)
    for (double mm : m)
      for (double u : mu) out.push_back({n, w, mm, u});
  return out;
}

void ExperimentConfig::validate() const {
  if (expand().empty()) throw fas::DomainError("config: no cases (n_ports, apertures, m and mu must be non-empty)");
  for (const Case& c : expand()) {
    fas::FasGeometry{c.n_ports, c.aperture}.validate();
    fas::NakagamiParams{c.m, c.mu}.validate();
  }
  if (!std::isfinite(threshold_db)) throw fas::DomainError("config: threshold_db must be finite");
  for (double s : snr_db)
    if (!std::isfinite(s)) throw fas::DomainError("config: snr_db entries must be finite");
  for (const auto& name : methods)
    if (!known_methods().contains(name)) throw fas::DomainError("config: unknown method '" + name + "'");
  if (!(tol > 0.0 && tol <= 0.1)) throw fas::DomainError("config: tol must lie in (0, 0.1]");
  if (!(rel_tol >= 0.0)) throw fas::DomainError("config: rel_tol must be >= 0");
  if (!(r_max > 0.0) || r_points < 2) throw fas::DomainError("config: need r_max > 0 and r_points >= 2");
  if (out.empty()) throw fas::DomainError("config: out must name a directory");
  switch (command) {
    case Command::op_sweep:
      if (snr_db.empty() || methods.empty()) throw fas::DomainError("config: op-sweep needs snr_db and methods");
      if (samples != 0 && samples < fas::kMinMcSamples) throw fas::DomainError("config: samples must be 0 or >= 1e4");
      break;
    case Command::validate:
    case Command::scatter:
    case Command::corr_table:
      if (samples < fas::kMinCorrelationSamples) throw fas::DomainError("config: samples must be >= 100");
      break;
    case Command::pdf_cdf:
      if (samples < 1) throw fas::DomainError("config: samples must be >= 1");
      break;
  }
}

void apply_json(ExperimentConfig& cfg, const json& j) {
  if (!j.is_object()) throw fas::DomainError("config: top level must be a JSON object");
  for (const auto& [key, v] : j.items()) {
    if (key == "experiment") {
      if (command_from_string(v.get<std::string>()) != cfg.command)
        throw fas::DomainError("config: experiment '" + v.get<std::string>() + "' does not match the subcommand");
    } else if (key == "n_ports") {
      cfg.n_ports = as_list<std::size_t>(v);
    } else if (key == "apertures") {
      cfg.apertures = as_list<double>(v);
    } else if (key == "cases") {
      cfg.cases.clear();
      for (const auto& c : v) cfg.cases.emplace_back(c.at("n_ports").get<std::size_t>(), c.at("aperture").get<double>());
    } else if (key == "m") {
      cfg.m = as_list<double>(v);
    } else if (key == "mu") {
      cfg.mu = as_list<double>(v);
    } else if (key == "threshold_db") {
      cfg.threshold_db = v.get<double>();
    } else if (key == "snr_db") {
      cfg.snr_db = as_list<double>(v);
    } else if (key == "methods") {
      cfg.methods = as_list<std::string>(v);
    } else if (key == "samples") {
      cfg.samples = v.get<std::size_t>();
    } else if (key == "tol") {
      cfg.tol = v.get<double>();
    } else if (key == "rel_tol") {
      cfg.rel_tol = v.get<double>();
    } else if (key == "r_max") {
      cfg.r_max = v.get<double>();
    } else if (key == "r_points") {
      cfg.r_points = v.get<std::size_t>();
    } else if (key == "seed") {
      cfg.seed = v.get<std::uint64_t>();
    } else if (key == "threads") {
      cfg.threads = v.get<unsigned>();
    } else if (key == "out") {
      cfg.out = v.get<std::string>();
    } else {
      throw fas::DomainError("config: unknown key '" + key + "'");
    }
  }
}

json to_json(const ExperimentConfig& cfg) {
  json cases = json::array();
  for (const auto& [n, w] : cfg.cases) cases.push_back({{"n_ports", n}, {"aperture", w}});
  json j = {
      {"experiment", std::string(to_string(cfg.command))},
      {"n_ports", cfg.n_ports},
      {"apertures", cfg.apertures},
      {"cases", cases},
      {"m", cfg.m},
      {"mu", cfg.mu},
      {"threshold_db", cfg.threshold_db},
      {"snr_db", cfg.snr_db},
      {"methods", cfg.methods},
      {"samples", cfg.samples},
      {"tol", cfg.tol},
      {"rel_tol", cfg.rel_tol},
      {"r_max", cfg.r_max},
      {"r_points", cfg.r_points},
      {"seed", cfg.seed},
      {"threads", cfg.threads},
      {"out", cfg.out},
  };
  return j;
}

ExperimentConfig resolve_config(Command c, const std::optional<std::string>& config_path, const Overrides& o) {
  ExperimentConfig cfg = defaults_for(c);
  if (config_path) {
    std::ifstream in(*config_path);
    if (!in) throw fas::IoError("cannot read config " + *config_path);
    json j;
    try {
      j = json::parse(in);
    } catch (const json::exception& e) {
      throw fas::DomainError("config " + *config_path + ": " + e.what());
    }
    // A run manifest carries the resolved config under "config".
    if (j.is_object() && j.contains("manifest_version")) j = j.at("config");
    try {
      apply_json(cfg, j);
    } catch (const json::exception& e) {
      throw fas::DomainError("config " + *config_path + ": " + e.what());
    }
  }
  if (o.seed) cfg.seed = *o.seed;
  if (o.out) cfg.out = *o.out;
  if (o.threads) cfg.threads = *o.threads;
  if (o.samples) cfg.samples = *o.samples;
  if (o.tol) cfg.tol = *o.tol;
  cfg.validate();
  return cfg;
}

}  // namespace fascop

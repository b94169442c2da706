#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "fas/error.hpp"
#include "fascop/commands.hpp"
#include "fascop/config.hpp"
#include "json.hpp"

namespace {

int fail(const char* type, const std::string& message, int code) {
  std::cerr << nlohmann::json{{"error", {{"type", type}, {"message", message}}}}.dump() << std::endl;
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"fascop: Gaussian-copula outage toolkit for fluid antenna systems"};
  app.require_subcommand(1);
  app.set_version_flag("--version", FASCOP_VERSION);

  std::optional<std::string> config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<unsigned> threads;
  std::optional<std::size_t> samples;
  std::optional<double> tol;
  app.add_option("--config", config_path, "JSON config, or a manifest.json from an earlier run");
  app.add_option("--seed", seed, "root RNG seed");
  app.add_option("--out", out, "output directory");
  app.add_option("--threads", threads, "worker threads (0: all cores)");
  app.add_option("--samples", samples, "Monte Carlo sample count K");
  app.add_option("--tol", tol, "absolute MVN CDF tolerance");

  const std::pair<fascop::Command, const char*> commands[] = {
      {fascop::Command::scatter, "envelope samples from the physical generator and three copula variants"},
      {fascop::Command::pdf_cdf, "peak-envelope PDF and CDF: Monte Carlo against both copula matrices"},
      {fascop::Command::validate, "marginal and correlation fidelity report for the physical generator"},
      {fascop::Command::op_sweep, "outage probability curves over an SNR grid"},
      {fascop::Command::corr_table, "envelope correlations per port lag for each generator"},
  };
  for (const auto& [cmd, help] : commands) app.add_subcommand(std::string(fascop::to_string(cmd)), help)->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail("UsageError", e.what(), 2);
  }

  try {
    const auto chosen = app.get_subcommands().front();
    const fascop::Command cmd = fascop::command_from_string(chosen->get_name());
    const fascop::ExperimentConfig cfg = fascop::resolve_config(cmd, config_path, {seed, out, threads, samples, tol});
    const fascop::RunResult result = fascop::run(cfg);
    for (const auto& f : result.files) std::cout << cfg.out << '/' << f << "\n";
    if (!result.report.is_null()) std::cout << result.report.dump(2) << "\n";
  } catch (const fas::DomainError& e) {
    return fail("DomainError", e.what(), 2);
  } catch (const fas::IoError& e) {
    return fail("IoError", e.what(), 3);
  } catch (const fas::NumericalError& e) {
    return fail("NumericalError", e.what(), 4);
  } catch (const std::exception& e) {
    return fail("Error", e.what(), 1);
  }
  return 0;
}

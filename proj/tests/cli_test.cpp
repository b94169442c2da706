#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "fas/correlation.hpp"
#include "fas/error.hpp"
#include "fas/numerics.hpp"
#include "fascop/commands.hpp"
#include "fascop/config.hpp"
#include "json.hpp"

using namespace fascop;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / "fascop_cli_test" / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// Parses a CSV with a header row into column vectors keyed by name; cells
// that are not numbers become NaN.
std::map<std::string, std::vector<double>> read_columns(const fs::path& p, bool skip_comment = false) {
  std::istringstream in(slurp(p));
  std::string line;
  if (skip_comment) std::getline(in, line);
  std::getline(in, line);
  std::vector<std::string> names;
  std::stringstream header(line);
  for (std::string cell; std::getline(header, cell, ',');) names.push_back(cell);
  std::map<std::string, std::vector<double>> cols;
  while (std::getline(in, line)) {
    std::stringstream row(line);
    std::size_t i = 0;
    for (std::string cell; std::getline(row, cell, ','); ++i) {
      char* end = nullptr;
      const double v = std::strtod(cell.c_str(), &end);
      cols[names.at(i)].push_back(end != cell.c_str() && *end == '\0' ? v : std::nan(""));
    }
  }
  return cols;
}

double pearson(const std::vector<double>& x, const std::vector<double>& y) {
  fas::Matrix m(x.size(), 2);
  for (std::size_t i = 0; i < x.size(); ++i) m(i, 0) = x[i], m(i, 1) = y[i];
  return fas::empirical_pearson(m, fas::PearsonTransform::envelope)(0, 1);
}

fs::path write_json(const fs::path& dir, const nlohmann::json& j) {
  const fs::path p = dir / "in.json";
  std::ofstream(p) << j.dump();
  return p;
}

}  // namespace

TEST_CASE("config: defaults, overlays and overrides") {
  const ExperimentConfig d = resolve_config(Command::op_sweep, std::nullopt, {});
  CHECK(d.n_ports == std::vector<std::size_t>{10});
  CHECK(d.apertures == std::vector<double>{0.5, 3.5});
  CHECK(d.m == std::vector<double>{3.0});
  CHECK(d.mu == std::vector<double>{1.0});
  CHECK(d.threshold_db == 10.0);
  CHECK(d.tol == 1e-4);
  CHECK(d.expand().size() == 2);

  const fs::path dir = scratch("config");
  const fs::path p = write_json(dir, {{"experiment", "op-sweep"}, {"apertures", 2.5}, {"m", {1, 2}}, {"seed", 9}});
  const ExperimentConfig c = resolve_config(Command::op_sweep, p.string(), {.seed = 42, .tol = 1e-3});
  CHECK(c.apertures == std::vector<double>{2.5});
  CHECK(c.m == std::vector<double>{1.0, 2.0});
  CHECK(c.seed == 42);
  CHECK(c.tol == 1e-3);

  // The resolved config round-trips through JSON.
  ExperimentConfig again = defaults_for(Command::op_sweep);
  apply_json(again, to_json(c));
  CHECK(to_json(again) == to_json(c));

  const ExperimentConfig t = resolve_config(Command::corr_table, std::nullopt, {});
  REQUIRE(t.expand().size() == 2);
  CHECK(t.expand()[0].n_ports == 10);
  CHECK(t.expand()[0].aperture == 3.5);
  CHECK(t.expand()[1].n_ports == 8);
  CHECK(t.expand()[1].aperture == 2.5);
}

TEST_CASE("config: errors") {
  const fs::path dir = scratch("config_errors");
  CHECK_THROWS_AS(resolve_config(Command::scatter, write_json(dir, {{"bogus", 1}}).string(), {}), fas::DomainError);
  CHECK_THROWS_AS(resolve_config(Command::scatter, write_json(dir, {{"experiment", "validate"}}).string(), {}),
                  fas::DomainError);
  CHECK_THROWS_AS(resolve_config(Command::scatter, write_json(dir, {{"apertures", "wide"}}).string(), {}),
                  fas::DomainError);
  CHECK_THROWS_AS(resolve_config(Command::op_sweep, write_json(dir, {{"methods", {"magic"}}}).string(), {}),
                  fas::DomainError);
  CHECK_THROWS_AS(resolve_config(Command::op_sweep, std::nullopt, {.tol = 0.5}), fas::DomainError);
  CHECK_THROWS_AS(resolve_config(Command::validate, std::nullopt, {.samples = 10}), fas::DomainError);
  CHECK_THROWS_AS(resolve_config(Command::scatter, write_json(dir, {{"m", 0.3}}).string(), {}), fas::DomainError);
  CHECK_THROWS_AS(resolve_config(Command::scatter, (dir / "missing.json").string(), {}), fas::IoError);
  std::ofstream(dir / "broken.json") << "{\"seed\": ";
  CHECK_THROWS_AS(resolve_config(Command::scatter, (dir / "broken.json").string(), {}), fas::DomainError);
}

TEST_CASE("scatter writes four sample files per aperture") {
  const fs::path dir = scratch("scatter");
  ExperimentConfig cfg = defaults_for(Command::scatter);
  cfg.out = dir.string();
  cfg.samples = 100000;
  cfg.threads = 1;
  const RunResult r = run(cfg);
  CHECK(r.files.size() == 3 * 4 + 3);
  CHECK(fs::exists(dir / "config.json"));
  CHECK(fs::exists(dir / "manifest.json"));

  for (const char* source : {"physical", "copula_R", "copula_J", "copula_Jh"}) {
    const auto cols = read_columns(dir / (std::string("scatter_N2_W0.1_m3_mu1_") + source + ".csv"), true);
    CHECK(cols.at("port_1").size() == cfg.samples);
  }

  // Physical envelope correlation at W = 0.1 follows the envelope map of
  // J0(0.2 pi)^2 at m = 3.
  const auto near = read_columns(dir / "scatter_N2_W0.1_m3_mu1_physical.csv", true);
  const double j0 = 0.90371264209246630174;
  const fas::CorrelationMatrix jr(fas::CorrelationLevel::gain, fas::Matrix{{1.0, j0 * j0}, {j0 * j0, 1.0}});
  CHECK(std::abs(pearson(near.at("port_1"), near.at("port_2")) - fas::envelope_correlation(jr, 3.0)(0, 1)) < 0.02);

  // At W = 0.5 the coefficient-level copula is more negatively correlated
  // than the physical samples.
  const auto phys = read_columns(dir / "scatter_N2_W0.5_m3_mu1_physical.csv", true);
  const auto coeff = read_columns(dir / "scatter_N2_W0.5_m3_mu1_copula_J.csv", true);
  CHECK(pearson(coeff.at("port_1"), coeff.at("port_2")) < pearson(phys.at("port_1"), phys.at("port_2")));
}

TEST_CASE("pdf-cdf columns") {
  const fs::path dir = scratch("pdf_cdf");
  ExperimentConfig cfg = defaults_for(Command::pdf_cdf);
  cfg.out = dir.string();
  cfg.threads = 1;
  run(cfg);
  const auto cols = read_columns(dir / "pdf_cdf_N2_W0.5_m3_mu1.csv");
  const auto& r = cols.at("r");
  CHECK(r.size() == 241);
  CHECK(r.back() == 6.0);
  for (const char* c : {"cdf_mc", "cdf_coeff", "cdf_enve"}) CHECK(cols.at(c).back() >= 0.999);

  // Empirical CDF at the sample median.
  const auto& cdf_mc = cols.at("cdf_mc");
  std::size_t above = 0;
  while (cdf_mc[above] < 0.5) ++above;
  const double k = static_cast<double>(cfg.samples);
  CHECK(std::abs(cdf_mc[above] - 0.5) < 3.0 / (2.0 * std::sqrt(k)) + (cdf_mc[above] - cdf_mc[above - 1]));

  // Below CDF 1e-2 the envelope-level curve is the closer one on >= 80% of
  // the grid points.
  std::size_t points = 0, enve_closer = 0;
  for (std::size_t i = 0; i < r.size(); ++i) {
    if (!(cdf_mc[i] > 0.0 && cdf_mc[i] < 1e-2)) continue;
    ++points;
    enve_closer += std::abs(cols.at("cdf_enve")[i] - cdf_mc[i]) <= std::abs(cols.at("cdf_coeff")[i] - cdf_mc[i]);
  }
  CHECK(points >= 5);
  CHECK(enve_closer >= 0.8 * static_cast<double>(points));

  for (const char* c : {"pdf_mc", "pdf_coeff", "pdf_enve"}) {
    double integral = 0.0;
    for (std::size_t i = 1; i < r.size(); ++i) integral += 0.5 * (r[i] - r[i - 1]) * (cols.at(c)[i] + cols.at(c)[i - 1]);
    CHECK(std::abs(integral - 1.0) < 1e-2);
  }
}

TEST_CASE("validate report") {
  const fs::path dir = scratch("validate");
  ExperimentConfig cfg = defaults_for(Command::validate);
  cfg.out = dir.string();
  cfg.threads = 1;
  const RunResult r = run(cfg);
  const nlohmann::json report = nlohmann::json::parse(slurp(dir / "validate.json"));
  CHECK(report == r.report);
  REQUIRE(report.at("cases").size() == 3);
  for (const auto& c : report.at("cases")) {
    CHECK(c.at("cdf_rmse").get<double>() < 1e-3);
    CHECK(c.at("envelope_corr_max_abs_diff").get<double>() < 0.01);
    CHECK(c.at("ports").size() == 10);
  }
  CHECK(report.at("pass").get<bool>());
}

TEST_CASE("marginal_fit against exact samples") {
  // Quantiles at the midpoints of K equal-probability cells are the best a
  // K-sample set can do; the CDF RMSE is then ~1/(2K).
  const fas::NakagamiParams p{2.0, 1.0};
  std::vector<double> x(20000);
  for (std::size_t i = 0; i < x.size(); ++i)
    x[i] = fas::nakagami::quantile(p, (static_cast<double>(i) + 0.5) / static_cast<double>(x.size()));
  const MarginalFit f = marginal_fit(x, p);
  CHECK(f.cdf_rmse < 1.0 / x.size());
  CHECK(f.pdf_rmse < 2.0 / x.size());
}

TEST_CASE("op-sweep writes one curve file per method") {
  const fs::path dir = scratch("op_sweep");
  ExperimentConfig cfg = defaults_for(Command::op_sweep);
  cfg.out = dir.string();
  cfg.n_ports = {6};
  cfg.apertures = {1.0};
  cfg.snr_db = {10.0, 0.0, 5.0};
  cfg.samples = 20000;
  cfg.threads = 1;
  run(cfg);
  for (const char* m : {"mc_fas", "theory_coeff", "theory_enve", "tas_theory"}) {
    const auto cols = read_columns(dir / (std::string("op_") + m + ".csv"));
    REQUIRE(cols.at("snr_db").size() == 3);
    CHECK(std::is_sorted(cols.at("snr_db").begin(), cols.at("snr_db").end()));
    for (std::size_t i = 0; i < 3; ++i) {
      CHECK(cols.at("op")[i] >= 0.0);
      CHECK(cols.at("op")[i] <= 1.0);
      if (i) CHECK(cols.at("op")[i] <= cols.at("op")[i - 1] + 2.0 * cfg.tol);
    }
  }
  const std::string head = slurp(dir / "op_theory_enve.csv").substr(0, 120);
  CHECK(head.rfind("n_ports,aperture,m,mu,threshold_db,snr_db,op,stderr,method,K_or_tol,seed\n6,1,3,1,10,0,", 0) == 0);
}

TEST_CASE("W-sweep shows fluctuations at large apertures") {
  const fs::path dir = scratch("w_sweep");
  ExperimentConfig cfg = defaults_for(Command::op_sweep);
  cfg.out = dir.string();
  cfg.n_ports = {4};
  cfg.apertures.clear();
  for (double w = 1.0; w <= 6.0; w += 0.25) cfg.apertures.push_back(w);
  cfg.snr_db = {10.0};
  cfg.methods = {"theory_enve"};
  cfg.threads = 1;
  run(cfg);
  const auto op = read_columns(dir / "op_theory_enve.csv").at("op");
  bool rises = false;
  for (std::size_t i = 1; i < op.size(); ++i) rises = rises || op[i] > op[i - 1] + 1e-4;
  CHECK(rises);
}

TEST_CASE("corr-table at the sparse configuration") {
  const fs::path dir = scratch("corr_table");
  ExperimentConfig cfg = defaults_for(Command::corr_table);
  cfg.cases = {{10, 3.5}};
  cfg.out = dir.string();
  cfg.threads = 1;
  run(cfg);
  const std::string text = slurp(dir / "corr_table_N10_W3.5_m3_mu1.csv");
  CHECK(text.rfind("lag,table_row,sim,coeff,enve\n1,J_1_2,", 0) == 0);
  const auto cols = read_columns(dir / "corr_table_N10_W3.5_m3_mu1.csv");
  REQUIRE(cols.at("lag").size() == 9);
  // Reference rows J_1_2 and J_1_3 (lags 1 and 3).
  CHECK(std::abs(cols.at("sim")[0] - -0.0159) < 0.02);
  CHECK(std::abs(cols.at("sim")[2] - 0.0943) < 0.02);
  CHECK(std::abs(cols.at("coeff")[2] - 0.2796) < 0.02);
  CHECK(std::abs(cols.at("enve")[2] - 0.0633) < 0.02);
  int closer = 0;
  for (std::size_t i = 0; i < 9; ++i) {
    if (i == 1) continue;
    closer += std::abs(cols.at("enve")[i] - cols.at("sim")[i]) < std::abs(cols.at("coeff")[i] - cols.at("sim")[i]);
  }
  CHECK(closer >= 6);
}

TEST_CASE("manifest reruns reproduce byte-identical CSVs, whatever the thread count") {
  const fs::path dir = scratch("rerun");
  ExperimentConfig cfg = defaults_for(Command::op_sweep);
  cfg.out = (dir / "a").string();
  cfg.n_ports = {5};
  cfg.apertures = {0.8};
  cfg.snr_db = {2.0, 8.0};
  cfg.methods = {"mc_fas", "theory_enve", "tas_mc"};
  cfg.samples = 3 * 4096 + 17;
  cfg.threads = 1;
  const RunResult first = run(cfg);

  Overrides o;
  o.out = (dir / "b").string();
  o.threads = 8;
  const RunResult second = run(resolve_config(Command::op_sweep, (dir / "a" / "manifest.json").string(), o));
  REQUIRE(first.files == second.files);
  for (const auto& f : first.files) {
    if (f == "config.json" || f == "manifest.json") continue;
    CHECK(slurp(dir / "a" / f) == slurp(dir / "b" / f));
  }
  const nlohmann::json manifest = nlohmann::json::parse(slurp(dir / "a" / "manifest.json"));
  CHECK(manifest.at("tool") == "fascop");
  CHECK(manifest.at("seed") == cfg.seed);
  CHECK(manifest.at("config").at("samples") == cfg.samples);
  CHECK(!manifest.at("version").get<std::string>().empty());
}

#ifdef FASCOP_BIN
TEST_CASE("fascop binary: exit codes and error JSON") {
  const fs::path dir = scratch("binary");
  const std::string bin = FASCOP_BIN;
  auto run_bin = [&](const std::string& args) {
    const std::string cmd = "\"" + bin + "\" " + args + " >" + (dir / "stdout").string() + " 2>" + (dir / "stderr").string();
    const int status = std::system(cmd.c_str());
    return WEXITSTATUS(status);
  };
  CHECK(run_bin("--help") == 0);
  CHECK(run_bin("scatter --no-such-flag") == 2);
  CHECK(nlohmann::json::parse(slurp(dir / "stderr")).at("error").at("type") == "UsageError");
  CHECK(run_bin("op-sweep --tol 0.5") == 2);
  const auto err = nlohmann::json::parse(slurp(dir / "stderr"));
  CHECK(err.at("error").at("type") == "DomainError");
  CHECK(err.at("error").at("message").get<std::string>().find("tol") != std::string::npos);
  CHECK(run_bin("validate --config " + (dir / "nope.json").string()) == 3);
  CHECK(run_bin("corr-table --samples 200 --threads 1 --seed 3 --out " + (dir / "ok").string()) == 0);
  CHECK(fs::exists(dir / "ok" / "corr_table_N8_W2.5_m3_mu1.csv"));
  CHECK(nlohmann::json::parse(slurp(dir / "ok" / "config.json")).at("seed") == 3);
}
#endif

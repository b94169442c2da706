#include "fascop/commands.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <map>
#include <sstream>

#include "fas/chan_gen.hpp"
#include "fas/copula.hpp"
#include "fas/correlation.hpp"
#include "fas/csv.hpp"
#include "fas/numerics.hpp"
#include "fas/outage.hpp"
#include "fas/rng.hpp"

#ifndef FASCOP_VERSION
#define FASCOP_VERSION "0.0.0"
#endif

namespace fascop {
namespace {

using fas::csv::format_number;
using nlohmann::json;

fas::GeneratorConfig generator_config(const Case& c, std::uint64_t seed, std::size_t samples, unsigned threads) {
  fas::GeneratorConfig g;
  g.geom = {c.n_ports, c.aperture};
  g.params = {c.m, c.mu};
  g.seed = seed;
  g.n_samples = samples;
  g.threads = threads;
  return g;
}

fas::CorrelationMatrix envelope_cov(const Case& c) {
  return fas::copula_covariance({c.n_ports, c.aperture}, c.m, fas::MatrixChoice::envelope);
}

class Output {
 public:
  explicit Output(const ExperimentConfig& cfg) : dir_(cfg.out) {}

  void write(const std::string& name, const std::string& contents) {
    fas::csv::write_file((dir_ / name).string(), contents);
    files_.push_back(name);
  }

  std::vector<std::string>& files() { return files_; }

 private:
  std::filesystem::path dir_;
  std::vector<std::string> files_;
};

std::string case_columns(const Case& c) {
  return std::to_string(c.n_ports) + ',' + format_number(c.aperture) + ',' + format_number(c.m) + ',' +
         format_number(c.mu);
}

double port12_pearson(const fas::Matrix& env) {
  if (env.cols() < 2) return 1.0;
  return fas::empirical_pearson(env, fas::PearsonTransform::envelope)(0, 1);
}

void run_scatter(const ExperimentConfig& cfg, Output& out) {
  std::ostringstream summary;
  summary << "n_ports,aperture,m,mu,source,pearson_1_2\n";
  const auto cases = cfg.expand();
  for (std::size_t i = 0; i < cases.size(); ++i) {
    const Case& c = cases[i];
    const std::uint64_t root = fas::derive_seed(cfg.seed, i);
    const fas::FasGeometry geom{c.n_ports, c.aperture};
    const fas::NakagamiParams params{c.m, c.mu};
    const fas::ChannelEnsemble physical =
        fas::generate_physical(generator_config(c, fas::derive_seed(root, 0), cfg.samples, cfg.threads));
    const fas::CorrelationMatrix r = fas::normal_scores_correlation(physical.envelopes);

    const std::pair<std::string, fas::ChannelEnsemble> sets[] = {
        {"physical", physical},
        {"copula_R", fas::generate_copula(geom, params, r, fas::derive_seed(root, 1), cfg.samples, cfg.threads, "R")},
        {"copula_J", fas::generate_copula(geom, params, fas::jakes_matrix(geom), fas::derive_seed(root, 2),
                                          cfg.samples, cfg.threads, "J")},
        {"copula_Jh", fas::generate_copula(geom, params, envelope_cov(c), fas::derive_seed(root, 3), cfg.samples,
                                           cfg.threads, "J_h")},
    };
    for (const auto& [source, ens] : sets) {
      std::ostringstream csv;
      fas::csv::write_ensemble(csv, ens);
      out.write("scatter_" + case_tag(c) + "_" + source + ".csv", csv.str());
      summary << case_columns(c) << ',' << source << ',' << format_number(port12_pearson(ens.envelopes)) << "\n";
    }
  }
  out.write("scatter_summary.csv", summary.str());
}

void run_pdf_cdf(const ExperimentConfig& cfg, Output& out) {
  const auto cases = cfg.expand();
  for (std::size_t i = 0; i < cases.size(); ++i) {
    const Case& c = cases[i];
    const std::uint64_t root = fas::derive_seed(cfg.seed, i);
    const fas::NakagamiParams params{c.m, c.mu};
    const fas::ChannelEnsemble ens =
        fas::generate_physical(generator_config(c, fas::derive_seed(root, 0), cfg.samples, cfg.threads));
    std::vector<double> peaks(ens.samples());
    for (std::size_t s = 0; s < ens.samples(); ++s) {
      const auto row = ens.envelopes.row(s);
      peaks[s] = *std::max_element(row.begin(), row.end());
    }
    std::sort(peaks.begin(), peaks.end());
    const double k = static_cast<double>(peaks.size());
    auto count_below = [&](double x) {
      return static_cast<double>(std::upper_bound(peaks.begin(), peaks.end(), x) - peaks.begin());
    };

    const fas::CorrelationMatrix covs[] = {fas::jakes_matrix({c.n_ports, c.aperture}), envelope_cov(c)};
    const std::uint64_t theory_seed = fas::derive_seed(root, 1);
    const double h = fas::default_pdf_step(params);
    const double step = cfg.r_max / static_cast<double>(cfg.r_points - 1);

    std::ostringstream csv;
    csv << "r,pdf_mc,cdf_mc,pdf_coeff,cdf_coeff,pdf_enve,cdf_enve\n";
    for (std::size_t j = 0; j < cfg.r_points; ++j) {
      const double r = step * static_cast<double>(j);
      const double lo = std::max(0.0, r - 0.5 * step);
      const double hi = r + 0.5 * step;
      const double pdf_mc = (count_below(hi) - count_below(lo)) / (k * (hi - lo));
      csv << format_number(r) << ',' << format_number(pdf_mc) << ',' << format_number(count_below(r) / k);
      for (const auto& cov : covs) {
        double pdf;
        if (r > h) {
          pdf = fas::peak_pdf(r, params, cov, cfg.tol, theory_seed, h);
        } else {
          const double tight = cfg.tol * h;
          pdf = (fas::peak_cdf(r + h, params, cov, tight, theory_seed) - fas::peak_cdf(r, params, cov, tight, theory_seed)) / h;
        }
        csv << ',' << format_number(pdf) << ',' << format_number(fas::peak_cdf(r, params, cov, cfg.tol, theory_seed));
      }
      csv << "\n";
    }
    out.write("pdf_cdf_" + case_tag(c) + ".csv", csv.str());
  }
}

json run_validate(const ExperimentConfig& cfg, Output& out) {
  constexpr double kRmseLimit = 1e-3;
  constexpr double kCorrLimit = 0.01;
  json cases_json = json::array();
  bool all_pass = true;
  const auto cases = cfg.expand();
  for (std::size_t i = 0; i < cases.size(); ++i) {
    const Case& c = cases[i];
    const fas::NakagamiParams params{c.m, c.mu};
    const fas::ChannelEnsemble ens =
        fas::generate_physical(generator_config(c, fas::derive_seed(cfg.seed, i), cfg.samples, cfg.threads));
    MarginalFit worst;
    json ports = json::array();
    for (std::size_t p = 0; p < ens.ports(); ++p) {
      const MarginalFit f = marginal_fit(ens.envelopes.column(p), params);
      ports.push_back({{"cdf_rmse", f.cdf_rmse}, {"pdf_rmse", f.pdf_rmse}, {"pdf_density_rmse", f.pdf_density_rmse}});
      worst.cdf_rmse = std::max(worst.cdf_rmse, f.cdf_rmse);
      worst.pdf_rmse = std::max(worst.pdf_rmse, f.pdf_rmse);
      worst.pdf_density_rmse = std::max(worst.pdf_density_rmse, f.pdf_density_rmse);
    }
    const fas::CorrelationMatrix jr = fas::gain_correlation(fas::jakes_matrix({c.n_ports, c.aperture}));
    const fas::CorrelationMatrix jh = fas::envelope_correlation(jr, c.m);
    double env_diff = 0.0, gain_diff = 0.0;
    if (ens.ports() > 1) {
      env_diff = fas::max_abs_diff(fas::empirical_pearson(ens.envelopes, fas::PearsonTransform::envelope).matrix(), jh.matrix());
      gain_diff = fas::max_abs_diff(fas::empirical_pearson(ens.envelopes, fas::PearsonTransform::gain).matrix(), jr.matrix());
    }
    const json pass = {{"cdf_rmse", worst.cdf_rmse < kRmseLimit},
                       {"pdf_rmse", worst.pdf_rmse < kRmseLimit},
                       {"envelope_corr", env_diff < kCorrLimit},
                       {"gain_corr", gain_diff < kCorrLimit}};
    for (const auto& [key, v] : pass.items()) all_pass = all_pass && v.get<bool>();
    cases_json.push_back({{"n_ports", c.n_ports},
                          {"aperture", c.aperture},
                          {"m", c.m},
                          {"mu", c.mu},
                          {"samples", ens.samples()},
                          {"seed", ens.provenance.seed},
                          {"cdf_rmse", worst.cdf_rmse},
                          {"pdf_rmse", worst.pdf_rmse},
                          {"pdf_density_rmse", worst.pdf_density_rmse},
                          {"envelope_corr_max_abs_diff", env_diff},
                          {"gain_corr_max_abs_diff", gain_diff},
                          {"ports", ports},
                          {"pass", pass}});
  }
  json report = {{"thresholds", {{"rmse", kRmseLimit}, {"corr_max_abs_diff", kCorrLimit}}},
                 {"cases", cases_json},
                 {"pass", all_pass}};
  out.write("validate.json", report.dump(2) + "\n");
  return report;
}

void run_op_sweep(const ExperimentConfig& cfg, Output& out) {
  std::map<std::string, std::ostringstream> files;
  const std::map<std::string, fas::OutageMethod> by_name{{"mc_fas", fas::OutageMethod::mc_fas},
                                                         {"theory_coeff", fas::OutageMethod::theory_coeff},
                                                         {"theory_enve", fas::OutageMethod::theory_enve},
                                                         {"tas_theory", fas::OutageMethod::tas_theory},
                                                         {"tas_mc", fas::OutageMethod::tas_mc}};
  for (const auto& name : cfg.methods)
    files[name] << "n_ports,aperture,m,mu,threshold_db,snr_db,op,stderr,method,K_or_tol,seed\n";

  std::vector<double> grid = cfg.snr_db;
  std::sort(grid.begin(), grid.end());
  const auto cases = cfg.expand();
  for (std::size_t i = 0; i < cases.size(); ++i) {
    const Case& c = cases[i];
    fas::OutageQuery base;
    base.geom = {c.n_ports, c.aperture};
    base.params = {c.m, c.mu};
    base.threshold_db = cfg.threshold_db;
    fas::SweepOptions o;
    o.tol = cfg.tol;
    o.rel_tol = cfg.rel_tol;
    o.mc_samples = cfg.samples;
    o.seed = fas::derive_seed(cfg.seed, i);
    o.threads = cfg.threads;
    for (const auto& name : cfg.methods) {
      const fas::OutageCurve curve = fas::outage_curve(base, grid, by_name.at(name), o);
      for (const auto& p : curve.points) {
        files[name] << case_columns(c) << ',' << format_number(cfg.threshold_db) << ',' << format_number(p.snr_db)
                    << ',' << format_number(p.op) << ',' << format_number(p.std_error) << ',' << name << ','
                    << format_number(p.k_or_tol) << ',' << p.seed << "\n";
      }
    }
  }
  for (const auto& name : cfg.methods) out.write("op_" + name + ".csv", files[name].str());
}

void run_corr_table(const ExperimentConfig& cfg, Output& out) {
  const auto cases = cfg.expand();
  for (std::size_t i = 0; i < cases.size(); ++i) {
    const Case& c = cases[i];
    std::ostringstream csv;
    csv << "lag,table_row,sim,coeff,enve\n";
    for (const CorrRow& row : corr_table(c, cfg.samples, fas::derive_seed(cfg.seed, i), cfg.threads))
      csv << row.lag << ',' << row.table_row << ',' << format_number(row.sim) << ',' << format_number(row.coeff) << ','
          << format_number(row.enve) << "\n";
    out.write("corr_table_" + case_tag(c) + ".csv", csv.str());
  }
}

}  // namespace

std::string case_tag(const Case& c) {
  return "N" + std::to_string(c.n_ports) + "_W" + format_number(c.aperture) + "_m" + format_number(c.m) + "_mu" +
         format_number(c.mu);
}

MarginalFit marginal_fit(std::span<const double> column, const fas::NakagamiParams& p, std::size_t points) {
  std::vector<double> x(column.begin(), column.end());
  std::sort(x.begin(), x.end());
  const double k = static_cast<double>(x.size());
  const fas::NakagamiDistribution law(p);
  const double top = law.quantile(0.9999);
  auto below = [&](double r) { return static_cast<double>(std::upper_bound(x.begin(), x.end(), r) - x.begin()) / k; };

  MarginalFit f;
  const double spacing = top / static_cast<double>(points - 1);
  for (std::size_t i = 0; i < points; ++i) {
    const double r = spacing * static_cast<double>(i);
    const double d = below(r) - law.cdf(r);
    f.cdf_rmse += d * d;
  }
  const double width = top / static_cast<double>(points);
  for (std::size_t i = 0; i < points; ++i) {
    const double lo = width * static_cast<double>(i), hi = lo + width;
    const double d = (below(hi) - below(lo)) - (law.cdf(hi) - law.cdf(lo));
    f.pdf_rmse += d * d;
    f.pdf_density_rmse += (d / width) * (d / width);
  }
  const double n = static_cast<double>(points);
  f.cdf_rmse = std::sqrt(f.cdf_rmse / n);
  f.pdf_rmse = std::sqrt(f.pdf_rmse / n);
  f.pdf_density_rmse = std::sqrt(f.pdf_density_rmse / n);
  return f;
}

std::vector<CorrRow> corr_table(const Case& c, std::size_t samples, std::uint64_t seed, unsigned threads) {
  const fas::FasGeometry geom{c.n_ports, c.aperture};
  const fas::NakagamiParams params{c.m, c.mu};
  auto pearson = [](const fas::ChannelEnsemble& e) {
    return fas::empirical_pearson(e.envelopes, fas::PearsonTransform::envelope);
  };
  const fas::CorrelationMatrix sim =
      pearson(fas::generate_physical(generator_config(c, fas::derive_seed(seed, 0), samples, threads)));
  const fas::CorrelationMatrix coeff = pearson(
      fas::generate_copula(geom, params, fas::jakes_matrix(geom), fas::derive_seed(seed, 1), samples, threads, "J"));
  const fas::CorrelationMatrix enve =
      pearson(fas::generate_copula(geom, params, envelope_cov(c), fas::derive_seed(seed, 2), samples, threads, "J_h"));

  std::vector<CorrRow> rows;
  for (std::size_t lag = 1; lag < c.n_ports; ++lag) {
    std::string label;
    if (lag == 1) label = "J_1_2";
    else if (lag >= 3) label = "J_1_" + std::to_string(lag);
    rows.push_back({lag, label, sim(0, lag), coeff(0, lag), enve(0, lag)});
  }
  return rows;
}

RunResult run(const ExperimentConfig& cfg) {
  cfg.validate();
  Output out(cfg);
  RunResult result;
  switch (cfg.command) {
    case Command::scatter: run_scatter(cfg, out); break;
    case Command::pdf_cdf: run_pdf_cdf(cfg, out); break;
    case Command::validate: result.report = run_validate(cfg, out); break;
    case Command::op_sweep: run_op_sweep(cfg, out); break;
    case Command::corr_table: run_corr_table(cfg, out); break;
  }

  const json config = to_json(cfg);
  out.write("config.json", config.dump(2) + "\n");
  const json manifest = {{"manifest_version", 1},
                         {"tool", "fascop"},
                         {"version", FASCOP_VERSION},
                         {"command", std::string(to_string(cfg.command))},
                         {"seed", cfg.seed},
                         {"files", out.files()},
                         {"config", config}};
  out.write("manifest.json", manifest.dump(2) + "\n");
  result.files = out.files();
  return result;
}

}  // namespace fascop

#include "fas/csv.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "fas/error.hpp"

namespace fas::csv {
namespace {

std::string json_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      default: out += c;
    }
  }
  return out;
}

// Parses the flat {"key": value, ...} object written by provenance_json.
std::map<std::string, std::string> parse_flat_json(const std::string& text) {
  std::map<std::string, std::string> out;
  std::size_t i = text.find('{');
  if (i == std::string::npos) throw IoError("ensemble CSV: provenance line is not a JSON object");
  ++i;
  auto skip_ws = [&] {
    while (i < text.size() && (text[i] == ' ' || text[i] == ',' || text[i] == '\t')) ++i;
  };
  auto read_string = [&] {
    if (text[i] != '"') throw IoError("ensemble CSV: malformed provenance JSON");
    std::string s;
    for (++i; i < text.size() && text[i] != '"'; ++i) {
      if (text[i] == '\\' && i + 1 < text.size()) {
        ++i;
        s += text[i] == 'n' ? '\n' : text[i];
      } else {
        s += text[i];
      }
    }
    ++i;
    return s;
  };
  for (;;) {
    skip_ws();
    if (i >= text.size()) throw IoError("ensemble CSV: unterminated provenance JSON");
    if (text[i] == '}') break;
    const std::string key = read_string();
    skip_ws();
    if (i >= text.size() || text[i] != ':') throw IoError("ensemble CSV: malformed provenance JSON");
    ++i;
    skip_ws();
    if (text[i] == '"') {
      out[key] = read_string();
    } else {
      const std::size_t start = i;
      while (i < text.size() && text[i] != ',' && text[i] != '}') ++i;
      std::string v = text.substr(start, i - start);
      while (!v.empty() && v.back() == ' ') v.pop_back();
      out[key] = v;
    }
  }
  return out;
}

double parse_double(const std::string& s, const char* what) {
  std::size_t used = 0;
  double v;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    throw IoError(std::string("CSV: cannot parse ") + what + " from '" + s + "'");
  }
  if (used != s.size()) throw IoError(std::string("CSV: trailing characters in ") + what);
  return v;
}

}  // namespace

std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

std::string provenance_json(const Provenance& p) {
  std::ostringstream out;
  out << "{\"generator\": \"" << to_string(p.generator) << "\", \"covariance_id\": \"" << json_escape(p.covariance_id)
      << "\", \"seed\": " << p.seed << ", \"n_ports\": " << p.n_ports
      << ", \"aperture\": " << format_number(p.aperture) << ", \"m\": " << format_number(p.m)
      << ", \"mu\": " << format_number(p.mu) << "}";
  return out.str();
}

void write_ensemble(std::ostream& out, const ChannelEnsemble& ens) {
  out << "# " << provenance_json(ens.provenance) << "\n";
  for (std::size_t c = 0; c < ens.ports(); ++c) out << (c ? "," : "") << "port_" << (c + 1);
  out << "\n";
  std::string line;
  for (std::size_t r = 0; r < ens.samples(); ++r) {
    line.clear();
    auto row = ens.envelopes.row(r);
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c) line += ',';
      line += format_number(row[c]);
    }
    line += '\n';
    out << line;
  }
}

ChannelEnsemble read_ensemble(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line.rfind("#", 0) != 0) throw IoError("ensemble CSV: missing provenance line");
  const auto fields = parse_flat_json(line);
  auto field = [&](const char* key) -> const std::string& {
    auto it = fields.find(key);
    if (it == fields.end()) throw IoError(std::string("ensemble CSV: provenance lacks '") + key + "'");
    return it->second;
  };

  Provenance p;
  p.generator = generator_id_from_string(field("generator"));
  p.covariance_id = field("covariance_id");
  p.seed = std::stoull(field("seed"));
  p.n_ports = std::stoul(field("n_ports"));
  p.aperture = parse_double(field("aperture"), "aperture");
  p.m = parse_double(field("m"), "m");
  p.mu = parse_double(field("mu"), "mu");

  if (!std::getline(in, line)) throw IoError("ensemble CSV: missing header");
  std::size_t ports = 1;
  for (char c : line) ports += c == ',';
  if (ports != p.n_ports) throw IoError("ensemble CSV: header width does not match n_ports");

  std::vector<double> values;
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::size_t start = 0;
    std::size_t count = 0;
    for (;;) {
      const std::size_t comma = line.find(',', start);
      values.push_back(parse_double(line.substr(start, comma - start), "envelope"));
      ++count;
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    if (count != ports) throw IoError("ensemble CSV: row " + std::to_string(rows + 1) + " has wrong width");
    ++rows;
  }
  Matrix env(rows, ports);
  std::copy(values.begin(), values.end(), env.data().begin());
  ChannelEnsemble ens{std::move(env), std::move(p)};
  ens.validate();
  return ens;
}

void write_correlation(std::ostream& out, const CorrelationMatrix& c) {
  const std::size_t n = c.size();
  out << "port";
  for (std::size_t j = 0; j < n; ++j) out << ',' << (j + 1);
  out << "\n";
  for (std::size_t i = 0; i < n; ++i) {
    out << (i + 1);
    for (std::size_t j = 0; j < n; ++j) out << ',' << format_number(c(i, j));
    out << "\n";
  }
}

void write_outage_curve(std::ostream& out, const OutageCurve& curve) {
  out << "snr_db,op,stderr,method,K_or_tol,seed\n";
  for (const auto& p : curve.points) {
    out << format_number(p.snr_db) << ',' << format_number(p.op) << ',' << format_number(p.std_error) << ','
        << to_string(curve.method) << ',' << format_number(p.k_or_tol) << ',' << p.seed << "\n";
  }
}

void write_file(const std::string& path, const std::string& contents) {
  const std::filesystem::path target(path);
  if (target.has_parent_path()) std::filesystem::create_directories(target.parent_path());
  const std::filesystem::path tmp = target.string() + ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("cannot open " + tmp.string() + " for writing");
    f << contents;
    if (!f) throw IoError("write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, target, ec);
  if (ec) throw IoError("cannot move " + tmp.string() + " to " + path + ": " + ec.message());
}

}  // namespace fas::csv

#pragma once

// CSV exchange formats (RFC 4180, '.' decimal separator, numbers printed
// with 9 significant digits).
//
//   ensemble:    "# {provenance json}" line, header port_1..port_N, K rows
//   correlation: header "port,1,...,N", then one row per port index
//   outage:      header snr_db,op,stderr,method,K_or_tol,seed

#include <iosfwd>
#include <string>

#include "fas/correlation.hpp"
#include "fas/ensemble.hpp"
#include "fas/outage.hpp"

namespace fas::csv {

std::string format_number(double v);

std::string provenance_json(const Provenance& p);

void write_ensemble(std::ostream& out, const ChannelEnsemble& ens);
ChannelEnsemble read_ensemble(std::istream& in);

void write_correlation(std::ostream& out, const CorrelationMatrix& c);

void write_outage_curve(std::ostream& out, const OutageCurve& curve);

// Writes via a temporary sibling and renames, so readers never see a
// partial file. Throws IoError.
void write_file(const std::string& path, const std::string& contents);

}  // namespace fas::csv

#pragma once

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "twinbeam/counts.hpp"
#include "twinbeam/errors.hpp"
#include "twinbeam/estimate.hpp"
#include "twinbeam/fock.hpp"
#include "twinbeam/sweep.hpp"

namespace twinbeam {

/// Ordered key=value pairs carried in file headers; order is preserved so
/// identical invocations produce byte-identical files.
using Metadata = std::vector<std::pair<std::string, std::string>>;

namespace detail {

/// Shortest round-trippable decimal form.
inline std::string format_double(double v) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

inline void write_header_line(std::ostream& os, const Metadata& metadata) {
  os << '#';
  for (const auto& [key, value] : metadata) os << ' ' << key << '=' << value;
  os << '\n';
}

template <class T>
T parse_number(std::string_view text, const char* what, int line_no) {
  T value{};
  const auto [ptr, ec] =
      std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size())
    throw CsvFormatError("line " + std::to_string(line_no) + ": bad " + what +
                         " '" + std::string(text) + "'");
  return value;
}

}  // namespace detail

/// Counts file: one `# key=value ...` header line (pulses first), then
/// sparse ascending `k,l,count` rows with zero cells omitted.
inline void write_counts_csv(std::ostream& os, const JointCounts& counts,
                             const Metadata& extra = {}) {
  Metadata metadata{{"pulses", std::to_string(counts.total_pulses())}};
  metadata.insert(metadata.end(), extra.begin(), extra.end());
  detail::write_header_line(os, metadata);
  for (int k = 0; k <= counts.k_max(); ++k)
    for (int l = 0; l <= counts.l_max(); ++l)
      if (const std::uint64_t c = counts.at(k, l))
        os << k << ',' << l << ',' << c << '\n';
}

struct CountsFile {
  JointCounts counts;
  Metadata metadata;
};

inline CountsFile read_counts_csv(std::istream& is) {
  std::string line;
  int line_no = 0;

  // Header: the first non-blank line must be the metadata comment.
  for (;;) {
    if (!std::getline(is, line))
      throw CsvFormatError("missing '# pulses=...' header line");
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") != std::string::npos) break;
  }
  if (line.empty() || line[0] != '#')
    throw CsvFormatError("first line must be a '# pulses=...' header");

  Metadata metadata;
  bool have_pulses = false;
  std::uint64_t pulses = 0;
  {
    std::string_view rest(line);
    rest.remove_prefix(1);
    while (!rest.empty()) {
      const std::size_t start = rest.find_first_not_of(" \t");
      if (start == std::string_view::npos) break;
      rest.remove_prefix(start);
      const std::size_t stop = rest.find_first_of(" \t");
      const std::string_view token = rest.substr(0, stop);
      rest.remove_prefix(token.size());
      const std::size_t eq = token.find('=');
      if (eq == std::string_view::npos || eq == 0)
        throw CsvFormatError("malformed header token '" + std::string(token) +
                             "'");
      const std::string key(token.substr(0, eq));
      const std::string value(token.substr(eq + 1));
      if (key == "pulses") {
        pulses = detail::parse_number<std::uint64_t>(value, "pulse count",
                                                     line_no);
        have_pulses = true;
      }
      metadata.emplace_back(key, value);
    }
  }
  if (!have_pulses)
    throw CsvFormatError("header line does not declare pulses=<N>");
  if (pulses == 0) throw CsvFormatError("pulses must be > 0");

  struct Cell {
    int k, l;
    std::uint64_t count;
  };
  std::vector<Cell> cells;
  int k_max = 0, l_max = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    if (line[0] == '#') continue;
    if (line == "k,l,count") continue;  // optional column header
    const std::size_t c1 = line.find(',');
    const std::size_t c2 = c1 == std::string::npos ? c1 : line.find(',', c1 + 1);
    if (c2 == std::string::npos)
      throw CsvFormatError("line " + std::to_string(line_no) +
                           ": expected k,l,count");
    const std::string_view sv(line);
    const int k = detail::parse_number<int>(sv.substr(0, c1), "k", line_no);
    const int l =
        detail::parse_number<int>(sv.substr(c1 + 1, c2 - c1 - 1), "l", line_no);
    const std::uint64_t count = detail::parse_number<std::uint64_t>(
        sv.substr(c2 + 1), "count", line_no);
    if (k < 0 || l < 0)
      throw CsvFormatError("line " + std::to_string(line_no) +
                           ": negative photon number");
    cells.push_back({k, l, count});
    k_max = std::max(k_max, k);
    l_max = std::max(l_max, l);
  }

  JointCounts counts(k_max, l_max);
  for (const Cell& c : cells) counts.add(c.k, c.l, c.count);
  counts.set_total_pulses(pulses);
  if (counts.total_events() > pulses)
    throw CsvFormatError("recorded events exceed declared pulses");
  return {std::move(counts), std::move(metadata)};
}

/// Distribution file: `# key=value ...` header, then `n,p` rows.
inline void write_distribution_csv(std::ostream& os,
                                   const PhotonDistribution& dist,
                                   const Metadata& metadata = {}) {
  detail::write_header_line(os, metadata);
  os << "n,p\n";
  for (int n = 0; n <= dist.n_max(); ++n)
    os << n << ',' << detail::format_double(dist.p(n)) << '\n';
}

/// Sweep table: `# key=value ...` header, then long-format
/// `eta,mean_n,value` rows ordered by grid index.
inline void write_sweep_csv(std::ostream& os, const SweepResult& result,
                            const Metadata& metadata = {}) {
  detail::write_header_line(os, metadata);
  os << "eta,mean_n,value\n";
  for (std::size_t i = 0; i < result.value.size(); ++i)
    os << detail::format_double(result.eta[i]) << ','
       << detail::format_double(result.mean_n[i]) << ','
       << detail::format_double(result.value[i]) << '\n';
}

namespace detail {

inline nlohmann::ordered_json report_value_json(const ReportValue& v) {
  return {{"value", v.value}, {"ci_low", v.ci_low}, {"ci_high", v.ci_high}};
}

}  // namespace detail

inline const char* arm_name(Arm arm) {
  return arm == Arm::signal ? "signal" : "idler";
}

/// Flat report object (schema 1): one value/ci_low/ci_high block per
/// quantity, series quantities carrying their order. NaN serializes as null.
inline nlohmann::ordered_json report_to_json(const EstimateReport& report) {
  nlohmann::ordered_json j;
  j["schema"] = 1;
  j["pulses"] = report.pulses;
  j["herald_events"] = report.herald_events;
  j["herald_arm"] = arm_name(report.herald_arm);
  j["herald_n"] = report.herald_n;
  j["car"] = detail::report_value_json(report.car);
  j["mean_pdc"] = detail::report_value_json(report.mean_pdc);
  j["klyshko_signal"] = detail::report_value_json(report.klyshko_signal);
  j["klyshko_idler"] = detail::report_value_json(report.klyshko_idler);
  j["eff_klyshko_signal"] =
      detail::report_value_json(report.eff_klyshko_signal);
  j["eff_klyshko_idler"] = detail::report_value_json(report.eff_klyshko_idler);
  j["mean_corrected"] = detail::report_value_json(report.mean_corrected);
  nlohmann::ordered_json parity = detail::report_value_json(report.parity_truncated);
  parity["order"] = report.truncation_order;
  j["parity_truncated"] = parity;
  nlohmann::ordered_json g;
  for (std::size_t i = 0; i < report.heralded_g.size(); ++i) {
    const int order = static_cast<int>(i) + 2;
    nlohmann::ordered_json entry = detail::report_value_json(report.heralded_g[i]);
    entry["order"] = order;
    g["g" + std::to_string(order)] = entry;
  }
  j["heralded_g"] = g;
  j["warnings"] = report.warnings;
  return j;
}

/// Opens `path` for writing, or throws.
inline std::ofstream open_output(const std::string& path) {
  std::ofstream os(path);
  if (!os) throw Error("cannot open '" + path + "' for writing");
  return os;
}

inline std::ifstream open_input(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw Error("cannot open '" + path + "' for reading");
  return is;
}

}  // namespace twinbeam

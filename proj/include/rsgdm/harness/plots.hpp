#pragma once

#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "rsgdm/harness/metrics.hpp"

namespace rsgdm::harness {

/// Splits a metrics CSV into two-column series files
/// `<optimizer>.<split>.<loss|accuracy>.csv` (header `epoch,<metric>`).
/// The optimizer name is the metrics file name up to its first '.'.
/// Accuracy series are skipped when the column is blank throughout.
inline std::vector<std::filesystem::path> emit_plot_data(const std::filesystem::path& metrics_csv,
                                                         const std::filesystem::path& out_dir) {
  std::ifstream in(metrics_csv);
  if (!in) throw IoError("cannot read '" + metrics_csv.string() + "'");
  const auto records = read_metrics_csv(in);
  const auto name = metrics_csv.filename().string();
  const auto optimizer = name.substr(0, name.find('.'));

  std::map<std::string, std::vector<std::pair<std::int64_t, double>>> series;
  std::map<std::string, std::int64_t> last_epoch;
  for (const auto& r : records) {
    const std::string split(to_string(r.split));
    if (auto it = last_epoch.find(split); it != last_epoch.end() && r.epoch <= it->second) {
      throw IoError("metrics csv: epochs not strictly increasing for split " + split);
    }
    last_epoch[split] = r.epoch;
    series[split + ".loss"].emplace_back(r.epoch, r.loss);
    if (r.accuracy) series[split + ".accuracy"].emplace_back(r.epoch, *r.accuracy);
  }

  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  std::vector<std::filesystem::path> written;
  for (const auto& [key, points] : series) {
    const auto path = out_dir / (optimizer + "." + key + ".csv");
    std::ofstream os(path, std::ios::trunc);
    if (!os) throw IoError("cannot write '" + path.string() + "'");
    os << "epoch," << key.substr(key.find('.') + 1) << '\n';
    for (const auto& [epoch, value] : points) os << epoch << ',' << format_real(value) << '\n';
    if (!os) throw IoError("failed writing '" + path.string() + "'");
    written.push_back(path);
  }
  return written;
}

/// Reads a series file back as (epoch, value) pairs.
inline std::vector<std::pair<std::int64_t, double>> read_series(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read '" + path.string() + "'");
  std::string line;
  std::getline(in, line);
  std::vector<std::pair<std::int64_t, double>> out;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    const auto f = detail::split_csv_line(line);
    if (f.size() != 2) throw IoError("series line " + std::to_string(lineno) + ": expected 2 fields");
    out.emplace_back(detail::parse_field<std::int64_t>(f[0], lineno), detail::parse_field<double>(f[1], lineno));
  }
  return out;
}

}  // namespace rsgdm::harness

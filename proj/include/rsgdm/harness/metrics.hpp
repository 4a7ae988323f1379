#pragma once

#include <charconv>
#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "rsgdm/harness/config.hpp"

namespace rsgdm::harness {

/// Unreadable/unwritable file or malformed CSV. Maps to exit code 3.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Non-finite loss or a failed identity gate. Maps to exit code 2.
class NumericFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr std::string_view kMetricsHeader = "epoch,split,loss,accuracy,lr,wall_ms";

enum class Split { train, valid };

inline std::string_view to_string(Split s) { return s == Split::train ? "train" : "valid"; }

struct MetricsRecord {
  std::int64_t epoch{};
  Split split{Split::train};
  double loss{};
  std::optional<double> accuracy;  // blank for regression tasks
  double lr{};
  std::int64_t wall_ms{};

  bool operator==(const MetricsRecord&) const = default;
};

inline std::string format_real(double x) { return detail::format_double(x); }

inline void write_metrics_header(std::ostream& os) { os << kMetricsHeader << '\n'; }

inline void write_metrics_row(std::ostream& os, const MetricsRecord& r) {
  os << r.epoch << ',' << to_string(r.split) << ',' << format_real(r.loss) << ','
     << (r.accuracy ? format_real(*r.accuracy) : std::string{}) << ',' << format_real(r.lr) << ',' << r.wall_ms
     << '\n';
}

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

template <typename T>
T parse_field(const std::string& s, int lineno) {
  T v{};
  const char* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (s.empty() || ec != std::errc{} || ptr != end) {
    throw IoError("metrics csv line " + std::to_string(lineno) + ": bad field '" + s + "'");
  }
  return v;
}

}  // namespace detail

inline std::vector<MetricsRecord> read_metrics_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kMetricsHeader) throw IoError("metrics csv: missing or wrong header");
  std::vector<MetricsRecord> out;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto f = detail::split_csv_line(line);
    if (f.size() != 6) throw IoError("metrics csv line " + std::to_string(lineno) + ": expected 6 fields");
    MetricsRecord r;
    r.epoch = detail::parse_field<std::int64_t>(f[0], lineno);
    if (f[1] == "train") r.split = Split::train;
    else if (f[1] == "valid") r.split = Split::valid;
    else throw IoError("metrics csv line " + std::to_string(lineno) + ": bad split '" + f[1] + "'");
    r.loss = detail::parse_field<double>(f[2], lineno);
    if (!f[3].empty()) r.accuracy = detail::parse_field<double>(f[3], lineno);
    r.lr = detail::parse_field<double>(f[4], lineno);
    r.wall_ms = detail::parse_field<std::int64_t>(f[5], lineno);
    out.push_back(r);
  }
  return out;
}

/// Headline numbers of a run, shaped like one row of a results table.
struct RunSummary {
  std::string config_hash;
  std::optional<MetricsRecord> final_train;
  std::optional<MetricsRecord> final_valid;
  std::optional<double> best_valid_accuracy;
  std::int64_t best_valid_epoch{-1};
  std::int64_t total_steps{};
};

/// Derives the metric part of a RunSummary from records. Ties on best valid
/// accuracy go to the later epoch.
inline RunSummary summarize(const std::vector<MetricsRecord>& records) {
  RunSummary s;
  for (const auto& r : records) {
    if (r.split == Split::train) {
      if (!s.final_train || r.epoch >= s.final_train->epoch) s.final_train = r;
    } else {
      if (!s.final_valid || r.epoch >= s.final_valid->epoch) s.final_valid = r;
      if (r.accuracy && (!s.best_valid_accuracy || *r.accuracy >= *s.best_valid_accuracy)) {
        s.best_valid_accuracy = r.accuracy;
        s.best_valid_epoch = r.epoch;
      }
    }
  }
  return s;
}

inline void write_summary(std::ostream& os, const RunSummary& s) {
  auto opt = [](const std::optional<double>& v) { return v ? format_real(*v) : std::string{}; };
  os << "config_hash = " << s.config_hash << '\n';
  if (s.final_train) {
    os << "final_train_loss = " << format_real(s.final_train->loss) << '\n';
    os << "final_train_accuracy = " << opt(s.final_train->accuracy) << '\n';
  }
  if (s.final_valid) {
    os << "final_valid_loss = " << format_real(s.final_valid->loss) << '\n';
    os << "final_valid_accuracy = " << opt(s.final_valid->accuracy) << '\n';
  }
  os << "best_valid_accuracy = " << opt(s.best_valid_accuracy) << '\n';
  os << "best_valid_epoch = " << s.best_valid_epoch << '\n';
  os << "total_steps = " << s.total_steps << '\n';
}

inline constexpr std::string_view kComparisonHeader =
    "optimizer,final_train_loss,final_train_accuracy,final_valid_loss,final_valid_accuracy,"
    "best_valid_accuracy,best_valid_epoch,total_steps";

inline void write_comparison_row(std::ostream& os, std::string_view optimizer, const RunSummary& s) {
  auto opt = [](const std::optional<double>& v) { return v ? format_real(*v) : std::string{}; };
  os << optimizer << ',';
  os << (s.final_train ? format_real(s.final_train->loss) : "") << ',';
  os << (s.final_train ? opt(s.final_train->accuracy) : "") << ',';
  os << (s.final_valid ? format_real(s.final_valid->loss) : "") << ',';
  os << (s.final_valid ? opt(s.final_valid->accuracy) : "") << ',';
  os << opt(s.best_valid_accuracy) << ',';
  os << (s.best_valid_accuracy ? std::to_string(s.best_valid_epoch) : "") << ',';
  os << s.total_steps << '\n';
}

}  // namespace rsgdm::harness

#pragma once

#include <charconv>
#include <cstdint>
#include <istream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "rsgdm/ema_analysis.hpp"
#include "rsgdm/mlp.hpp"
#include "rsgdm/optim.hpp"

namespace rsgdm::harness {

/// Bad config text, unknown key, or out-of-range value. Maps to exit code 1.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum class Task { quadratic, rosenbrock, logreg, mlp, linear, bias_analysis };

inline std::string_view to_string(Task t) {
  switch (t) {
    case Task::quadratic: return "quadratic";
    case Task::rosenbrock: return "rosenbrock";
    case Task::logreg: return "logreg";
    case Task::mlp: return "mlp";
    case Task::linear: return "linear";
    case Task::bias_analysis: return "bias-analysis";
  }
  return "?";
}

inline Task parse_task(std::string_view s) {
  if (s == "quadratic") return Task::quadratic;
  if (s == "rosenbrock") return Task::rosenbrock;
  if (s == "logreg") return Task::logreg;
  if (s == "mlp") return Task::mlp;
  if (s == "linear") return Task::linear;
  if (s == "bias-analysis") return Task::bias_analysis;
  throw ConfigError("unknown task '" + std::string(s) + "'");
}

inline bool is_classification(Task t) { return t == Task::logreg || t == Task::mlp; }

/// Defaults follow the reference protocol: beta 0.9, alpha 0.01, batch 128,
/// weight decay 5e-4, learning rate halved every 50 epochs.
struct ExperimentConfig {
  Task task{Task::logreg};
  OptimizerKind optimizer{OptimizerKind::rsgdm};
  double beta{0.9};
  ScheduleSpec schedule{};
  WeightDecaySpec weight_decay{};
  std::size_t batch_size{128};
  std::int64_t epochs{200};
  std::uint64_t seed{0};
  std::string output_dir{"runs"};

  // task shape
  std::size_t n_train{2000};
  std::size_t n_valid{500};
  std::size_t dim{20};
  double margin{0.5};
  std::vector<std::size_t> hidden{16};
  mlp::Activation activation{mlp::Activation::tanh};
  std::int64_t steps_per_epoch{50};

  // bias-analysis task
  ema::StreamKind stream{ema::StreamKind::linear_trend};
  double slope{1.0};
  std::int64_t t_max{200};

  bool wall_clock{false};
  bool export_data{false};

  void validate() const {
    try {
      schedule.validate();
      if (optimizer != OptimizerKind::sgd) detail::check_hyper(beta, schedule.alpha0);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
    if (!(weight_decay.lambda >= 0)) throw ConfigError("weight_decay must be non-negative");
    if (batch_size == 0) throw ConfigError("batch_size must be positive");
    if (epochs <= 0) throw ConfigError("epochs must be positive");
    if (n_train == 0 || n_valid == 0 || dim == 0) throw ConfigError("n_train, n_valid and dim must be positive");
    if (!(margin > 0)) throw ConfigError("margin must be positive");
    if (steps_per_epoch <= 0) throw ConfigError("steps_per_epoch must be positive");
    if (t_max < 2) throw ConfigError("t_max must be at least 2");
    for (auto h : hidden) {
      if (h == 0) throw ConfigError("hidden layer widths must be positive");
    }
  }
};

/// Every recognised key, in canonical order.
inline const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys{
      "task",       "optimizer", "beta",    "alpha0", "lr_period",       "lr_factor",  "weight_decay",
      "batch_size", "epochs",    "seed",    "output_dir", "n_train",     "n_valid",    "dim",
      "margin",     "hidden",    "activation", "steps_per_epoch", "stream", "slope",  "t_max",
      "wall_clock", "export_data"};
  return keys;
}

namespace detail {

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

template <typename T>
T parse_number(const std::string& key, const std::string& v) {
  T out{};
  const char* end = v.data() + v.size();
  auto [ptr, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc{} || ptr != end) throw ConfigError("bad value for '" + key + "': '" + v + "'");
  return out;
}

inline bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError("bad boolean for '" + key + "': '" + v + "'");
}

inline std::string format_double(double x) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, ptr);
}

}  // namespace detail

/// Applies one key = value assignment. Unknown keys are errors.
inline void set_config_value(ExperimentConfig& c, const std::string& key, const std::string& value) {
  using detail::parse_number;
  try {
    if (key == "task") c.task = parse_task(value);
    else if (key == "optimizer") c.optimizer = parse_optimizer(value);
    else if (key == "beta") c.beta = parse_number<double>(key, value);
    else if (key == "alpha0") c.schedule.alpha0 = parse_number<double>(key, value);
    else if (key == "lr_period") c.schedule.period = parse_number<std::int64_t>(key, value);
    else if (key == "lr_factor") c.schedule.factor = parse_number<double>(key, value);
    else if (key == "weight_decay") c.weight_decay.lambda = parse_number<double>(key, value);
    else if (key == "batch_size") c.batch_size = parse_number<std::size_t>(key, value);
    else if (key == "epochs") c.epochs = parse_number<std::int64_t>(key, value);
    else if (key == "seed") c.seed = parse_number<std::uint64_t>(key, value);
    else if (key == "output_dir") c.output_dir = value;
    else if (key == "n_train") c.n_train = parse_number<std::size_t>(key, value);
    else if (key == "n_valid") c.n_valid = parse_number<std::size_t>(key, value);
    else if (key == "dim") c.dim = parse_number<std::size_t>(key, value);
    else if (key == "margin") c.margin = parse_number<double>(key, value);
    else if (key == "hidden") {
      c.hidden.clear();
      std::stringstream ss(value);
      std::string item;
      while (std::getline(ss, item, ',')) {
        item = detail::trim(item);
        if (!item.empty()) c.hidden.push_back(parse_number<std::size_t>(key, item));
      }
    } else if (key == "activation") c.activation = mlp::parse_activation(value);
    else if (key == "steps_per_epoch") c.steps_per_epoch = parse_number<std::int64_t>(key, value);
    else if (key == "stream") c.stream = ema::parse_stream_kind(value);
    else if (key == "slope") c.slope = parse_number<double>(key, value);
    else if (key == "t_max") c.t_max = parse_number<std::int64_t>(key, value);
    else if (key == "wall_clock") c.wall_clock = detail::parse_bool(key, value);
    else if (key == "export_data") c.export_data = detail::parse_bool(key, value);
    else throw ConfigError("unknown config key '" + key + "'");
  } catch (const ConfigError&) {
    throw;
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

/// Parses `key = value` lines; `#` starts a comment.
inline std::map<std::string, std::string> parse_key_values(std::istream& in) {
  std::map<std::string, std::string> kv;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    const auto text = detail::trim(line);
    if (text.empty()) continue;
    const auto eq = text.find('=');
    if (eq == std::string::npos) throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
    auto key = detail::trim(std::string_view(text).substr(0, eq));
    auto value = detail::trim(std::string_view(text).substr(eq + 1));
    if (key.empty()) throw ConfigError("line " + std::to_string(lineno) + ": empty key");
    kv[key] = value;
  }
  return kv;
}

inline ExperimentConfig apply_overrides(ExperimentConfig c, const std::map<std::string, std::string>& kv) {
  for (const auto& [k, v] : kv) set_config_value(c, k, v);
  return c;
}

inline ExperimentConfig parse_config(std::istream& in) {
  auto c = apply_overrides(ExperimentConfig{}, parse_key_values(in));
  c.validate();
  return c;
}

/// Canonical key = value rendering in config_keys() order.
inline std::string to_config_text(const ExperimentConfig& c) {
  using detail::format_double;
  std::string hidden;
  for (std::size_t i = 0; i < c.hidden.size(); ++i) hidden += (i ? "," : "") + std::to_string(c.hidden[i]);
  const std::map<std::string, std::string> values{
      {"task", std::string(to_string(c.task))},
      {"optimizer", std::string(to_string(c.optimizer))},
      {"beta", format_double(c.beta)},
      {"alpha0", format_double(c.schedule.alpha0)},
      {"lr_period", std::to_string(c.schedule.period)},
      {"lr_factor", format_double(c.schedule.factor)},
      {"weight_decay", format_double(c.weight_decay.lambda)},
      {"batch_size", std::to_string(c.batch_size)},
      {"epochs", std::to_string(c.epochs)},
      {"seed", std::to_string(c.seed)},
      {"output_dir", c.output_dir},
      {"n_train", std::to_string(c.n_train)},
      {"n_valid", std::to_string(c.n_valid)},
      {"dim", std::to_string(c.dim)},
      {"margin", format_double(c.margin)},
      {"hidden", hidden},
      {"activation", c.activation == mlp::Activation::tanh ? "tanh" : "relu"},
      {"steps_per_epoch", std::to_string(c.steps_per_epoch)},
      {"stream", std::string(ema::to_string(c.stream))},
      {"slope", format_double(c.slope)},
      {"t_max", std::to_string(c.t_max)},
      {"wall_clock", c.wall_clock ? "true" : "false"},
      {"export_data", c.export_data ? "true" : "false"},
  };
  std::string out;
  for (const auto& k : config_keys()) out += k + " = " + values.at(k) + "\n";
  return out;
}

/// FNV-1a over the canonical text, excluding output_dir (where a run is written
/// does not change what it computes).
inline std::string config_hash(const ExperimentConfig& c) {
  auto copy = c;
  copy.output_dir.clear();
  const auto text = to_config_text(copy);
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  static constexpr char hex[] = "0123456789abcdef";
  for (int i = 15; i >= 0; --i, h >>= 4) buf[i] = hex[h & 0xf];
  buf[16] = '\0';
  return buf;
}

}  // namespace rsgdm::harness

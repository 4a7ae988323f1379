// Command-line front end: train, compare, analyze-bias, emit-plots.
//
// Exit codes: 0 success, 1 usage error, 2 numeric failure, 3 I/O error.

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "rsgdm/harness.hpp"

namespace {

namespace fs = std::filesystem;
using namespace rsgdm;
using namespace rsgdm::harness;

enum Exit { kOk = 0, kUsage = 1, kNumeric = 2, kIo = 3 };

/// --config plus one --flag per config key (underscores become dashes).
struct ConfigOptions {
  std::string config_path;
  std::map<std::string, std::string> overrides;

  void attach(CLI::App& app) {
    app.add_option("-c,--config", config_path, "key = value config file");
    for (const auto& key : config_keys()) {
      std::string flag = "--" + key;
      std::replace(flag.begin(), flag.end(), '_', '-');
      app.add_option(flag, overrides[key], "override config key '" + key + "'");
    }
  }

  ExperimentConfig resolve(const CLI::App& app) const {
    ExperimentConfig c;
    if (!config_path.empty()) {
      std::ifstream in(config_path);
      if (!in) throw IoError("cannot read config '" + config_path + "'");
      c = apply_overrides(c, parse_key_values(in));
    }
    for (const auto& key : config_keys()) {
      std::string flag = "--" + key;
      std::replace(flag.begin(), flag.end(), '_', '-');
      if (app.count(flag) > 0) set_config_value(c, key, overrides.at(key));
    }
    c.validate();
    return c;
  }
};

void print_summary(std::string_view optimizer, const RunResult& r) {
  std::cout << optimizer << ": " << r.summary.total_steps << " steps";
  if (r.summary.final_train) {
    std::cout << ", train loss " << format_real(r.summary.final_train->loss);
    if (r.summary.final_train->accuracy) std::cout << ", train acc " << format_real(*r.summary.final_train->accuracy);
  }
  if (r.summary.final_valid && r.summary.final_valid->accuracy) {
    std::cout << ", valid acc " << format_real(*r.summary.final_valid->accuracy);
  }
  std::cout << " -> " << r.metrics_path.string() << '\n';
}

int run_bias(std::ostream& os, ema::StreamKind kind, const ema::StreamParams& params,
             const std::vector<double>& betas, std::int64_t t_max) {
  const auto res = analyze_bias(os, kind, params, betas, t_max);
  std::cerr << res.rows << " rows, max identity residual " << format_real(res.max_residual)
            << (res.all_dominated ? ", |zeta| <= |xi| on every row" : ", |zeta| > |xi| on some rows") << '\n';
  if (!res.passed()) {
    std::cerr << "identity residual exceeds " << format_real(kIdentityTolerance) << '\n';
    return kNumeric;
  }
  return kOk;
}

std::ofstream open_or_throw(const fs::path& p) {
  std::ofstream os(p, std::ios::trunc);
  if (!os) throw IoError("cannot write '" + p.string() + "'");
  return os;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"SGD / SGDM / RSGDM optimizer harness"};
  app.require_subcommand(1);

  auto* train = app.add_subcommand("train", "run one experiment");
  ConfigOptions train_opts;
  train_opts.attach(*train);

  auto* cmp = app.add_subcommand("compare", "run several optimizers on the same task and seed");
  ConfigOptions cmp_opts;
  cmp_opts.attach(*cmp);
  std::vector<std::string> optimizer_names;
  cmp->add_option("--optimizers", optimizer_names, "comma-separated optimizer list")->delimiter(',')->required();

  auto* bias = app.add_subcommand("analyze-bias", "tabulate EMA bias terms on a gradient stream");
  std::string kind_name = "linear";
  ema::StreamParams sp;
  std::vector<double> betas{0.9};
  std::int64_t t_max = 200;
  std::string bias_out;
  bias->add_option("--kind", kind_name, "constant|linear|sinusoidal|regime-switch|noisy-trend")->capture_default_str();
  bias->add_option("--level", sp.level)->capture_default_str();
  bias->add_option("--slope", sp.slope)->capture_default_str();
  bias->add_option("--amplitude", sp.amplitude)->capture_default_str();
  bias->add_option("--period", sp.period)->capture_default_str();
  bias->add_option("--switch-step", sp.switch_step)->capture_default_str();
  bias->add_option("--noise", sp.noise_scale)->capture_default_str();
  bias->add_option("--seed", sp.seed)->capture_default_str();
  bias->add_option("--beta", betas, "one or more betas (repeat or comma-separate)")->delimiter(',')->capture_default_str();
  bias->add_option("--t-max", t_max)->capture_default_str();
  bias->add_option("-o,--out", bias_out, "output CSV (default stdout)");

  auto* plots = app.add_subcommand("emit-plots", "split a metrics CSV into per-series files");
  std::string plots_in, plots_dir;
  plots->add_option("path", plots_in, "metrics CSV")->required();
  plots->add_option("--out-dir", plots_dir, "destination (default: alongside the CSV)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*train) {
      const auto config = train_opts.resolve(*train);
      if (config.task == Task::bias_analysis) {
        fs::create_directories(config.output_dir);
        auto os = open_or_throw(fs::path(config.output_dir) / "bias.csv");
        ema::StreamParams p;
        p.slope = config.slope;
        p.seed = config.seed;
        return run_bias(os, config.stream, p, {config.beta}, config.t_max);
      }
      print_summary(to_string(config.optimizer), run_experiment(config));
      return kOk;
    }
    if (*cmp) {
      const auto config = cmp_opts.resolve(*cmp);
      std::vector<OptimizerKind> kinds;
      for (const auto& n : optimizer_names) kinds.push_back(parse_optimizer(n));
      const auto result = compare(config, kinds);
      for (const auto& [kind, run] : result.runs) print_summary(to_string(kind), run);
      write_comparison(std::cout, result);
      return kOk;
    }
    if (*bias) {
      const auto kind = ema::parse_stream_kind(kind_name);
      if (bias_out.empty()) return run_bias(std::cout, kind, sp, betas, t_max);
      auto os = open_or_throw(bias_out);
      return run_bias(os, kind, sp, betas, t_max);
    }
    if (*plots) {
      const fs::path in(plots_in);
      const fs::path dir = plots_dir.empty() ? in.parent_path() : fs::path(plots_dir);
      for (const auto& p : emit_plot_data(in, dir.empty() ? fs::path(".") : dir)) std::cout << p.string() << '\n';
      return kOk;
    }
  } catch (const NumericFailure& e) {
    std::cerr << "numeric failure: " << e.what() << '\n';
    return kNumeric;
  } catch (const IoError& e) {
    std::cerr << "i/o error: " << e.what() << '\n';
    return kIo;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "i/o error: " << e.what() << '\n';
    return kIo;
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kIo;
  }
  return kUsage;
}

#pragma once

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "rsgdm/harness/config.hpp"
#include "rsgdm/harness/metrics.hpp"
#include "rsgdm/mlp.hpp"
#include "rsgdm/objectives.hpp"
#include "rsgdm/optim.hpp"

namespace rsgdm::harness {

/// A training target as the runner sees it: a parameter vector, a way to cut
/// an epoch into batches, a gradient oracle, and per-epoch evaluation.
class TrainingTask {
 public:
  using Batch = std::vector<std::size_t>;

  virtual ~TrainingTask() = default;
  virtual ParamVector<double> initial_params() const = 0;
  virtual std::vector<Batch> epoch(SplitMix64& rng) const = 0;
  virtual double batch_loss(std::span<const double> theta, const Batch& batch) const = 0;
  virtual ParamVector<double> grad(std::span<const double> theta, const Batch& batch) const = 0;

  struct Evaluation {
    double loss{};
    std::optional<double> accuracy;
  };
  virtual Evaluation evaluate(std::span<const double> theta, Split split) const = 0;
  virtual bool has_validation() const { return false; }
};

namespace detail {

/// Exact-gradient objectives: a fixed number of full-gradient steps per epoch.
class DeterministicTask : public TrainingTask {
 public:
  explicit DeterministicTask(std::int64_t steps_per_epoch) : steps_(steps_per_epoch) {}
  std::vector<Batch> epoch(SplitMix64&) const override {
    return std::vector<Batch>(static_cast<std::size_t>(steps_), Batch{});
  }
  double batch_loss(std::span<const double> theta, const Batch&) const override { return loss(theta); }
  ParamVector<double> grad(std::span<const double> theta, const Batch&) const override { return exact_grad(theta); }
  Evaluation evaluate(std::span<const double> theta, Split) const override { return {loss(theta), std::nullopt}; }

 protected:
  virtual double loss(std::span<const double> theta) const = 0;
  virtual ParamVector<double> exact_grad(std::span<const double> theta) const = 0;

 private:
  std::int64_t steps_;
};

class QuadraticTask final : public DeterministicTask {
 public:
  QuadraticTask(const ExperimentConfig& c)
      : DeterministicTask(c.steps_per_epoch), q_(objectives::make_random_quadratic(c.dim, c.seed)) {}
  ParamVector<double> initial_params() const override { return ParamVector<double>(q_.dim(), 0.0); }
  const objectives::Quadratic& objective() const { return q_; }

 protected:
  double loss(std::span<const double> theta) const override { return q_.eval(theta); }
  ParamVector<double> exact_grad(std::span<const double> theta) const override { return q_.grad(theta); }

 private:
  objectives::Quadratic q_;
};

class RosenbrockTask final : public DeterministicTask {
 public:
  using DeterministicTask::DeterministicTask;
  ParamVector<double> initial_params() const override { return {-1.2, 1.0}; }

 protected:
  double loss(std::span<const double> theta) const override { return objectives::rosenbrock_eval(theta); }
  ParamVector<double> exact_grad(std::span<const double> theta) const override {
    return objectives::rosenbrock_grad(theta);
  }
};

/// f(theta) = c . theta: its gradient is the same vector at every step.
class LinearTask final : public DeterministicTask {
 public:
  LinearTask(const ExperimentConfig& c) : DeterministicTask(c.steps_per_epoch), c_(c.dim) {
    SplitMix64 rng(derive_seed(c.seed, 13));
    for (auto& v : c_) v = rng.normal();
  }
  ParamVector<double> initial_params() const override { return ParamVector<double>(c_.size(), 0.0); }

 protected:
  double loss(std::span<const double> theta) const override {
    double s = 0.0;
    for (std::size_t i = 0; i < c_.size(); ++i) s += c_[i] * theta[i];
    return s;
  }
  ParamVector<double> exact_grad(std::span<const double>) const override { return c_; }

 private:
  ParamVector<double> c_;
};

/// Mini-batch tasks over a synthetic separable dataset with a held-out split.
class ClassificationTask : public TrainingTask {
 public:
  explicit ClassificationTask(const ExperimentConfig& c)
      : train_(objectives::make_synth_classification(c.n_train, c.dim, c.margin, c.seed, 0)),
        valid_(objectives::make_synth_classification(c.n_valid, c.dim, c.margin, c.seed, 1)),
        batch_size_(c.batch_size) {}

  std::vector<Batch> epoch(SplitMix64& rng) const override {
    return objectives::epoch_batches(train_.n, batch_size_, rng);
  }
  bool has_validation() const override { return true; }
  const objectives::SynthClassificationData& train_data() const { return train_; }
  const objectives::SynthClassificationData& valid_data() const { return valid_; }

 protected:
  const objectives::SynthClassificationData& data(Split s) const { return s == Split::train ? train_ : valid_; }

  objectives::SynthClassificationData train_;
  objectives::SynthClassificationData valid_;
  std::size_t batch_size_;
};

class LogisticTask final : public ClassificationTask {
 public:
  using ClassificationTask::ClassificationTask;
  ParamVector<double> initial_params() const override { return ParamVector<double>(train_.d + 1, 0.0); }
  double batch_loss(std::span<const double> theta, const Batch& batch) const override {
    return objectives::logistic_loss(train_, theta, batch);
  }
  ParamVector<double> grad(std::span<const double> theta, const Batch& batch) const override {
    return objectives::logistic_minibatch_grad(train_, theta, batch);
  }
  Evaluation evaluate(std::span<const double> theta, Split split) const override {
    const auto& d = data(split);
    const auto idx = objectives::all_indices(d.n);
    return {objectives::logistic_loss(d, theta, idx), objectives::logistic_accuracy(d, theta)};
  }
};

class MlpTask final : public ClassificationTask {
 public:
  explicit MlpTask(const ExperimentConfig& c) : ClassificationTask(c), seed_(c.seed) {
    spec_.layer_dims.push_back(c.dim);
    for (auto h : c.hidden) spec_.layer_dims.push_back(h);
    spec_.layer_dims.push_back(2);
    spec_.activation = c.activation;
    spec_.validate();
  }

  const mlp::MLPSpec& spec() const { return spec_; }
  ParamVector<double> initial_params() const override { return mlp::mlp_init(spec_, seed_).values; }

  double batch_loss(std::span<const double> theta, const Batch& batch) const override {
    auto [x, y] = gather(train_, batch);
    const auto fwd = mlp::mlp_forward(spec_, wrap(theta), x);
    return mlp::mlp_loss(spec_, fwd.cache, y);
  }
  ParamVector<double> grad(std::span<const double> theta, const Batch& batch) const override {
    auto [x, y] = gather(train_, batch);
    const auto p = wrap(theta);
    const auto fwd = mlp::mlp_forward(spec_, p, x);
    return mlp::mlp_backward(spec_, p, fwd, y);
  }
  Evaluation evaluate(std::span<const double> theta, Split split) const override {
    const auto& d = data(split);
    const auto fwd = mlp::mlp_forward(spec_, wrap(theta), d.features);
    return {mlp::mlp_loss(spec_, fwd.cache, d.labels), mlp::mlp_accuracy(spec_, fwd, d.labels)};
  }

 private:
  static mlp::MLPParams wrap(std::span<const double> theta) { return {ParamVector<double>(theta.begin(), theta.end())}; }

  static std::pair<std::vector<double>, std::vector<int>> gather(const objectives::SynthClassificationData& d,
                                                                 const Batch& batch) {
    std::vector<double> x;
    std::vector<int> y;
    x.reserve(batch.size() * d.d);
    for (auto i : batch) {
      const auto r = d.row(i);
      x.insert(x.end(), r.begin(), r.end());
      y.push_back(d.labels[i]);
    }
    return {std::move(x), std::move(y)};
  }

  mlp::MLPSpec spec_;
  std::uint64_t seed_;
};

}  // namespace detail

inline std::unique_ptr<TrainingTask> make_task(const ExperimentConfig& c) {
  switch (c.task) {
    case Task::quadratic: return std::make_unique<detail::QuadraticTask>(c);
    case Task::rosenbrock: return std::make_unique<detail::RosenbrockTask>(c.steps_per_epoch);
    case Task::linear: return std::make_unique<detail::LinearTask>(c);
    case Task::logreg: return std::make_unique<detail::LogisticTask>(c);
    case Task::mlp: return std::make_unique<detail::MlpTask>(c);
    case Task::bias_analysis: break;
  }
  throw ConfigError("task '" + std::string(to_string(c.task)) + "' is not a training task");
}

/// Synthetic dataset as CSV: x0..x{d-1},label.
inline void write_dataset_csv(std::ostream& os, const objectives::SynthClassificationData& data) {
  for (std::size_t j = 0; j < data.d; ++j) os << 'x' << j << ',';
  os << "label\n";
  for (std::size_t i = 0; i < data.n; ++i) {
    for (double v : data.row(i)) os << format_real(v) << ',';
    os << data.labels[i] << '\n';
  }
}

struct RunResult {
  RunSummary summary;
  std::vector<MetricsRecord> records;
  ParamVector<double> final_params;
  std::filesystem::path metrics_path;
};

inline std::filesystem::path metrics_path_for(const ExperimentConfig& c) {
  return std::filesystem::path(c.output_dir) / (std::string(to_string(c.optimizer)) + ".metrics.csv");
}

namespace detail {

inline std::ofstream open_output(const std::filesystem::path& p, std::ios::openmode mode = std::ios::out) {
  std::ofstream os(p, mode | std::ios::trunc);
  if (!os) throw IoError("cannot write '" + p.string() + "'");
  return os;
}

inline void ensure_dir(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir)) throw IoError("cannot create output directory '" + dir.string() + "'");
}

}  // namespace detail

/// Runs one optimizer on one task. Per step: batch -> gradient -> weight decay
/// -> optimizer step at the epoch's scheduled rate. Writes
/// <output_dir>/<optimizer>.metrics.csv and .summary.txt (plus .params.bin for mlp).
/// Throws NumericFailure naming the step if a batch loss goes non-finite.
inline RunResult run_experiment(const ExperimentConfig& config) {
  config.validate();
  const auto task = make_task(config);
  detail::ensure_dir(config.output_dir);

  RunResult result;
  result.metrics_path = metrics_path_for(config);
  auto csv = detail::open_output(result.metrics_path);
  write_metrics_header(csv);

  if (config.export_data) {
    if (const auto* ct = dynamic_cast<const detail::ClassificationTask*>(task.get())) {
      auto tr = detail::open_output(std::filesystem::path(config.output_dir) / "train_data.csv");
      write_dataset_csv(tr, ct->train_data());
      auto va = detail::open_output(std::filesystem::path(config.output_dir) / "valid_data.csv");
      write_dataset_csv(va, ct->valid_data());
    }
  }

  auto theta = task->initial_params();
  Optimizer opt(config.optimizer, theta.size(), config.beta, config.schedule.alpha0);
  SplitMix64 batch_rng(derive_seed(config.seed, 500));
  std::int64_t step = 0;

  for (std::int64_t e = 0; e < config.epochs; ++e) {
    const auto started = std::chrono::steady_clock::now();
    const double lr = schedule_lr(config.schedule, e);
    opt.set_learning_rate(lr);
    for (const auto& batch : task->epoch(batch_rng)) {
      const double loss = task->batch_loss(theta, batch);
      if (!std::isfinite(loss)) {
        throw NumericFailure("non-finite loss at step " + std::to_string(step) + " (epoch " + std::to_string(e) + ")");
      }
      auto g = task->grad(theta, batch);
      g = apply_weight_decay<double>(g, theta, config.weight_decay);
      try {
        opt.step(theta, g);
      } catch (const NumericError& err) {
        throw NumericFailure(std::string(err.what()) + " at step " + std::to_string(step));
      }
      ++step;
    }
    std::int64_t wall_ms = 0;
    if (config.wall_clock) {
      wall_ms = std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - started).count();
    }
    for (Split split : {Split::train, Split::valid}) {
      if (split == Split::valid && !task->has_validation()) continue;
      const auto ev = task->evaluate(theta, split);
      if (!std::isfinite(ev.loss)) {
        throw NumericFailure("non-finite " + std::string(to_string(split)) + " loss after epoch " + std::to_string(e));
      }
      MetricsRecord r{e, split, ev.loss, ev.accuracy, lr, wall_ms};
      write_metrics_row(csv, r);
      result.records.push_back(r);
    }
  }
  csv.close();
  if (!csv) throw IoError("failed writing '" + result.metrics_path.string() + "'");

  result.summary = summarize(result.records);
  result.summary.config_hash = config_hash(config);
  result.summary.total_steps = step;
  result.final_params = theta;

  const auto stem = std::filesystem::path(config.output_dir) / std::string(to_string(config.optimizer));
  auto summary_os = detail::open_output(stem.string() + ".summary.txt");
  write_summary(summary_os, result.summary);
  if (const auto* mt = dynamic_cast<const detail::MlpTask*>(task.get())) {
    auto bin = detail::open_output(stem.string() + ".params.bin", std::ios::out | std::ios::binary);
    mlp::save_params(bin, mt->spec(), mlp::MLPParams{theta});
  }
  return result;
}

struct Comparison {
  std::vector<std::pair<OptimizerKind, RunResult>> runs;
  std::filesystem::path table_path;
};

inline void write_comparison(std::ostream& os, const Comparison& cmp) {
  os << kComparisonHeader << '\n';
  for (const auto& [kind, run] : cmp.runs) write_comparison_row(os, to_string(kind), run.summary);
}

/// Runs every optimizer with the same task and seed, then writes
/// <output_dir>/comparison.csv with one row per optimizer.
inline Comparison compare(const ExperimentConfig& base, const std::vector<OptimizerKind>& optimizers) {
  if (optimizers.size() < 2) throw ConfigError("compare needs at least two optimizers");
  if (std::set<OptimizerKind>(optimizers.begin(), optimizers.end()).size() != optimizers.size()) {
    throw ConfigError("compare: optimizer listed twice");
  }
  Comparison cmp;
  for (auto kind : optimizers) {
    auto c = base;
    c.optimizer = kind;
    cmp.runs.emplace_back(kind, run_experiment(c));
  }
  cmp.table_path = std::filesystem::path(base.output_dir) / "comparison.csv";
  auto os = detail::open_output(cmp.table_path);
  write_comparison(os, cmp);
  return cmp;
}

}  // namespace rsgdm::harness

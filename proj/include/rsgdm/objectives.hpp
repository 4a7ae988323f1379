#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "rsgdm/core.hpp"

namespace rsgdm::objectives {

/// f(theta) = 1/2 theta^T A theta - b^T theta with A symmetric positive-definite.
class Quadratic {
 public:
  /// A is dim x dim, row-major. Throws if A is not symmetric positive-definite.
  Quadratic(std::size_t dim, std::vector<double> A, std::vector<double> b)
      : dim_(dim), A_(std::move(A)), b_(std::move(b)) {
    if (dim_ == 0) throw std::invalid_argument("quadratic: dim must be positive");
    rsgdm::detail::require_same_size(A_.size(), dim_ * dim_, "quadratic A");
    rsgdm::detail::require_same_size(b_.size(), dim_, "quadratic b");
    for (std::size_t i = 0; i < dim_; ++i) {
      for (std::size_t j = 0; j < i; ++j) {
        if (A_[i * dim_ + j] != A_[j * dim_ + i]) throw std::invalid_argument("quadratic: A not symmetric");
      }
    }
    factor();
  }

  std::size_t dim() const { return dim_; }
  const std::vector<double>& A() const { return A_; }
  const std::vector<double>& b() const { return b_; }

  double eval(std::span<const double> theta) const {
    rsgdm::detail::require_same_size(theta.size(), dim_, "quadratic_eval");
    double quad = 0.0, lin = 0.0;
    for (std::size_t i = 0; i < dim_; ++i) {
      double row = 0.0;
      for (std::size_t j = 0; j < dim_; ++j) row += A_[i * dim_ + j] * theta[j];
      quad += theta[i] * row;
      lin += b_[i] * theta[i];
    }
    return 0.5 * quad - lin;
  }

  ParamVector<double> grad(std::span<const double> theta) const {
    rsgdm::detail::require_same_size(theta.size(), dim_, "quadratic_grad");
    ParamVector<double> g(dim_);
    for (std::size_t i = 0; i < dim_; ++i) {
      double row = 0.0;
      for (std::size_t j = 0; j < dim_; ++j) row += A_[i * dim_ + j] * theta[j];
      g[i] = row - b_[i];
    }
    return g;
  }

  /// Solution of A theta = b via the cached Cholesky factor.
  ParamVector<double> minimizer() const { return solve(b_); }

  double min_value() const {
    const auto x = minimizer();
    return eval(x);
  }

  /// Minimizer of f + lambda/2 |theta|^2, i.e. (A + lambda I)^{-1} b.
  ParamVector<double> regularized_minimizer(double lambda) const {
    std::vector<double> shifted = A_;
    for (std::size_t i = 0; i < dim_; ++i) shifted[i * dim_ + i] += lambda;
    return Quadratic(dim_, std::move(shifted), b_).minimizer();
  }

 private:
  void factor() {
    L_.assign(dim_ * dim_, 0.0);
    for (std::size_t j = 0; j < dim_; ++j) {
      double d = A_[j * dim_ + j];
      for (std::size_t k = 0; k < j; ++k) d -= L_[j * dim_ + k] * L_[j * dim_ + k];
      if (!(d > 0)) throw std::invalid_argument("quadratic: A is not positive-definite");
      const double ljj = std::sqrt(d);
      L_[j * dim_ + j] = ljj;
      for (std::size_t i = j + 1; i < dim_; ++i) {
        double s = A_[i * dim_ + j];
        for (std::size_t k = 0; k < j; ++k) s -= L_[i * dim_ + k] * L_[j * dim_ + k];
        L_[i * dim_ + j] = s / ljj;
      }
    }
  }

  ParamVector<double> solve(std::span<const double> rhs) const {
    ParamVector<double> y(dim_), x(dim_);
    for (std::size_t i = 0; i < dim_; ++i) {
      double s = rhs[i];
      for (std::size_t k = 0; k < i; ++k) s -= L_[i * dim_ + k] * y[k];
      y[i] = s / L_[i * dim_ + i];
    }
    for (std::size_t ii = dim_; ii-- > 0;) {
      double s = y[ii];
      for (std::size_t k = ii + 1; k < dim_; ++k) s -= L_[k * dim_ + ii] * x[k];
      x[ii] = s / L_[ii * dim_ + ii];
    }
    return x;
  }

  std::size_t dim_;
  std::vector<double> A_;
  std::vector<double> b_;
  std::vector<double> L_;
};

/// A = I + M^T M / dim with M standard normal, b standard normal.
inline Quadratic make_random_quadratic(std::size_t dim, std::uint64_t seed) {
  SplitMix64 rng(derive_seed(seed, 11));
  std::vector<double> M(dim * dim);
  for (auto& v : M) v = rng.normal();
  std::vector<double> A(dim * dim, 0.0);
  for (std::size_t i = 0; i < dim; ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < dim; ++k) s += M[k * dim + i] * M[k * dim + j];
      s /= static_cast<double>(dim);
      if (i == j) s += 1.0;
      A[i * dim + j] = s;
      A[j * dim + i] = s;
    }
  }
  std::vector<double> b(dim);
  for (auto& v : b) v = rng.normal();
  return Quadratic(dim, std::move(A), std::move(b));
}

inline double quadratic_eval(const Quadratic& q, std::span<const double> theta) { return q.eval(theta); }
inline ParamVector<double> quadratic_grad(const Quadratic& q, std::span<const double> theta) {
  return q.grad(theta);
}

// Rosenbrock: f(x, y) = (1 - x)^2 + 100 (y - x^2)^2, minimum 0 at (1, 1).

inline double rosenbrock_eval(std::span<const double> theta) {
  if (theta.size() != 2) throw ShapeError("rosenbrock: expected a 2-vector");
  const double x = theta[0], y = theta[1];
  const double a = 1.0 - x, c = y - x * x;
  return a * a + 100.0 * c * c;
}

inline ParamVector<double> rosenbrock_grad(std::span<const double> theta) {
  if (theta.size() != 2) throw ShapeError("rosenbrock: expected a 2-vector");
  const double x = theta[0], y = theta[1];
  const double c = y - x * x;
  return {-2.0 * (1.0 - x) - 400.0 * x * c, 200.0 * c};
}

/// Binary classification data, linearly separable with a known separator.
struct SynthClassificationData {
  std::size_t n{};
  std::size_t d{};
  std::vector<double> features;  // n x d, row-major
  std::vector<int> labels;       // 0 or 1
  std::uint64_t seed{};
  double margin{};
  std::vector<double> separator;  // unit normal of the generating hyperplane (bias 0)

  std::span<const double> row(std::size_t i) const { return {features.data() + i * d, d}; }
};

/// Points are drawn from N(0, I_d); those within `margin` of the hyperplane
/// separator . x = 0 are rejected, and the label is the side they fall on.
/// The separator depends on `seed` only; `stream` selects an independent
/// sample set over the same separator (used for validation splits).
inline SynthClassificationData make_synth_classification(std::size_t n, std::size_t d, double margin,
                                                         std::uint64_t seed, std::uint64_t stream = 0) {
  if (n < 1 || d < 1) throw std::invalid_argument("synthetic data: n and d must be >= 1");
  if (!(margin > 0)) throw std::invalid_argument("synthetic data: margin must be positive");

  SynthClassificationData data;
  data.n = n;
  data.d = d;
  data.seed = seed;
  data.margin = margin;

  SplitMix64 plane_rng(derive_seed(seed, 0));
  data.separator.resize(d);
  double norm = 0.0;
  while (norm < 1e-12) {
    for (auto& w : data.separator) w = plane_rng.normal();
    norm = l2_norm<double>(data.separator);
  }
  for (auto& w : data.separator) w /= norm;

  SplitMix64 rng(derive_seed(seed, 1000 + stream));
  data.features.resize(n * d);
  data.labels.resize(n);
  std::vector<double> x(d);
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    do {
      s = 0.0;
      for (std::size_t j = 0; j < d; ++j) {
        x[j] = rng.normal();
        s += data.separator[j] * x[j];
      }
    } while (std::abs(s) < margin);
    std::copy(x.begin(), x.end(), data.features.begin() + static_cast<std::ptrdiff_t>(i * d));
    data.labels[i] = s > 0 ? 1 : 0;
  }
  return data;
}

namespace detail {

inline double softplus(double z) { return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z))); }

inline double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

inline void check_logistic(const SynthClassificationData& data, std::span<const double> theta,
                           std::span<const std::size_t> batch) {
  rsgdm::detail::require_same_size(theta.size(), data.d + 1, "logistic theta");
  if (batch.empty()) throw std::invalid_argument("logistic: empty batch");
  for (auto i : batch) {
    if (i >= data.n) throw std::out_of_range("logistic: sample index " + std::to_string(i));
  }
}

inline double logistic_score(const SynthClassificationData& data, std::span<const double> theta, std::size_t i) {
  const auto x = data.row(i);
  double z = theta[data.d];
  for (std::size_t j = 0; j < data.d; ++j) z += theta[j] * x[j];
  return z;
}

}  // namespace detail

inline std::vector<std::size_t> all_indices(std::size_t n) {
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  return idx;
}

/// Mean binary cross-entropy. theta = (weights[0..d), bias).
inline double logistic_loss(const SynthClassificationData& data, std::span<const double> theta,
                            std::span<const std::size_t> batch) {
  detail::check_logistic(data, theta, batch);
  double sum = 0.0;
  for (auto i : batch) {
    const double z = detail::logistic_score(data, theta, i);
    sum += detail::softplus(z) - (data.labels[i] ? z : 0.0);
  }
  return sum / static_cast<double>(batch.size());
}

inline ParamVector<double> logistic_minibatch_grad(const SynthClassificationData& data,
                                                   std::span<const double> theta,
                                                   std::span<const std::size_t> batch) {
  detail::check_logistic(data, theta, batch);
  ParamVector<double> g(data.d + 1, 0.0);
  for (auto i : batch) {
    const double r = detail::sigmoid(detail::logistic_score(data, theta, i)) - data.labels[i];
    const auto x = data.row(i);
    for (std::size_t j = 0; j < data.d; ++j) g[j] += r * x[j];
    g[data.d] += r;
  }
  const double inv = 1.0 / static_cast<double>(batch.size());
  for (auto& v : g) v *= inv;
  return g;
}

inline double logistic_accuracy(const SynthClassificationData& data, std::span<const double> theta) {
  rsgdm::detail::require_same_size(theta.size(), data.d + 1, "logistic theta");
  std::size_t correct = 0;
  for (std::size_t i = 0; i < data.n; ++i) {
    const int pred = detail::logistic_score(data, theta, i) > 0 ? 1 : 0;
    correct += pred == data.labels[i];
  }
  return static_cast<double>(correct) / static_cast<double>(data.n);
}

/// One epoch of mini-batches: seeded shuffle, contiguous slices, short tail kept.
inline std::vector<std::vector<std::size_t>> epoch_batches(std::size_t n, std::size_t batch_size,
                                                           SplitMix64& rng) {
  if (batch_size == 0) throw std::invalid_argument("batch size must be positive");
  const auto perm = seeded_permutation(n, rng);
  std::vector<std::vector<std::size_t>> batches;
  for (std::size_t lo = 0; lo < n; lo += batch_size) {
    const std::size_t hi = std::min(n, lo + batch_size);
    batches.emplace_back(perm.begin() + static_cast<std::ptrdiff_t>(lo),
                         perm.begin() + static_cast<std::ptrdiff_t>(hi));
  }
  return batches;
}

}  // namespace rsgdm::objectives

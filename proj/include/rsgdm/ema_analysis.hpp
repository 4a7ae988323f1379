#pragma once

// Closed-form expansions of the momentum EMA and its bias terms, evaluated on
// deterministic scalar gradient streams. On such streams E(g_i) = g_i, so every
// relation below is an exact algebraic identity rather than an expectation.

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "rsgdm/core.hpp"

namespace rsgdm::ema {

enum class StreamKind { constant, linear_trend, sinusoidal, regime_switch, noisy_trend, explicit_values };

inline std::string_view to_string(StreamKind k) {
  switch (k) {
    case StreamKind::constant: return "constant";
    case StreamKind::linear_trend: return "linear";
    case StreamKind::sinusoidal: return "sinusoidal";
    case StreamKind::regime_switch: return "regime-switch";
    case StreamKind::noisy_trend: return "noisy-trend";
    case StreamKind::explicit_values: return "explicit";
  }
  return "?";
}

inline StreamKind parse_stream_kind(std::string_view s) {
  if (s == "constant") return StreamKind::constant;
  if (s == "linear" || s == "linear-trend") return StreamKind::linear_trend;
  if (s == "sinusoidal") return StreamKind::sinusoidal;
  if (s == "regime-switch") return StreamKind::regime_switch;
  if (s == "noisy-trend" || s == "seeded-noise-around-trend") return StreamKind::noisy_trend;
  throw std::invalid_argument("unknown stream kind '" + std::string(s) + "'");
}

struct StreamParams {
  double level{0.0};
  double slope{1.0};
  double amplitude{1.0};
  double period{20.0};
  std::int64_t switch_step{50};
  double noise_scale{0.1};
  std::uint64_t seed{0};
};

/// A replayable scalar sequence g_1, g_2, ..., g_length (1-based access).
///
///   constant       g_i = level
///   linear         g_i = level + slope*i
///   sinusoidal     g_i = level + amplitude*sin(2*pi*i/period)
///   regime-switch  rises with slope up to switch_step, then falls back at the same rate
///   noisy-trend    level + slope*i + noise_scale*N(0,1), noise drawn from seed
class GradientStream {
 public:
  GradientStream(StreamKind kind, StreamParams params, std::int64_t length)
      : kind_(kind), params_(params) {
    if (length < 1) throw std::invalid_argument("stream length must be positive");
    if (kind == StreamKind::explicit_values) {
      throw std::invalid_argument("use GradientStream::from_values for explicit streams");
    }
    if (kind == StreamKind::sinusoidal && !(params.period > 0)) {
      throw std::invalid_argument("sinusoidal period must be positive");
    }
    values_.reserve(static_cast<std::size_t>(length));
    SplitMix64 rng(params.seed);
    for (std::int64_t i = 1; i <= length; ++i) values_.push_back(generate(i, rng));
  }

  static GradientStream from_values(std::vector<double> values) {
    if (values.empty()) throw std::invalid_argument("stream length must be positive");
    return GradientStream(std::move(values));
  }

  StreamKind kind() const { return kind_; }
  const StreamParams& params() const { return params_; }
  std::int64_t length() const { return static_cast<std::int64_t>(values_.size()); }

  /// g_i for 1 <= i <= length.
  double operator[](std::int64_t i) const {
    if (i < 1 || i > length()) throw std::out_of_range("stream index " + std::to_string(i));
    return values_[static_cast<std::size_t>(i - 1)];
  }

  const std::vector<double>& values() const { return values_; }

 private:
  explicit GradientStream(std::vector<double> values)
      : kind_(StreamKind::explicit_values), values_(std::move(values)) {}

  double generate(std::int64_t i, SplitMix64& rng) const {
    const auto& p = params_;
    const double x = static_cast<double>(i);
    switch (kind_) {
      case StreamKind::constant: return p.level;
      case StreamKind::linear_trend: return p.level + p.slope * x;
      case StreamKind::sinusoidal:
        return p.level + p.amplitude * std::sin(2.0 * 3.14159265358979323846 * x / p.period);
      case StreamKind::regime_switch: {
        const double s = static_cast<double>(p.switch_step);
        return i <= p.switch_step ? p.level + p.slope * x : p.level + p.slope * (2.0 * s - x);
      }
      case StreamKind::noisy_trend: return p.level + p.slope * x + p.noise_scale * rng.normal();
      case StreamKind::explicit_values: break;
    }
    return 0.0;
  }

  StreamKind kind_;
  StreamParams params_{};
  std::vector<double> values_;
};

namespace detail {

inline void check_t(const GradientStream& s, std::int64_t t, std::int64_t t_min, const char* who) {
  if (t < t_min || t > s.length()) {
    throw std::out_of_range(std::string(who) + ": t=" + std::to_string(t) + " outside [" +
                            std::to_string(t_min) + ", " + std::to_string(s.length()) + "]");
  }
}

inline void check_beta(double beta) {
  if (!(beta >= 0 && beta < 1)) throw std::invalid_argument("beta must lie in [0, 1)");
}

}  // namespace detail

/// (1-beta) * sum_{i=1..t} beta^(t-i) g_i
inline double ema_closed_form(const GradientStream& s, double beta, std::int64_t t) {
  detail::check_beta(beta);
  detail::check_t(s, t, 1, "ema_closed_form");
  double sum = 0.0, w = 1.0;
  for (std::int64_t i = t; i >= 1; --i, w *= beta) sum += w * s[i];
  return (1.0 - beta) * sum;
}

/// SGDM bias term: sum_{i=1..t-1} beta^(t-i) (g_i - g_t). The i = t term is identically zero.
inline double xi(const GradientStream& s, double beta, std::int64_t t) {
  detail::check_beta(beta);
  detail::check_t(s, t, 1, "xi");
  const double gt = s[t];
  double sum = 0.0, w = beta;
  for (std::int64_t i = t - 1; i >= 1; --i, w *= beta) sum += w * (s[i] - gt);
  return sum;
}

/// RSGDM bias term: sum_{i=1..t-2} beta^(t-i) (g_{i+1} - g_t). Zero for t = 2.
inline double zeta(const GradientStream& s, double beta, std::int64_t t) {
  detail::check_beta(beta);
  detail::check_t(s, t, 2, "zeta");
  const double gt = s[t];
  double sum = 0.0, w = beta * beta;
  for (std::int64_t i = t - 2; i >= 1; --i, w *= beta) sum += w * (s[i + 1] - gt);
  return sum;
}

/// (1-beta) * sum_{i=2..t} beta^(t-i) (g_i - g_{i-1}); the first differential is zero.
inline double z_closed_form(const GradientStream& s, double beta, std::int64_t t) {
  detail::check_beta(beta);
  detail::check_t(s, t, 1, "z_closed_form");
  double sum = 0.0, w = 1.0;
  for (std::int64_t i = t; i >= 2; --i, w *= beta) sum += w * (s[i] - s[i - 1]);
  return (1.0 - beta) * sum;
}

/// (1 - beta^t) g_t + (1-beta) * zeta. Equals m_t + beta*z_t exactly on deterministic streams.
inline double n_decomposition(const GradientStream& s, double beta, std::int64_t t) {
  detail::check_beta(beta);
  detail::check_t(s, t, 1, "n_decomposition");
  const double z = t >= 2 ? zeta(s, beta, t) : 0.0;
  return (1.0 - std::pow(beta, static_cast<double>(t))) * s[t] + (1.0 - beta) * z;
}

/// |zeta - (beta*xi - beta^t (g_1 - g_t))|. The subtracted beta^t term is what
/// separates the exact relation from the large-t approximation zeta ~ beta*xi.
inline double verify_identity(const GradientStream& s, double beta, std::int64_t t) {
  detail::check_beta(beta);
  detail::check_t(s, t, 2, "verify_identity");
  const double bt = std::pow(beta, static_cast<double>(t));
  return std::abs(zeta(s, beta, t) - (beta * xi(s, beta, t) - bt * (s[1] - s[t])));
}

struct BiasReport {
  std::int64_t t{};
  double xi{};
  double zeta{};
  double identity_residual{};
  double m_closed{};
  double n_closed{};
  double sgdm_bias_contrib{};   // (1-beta)*xi
  double rsgdm_bias_contrib{};  // (1-beta)*zeta
};

/// One report per t in [2, t_max].
inline std::vector<BiasReport> bias_report(const GradientStream& s, double beta, std::int64_t t_max) {
  detail::check_beta(beta);
  detail::check_t(s, t_max, 1, "bias_report");
  std::vector<BiasReport> out;
  for (std::int64_t t = 2; t <= t_max; ++t) {
    BiasReport r;
    r.t = t;
    r.xi = xi(s, beta, t);
    r.zeta = zeta(s, beta, t);
    r.identity_residual = verify_identity(s, beta, t);
    r.m_closed = ema_closed_form(s, beta, t);
    r.n_closed = n_decomposition(s, beta, t);
    r.sgdm_bias_contrib = (1.0 - beta) * r.xi;
    r.rsgdm_bias_contrib = (1.0 - beta) * r.zeta;
    for (double v : {r.xi, r.zeta, r.identity_residual, r.m_closed, r.n_closed}) {
      rsgdm::detail::require_finite(v, "bias_report");
    }
    out.push_back(r);
  }
  return out;
}

}  // namespace rsgdm::ema

#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <variant>

#include "rsgdm/core.hpp"

namespace rsgdm {

namespace detail {

template <std::floating_point Real>
void check_hyper(Real beta, Real alpha) {
  if (!(beta >= 0 && beta < 1)) throw std::invalid_argument("beta must lie in [0, 1)");
  if (!(alpha > 0) || !std::isfinite(alpha)) {
    throw std::invalid_argument("learning rate must be positive and finite");
  }
}

template <std::floating_point Real>
void check_step_inputs(std::span<const Real> theta, std::span<const Real> g,
                       std::size_t buffer_size, const char* who) {
  require_same_size(theta.size(), g.size(), who);
  require_same_size(theta.size(), buffer_size, who);
  require_finite(theta, who);
  require_finite(g, who);
}

}  // namespace detail

/// Plain gradient descent: theta - alpha * g.
template <std::floating_point Real>
ParamVector<Real> sgd_step(std::span<const Real> theta, std::span<const Real> g, Real alpha) {
  detail::require_same_size(theta.size(), g.size(), "sgd_step");
  if (!(alpha > 0) || !std::isfinite(alpha)) {
    throw std::invalid_argument("sgd_step: learning rate must be positive and finite");
  }
  detail::require_finite(theta, "sgd_step");
  detail::require_finite(g, "sgd_step");
  ParamVector<Real> out(theta.size());
  for (std::size_t i = 0; i < theta.size(); ++i) out[i] = theta[i] - alpha * g[i];
  return out;
}

template <std::floating_point Real>
ParamVector<Real> sgd_step(const ParamVector<Real>& theta, const ParamVector<Real>& g, Real alpha) {
  return sgd_step(std::span<const Real>(theta), std::span<const Real>(g), alpha);
}

/// Dampened heavy-ball state: m <- beta*m + (1-beta)*g, theta <- theta - alpha*m.
/// No (1 - beta^t) bias-correction divisor is applied.
template <std::floating_point Real = double>
struct SgdmState {
  ParamVector<Real> m;
  Real beta{0.9};
  Real alpha{0.01};
  std::int64_t t{0};

  SgdmState() = default;
  SgdmState(std::size_t dim, Real beta_, Real alpha_) : m(dim, Real{0}), beta(beta_), alpha(alpha_) {
    detail::check_hyper(beta, alpha);
  }

  /// In-place step. theta is updated and the state advances by one.
  void step(std::span<Real> theta, std::span<const Real> g) {
    detail::check_step_inputs<Real>(theta, g, m.size(), "sgdm_step");
    const Real one_minus = Real{1} - beta;
    for (std::size_t i = 0; i < m.size(); ++i) {
      m[i] = beta * m[i] + one_minus * g[i];
      theta[i] -= alpha * m[i];
    }
    ++t;
  }
};

/// RSGDM state. Besides the first moment m it keeps an EMA z of the gradient
/// differential g_t - g_{t-1}, and steps along n = m + beta*z.
///
/// The first differential is taken to be zero, so z stays zero after step one.
/// Configured by (beta, alpha) alone, like SgdmState.
template <std::floating_point Real = double>
struct RsgdmState {
  ParamVector<Real> m;
  ParamVector<Real> z;
  ParamVector<Real> g_prev;
  Real beta{0.9};
  Real alpha{0.01};
  std::int64_t t{0};

  RsgdmState() = default;
  RsgdmState(std::size_t dim, Real beta_, Real alpha_)
      : m(dim, Real{0}), z(dim, Real{0}), g_prev(dim, Real{0}), beta(beta_), alpha(alpha_) {
    detail::check_hyper(beta, alpha);
  }

  void step(std::span<Real> theta, std::span<const Real> g) {
    detail::check_step_inputs<Real>(theta, g, m.size(), "rsgdm_step");
    const Real one_minus = Real{1} - beta;
    const bool first = (t == 0);
    for (std::size_t i = 0; i < m.size(); ++i) {
      const Real dg = first ? Real{0} : g[i] - g_prev[i];
      m[i] = beta * m[i] + one_minus * g[i];
      z[i] = beta * z[i] + one_minus * dg;
      const Real n = m[i] + beta * z[i];
      theta[i] -= alpha * n;
      g_prev[i] = g[i];
    }
    ++t;
  }

  /// Current corrected estimate n_t = m_t + beta*z_t.
  ParamVector<Real> corrected() const {
    ParamVector<Real> n(m.size());
    for (std::size_t i = 0; i < m.size(); ++i) n[i] = m[i] + beta * z[i];
    return n;
  }
};

template <std::floating_point Real>
std::pair<SgdmState<Real>, ParamVector<Real>> sgdm_step(SgdmState<Real> state,
                                                        ParamVector<Real> theta,
                                                        const ParamVector<Real>& g) {
  state.step(theta, g);
  return {std::move(state), std::move(theta)};
}

template <std::floating_point Real>
std::pair<RsgdmState<Real>, ParamVector<Real>> rsgdm_step(RsgdmState<Real> state,
                                                          ParamVector<Real> theta,
                                                          const ParamVector<Real>& g) {
  state.step(theta, g);
  return {std::move(state), std::move(theta)};
}

struct WeightDecaySpec {
  double lambda{5e-4};
};

/// Coupled L2 decay: g + lambda*theta, applied before any moment update.
template <std::floating_point Real>
ParamVector<Real> apply_weight_decay(std::span<const Real> g, std::span<const Real> theta,
                                     WeightDecaySpec spec) {
  detail::require_same_size(g.size(), theta.size(), "apply_weight_decay");
  if (!(spec.lambda >= 0)) throw std::invalid_argument("weight decay must be non-negative");
  ParamVector<Real> out(g.begin(), g.end());
  if (spec.lambda == 0) return out;
  const Real lambda = static_cast<Real>(spec.lambda);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += lambda * theta[i];
  return out;
}

template <std::floating_point Real>
ParamVector<Real> apply_weight_decay(const ParamVector<Real>& g, const ParamVector<Real>& theta,
                                     WeightDecaySpec spec) {
  return apply_weight_decay(std::span<const Real>(g), std::span<const Real>(theta), spec);
}

/// Step decay: alpha0 * factor^floor(epoch / period).
struct ScheduleSpec {
  double alpha0{0.01};
  std::int64_t period{50};
  double factor{0.5};

  void validate() const {
    if (!(alpha0 > 0) || !std::isfinite(alpha0)) throw std::invalid_argument("alpha0 must be positive");
    if (period <= 0) throw std::invalid_argument("schedule period must be positive");
    if (!(factor > 0 && factor <= 1)) throw std::invalid_argument("schedule factor must lie in (0, 1]");
  }
};

inline double schedule_lr(const ScheduleSpec& spec, std::int64_t epoch) {
  if (epoch < 0) throw std::invalid_argument("schedule_lr: negative epoch");
  const std::int64_t k = epoch / spec.period;
  double lr = spec.alpha0;
  // repeated multiplication keeps factor=0.5 exact
  for (std::int64_t i = 0; i < k; ++i) lr *= spec.factor;
  return lr;
}

enum class OptimizerKind { sgd, sgdm, rsgdm };

inline std::string_view to_string(OptimizerKind k) {
  switch (k) {
    case OptimizerKind::sgd: return "sgd";
    case OptimizerKind::sgdm: return "sgdm";
    case OptimizerKind::rsgdm: return "rsgdm";
  }
  return "?";
}

inline OptimizerKind parse_optimizer(std::string_view s) {
  if (s == "sgd") return OptimizerKind::sgd;
  if (s == "sgdm") return OptimizerKind::sgdm;
  if (s == "rsgdm") return OptimizerKind::rsgdm;
  throw std::invalid_argument("unknown optimizer '" + std::string(s) + "'");
}

/// Plain SGD carries no buffers, only its rate and step count.
struct SgdState {
  double alpha{0.01};
  std::int64_t t{0};
};

/// Runtime-selected optimizer over double parameters, used by the harness.
class Optimizer {
 public:
  Optimizer(OptimizerKind kind, std::size_t dim, double beta, double alpha) : kind_(kind) {
    switch (kind) {
      case OptimizerKind::sgd:
        detail::check_hyper(0.0, alpha);
        state_ = SgdState{alpha};
        break;
      case OptimizerKind::sgdm: state_ = SgdmState<double>(dim, beta, alpha); break;
      case OptimizerKind::rsgdm: state_ = RsgdmState<double>(dim, beta, alpha); break;
    }
  }

  OptimizerKind kind() const { return kind_; }

  void set_learning_rate(double alpha) {
    detail::check_hyper(0.0, alpha);
    std::visit([alpha](auto& s) { s.alpha = alpha; }, state_);
  }

  double learning_rate() const {
    return std::visit([](const auto& s) { return static_cast<double>(s.alpha); }, state_);
  }

  std::int64_t steps() const {
    return std::visit([](const auto& s) { return s.t; }, state_);
  }

  void step(std::span<double> theta, std::span<const double> g) {
    std::visit(
        [&](auto& s) {
          if constexpr (std::is_same_v<std::decay_t<decltype(s)>, SgdState>) {
            auto next = sgd_step<double>(std::span<const double>(theta.data(), theta.size()), g, s.alpha);
            std::copy(next.begin(), next.end(), theta.begin());
            ++s.t;
          } else {
            s.step(theta, g);
          }
        },
        state_);
  }

 private:
  OptimizerKind kind_;
  std::variant<SgdState, SgdmState<double>, RsgdmState<double>> state_;
};

}  // namespace rsgdm

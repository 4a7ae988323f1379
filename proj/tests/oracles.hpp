#pragma once

// Reference computations used only by the tests. They deliberately take a
// different route from the library: direct power-sum expansions in long
// double, and central finite differences.

#include <cmath>
#include <functional>
#include <span>
#include <vector>

namespace oracle {

/// (1-b) * sum_{i=1..t} b^(t-i) g_i with explicit powers. g is 0-based (g[0] = g_1).
inline long double ema_expansion(const std::vector<double>& g, double beta, std::size_t t) {
  long double s = 0;
  for (std::size_t i = 1; i <= t; ++i) s += std::pow((long double)beta, (long double)(t - i)) * g[i - 1];
  return (1.0L - beta) * s;
}

/// Differential EMA with a zero first differential.
inline long double diff_ema_expansion(const std::vector<double>& g, double beta, std::size_t t) {
  long double s = 0;
  for (std::size_t i = 2; i <= t; ++i) {
    s += std::pow((long double)beta, (long double)(t - i)) * ((long double)g[i - 1] - g[i - 2]);
  }
  return (1.0L - beta) * s;
}

inline long double xi_expansion(const std::vector<double>& g, double beta, std::size_t t) {
  long double s = 0;
  for (std::size_t i = 1; i <= t; ++i) s += std::pow((long double)beta, (long double)(t - i)) * ((long double)g[i - 1] - g[t - 1]);
  return s;
}

/// zeta built the long way: xi plus beta times the undamped differential sum.
inline long double zeta_via_definition(const std::vector<double>& g, double beta, std::size_t t) {
  long double d = 0;
  for (std::size_t i = 2; i <= t; ++i) {
    d += std::pow((long double)beta, (long double)(t - i)) * ((long double)g[i - 1] - g[i - 2]);
  }
  return xi_expansion(g, beta, t) + beta * d;
}

using Fn = std::function<double(std::span<const double>)>;

/// Central-difference gradient with step h.
inline std::vector<double> central_gradient(const Fn& f, std::vector<double> x, double h = 1e-6) {
  std::vector<double> g(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double orig = x[i];
    x[i] = orig + h;
    const double fp = f(x);
    x[i] = orig - h;
    const double fm = f(x);
    x[i] = orig;
    g[i] = (fp - fm) / (2 * h);
  }
  return g;
}

inline double central_partial(const Fn& f, std::vector<double> x, std::size_t i, double h = 1e-6) {
  const double orig = x[i];
  x[i] = orig + h;
  const double fp = f(x);
  x[i] = orig - h;
  const double fm = f(x);
  return (fp - fm) / (2 * h);
}

/// |a-b| / max(|a|, |b|, floor); the floor keeps near-zero components from
/// dominating through pure rounding noise.
inline double rel_err(double a, double b, double floor = 1e-6) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), floor});
}

}  // namespace oracle

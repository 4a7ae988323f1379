#pragma once

#include <cmath>
#include <ostream>
#include <vector>

#include "rsgdm/ema_analysis.hpp"
#include "rsgdm/harness/metrics.hpp"

namespace rsgdm::harness {

inline constexpr std::string_view kBiasHeader = "beta,t,xi,zeta,residual,zeta_le_xi,m_closed,n_closed";
inline constexpr double kIdentityTolerance = 1e-10;

struct BiasAnalysisResult {
  std::size_t rows{};
  double max_residual{};
  bool all_dominated{true};  // |zeta| <= |xi| on every row
  bool passed() const { return max_residual <= kIdentityTolerance; }
};

/// Writes one CSV row per (beta, t in [2, t_max]) for a stream of length t_max.
/// The caller turns !passed() into a non-zero exit status.
inline BiasAnalysisResult analyze_bias(std::ostream& os, ema::StreamKind kind, const ema::StreamParams& params,
                                       const std::vector<double>& betas, std::int64_t t_max) {
  if (betas.empty()) throw ConfigError("analyze-bias: at least one beta is required");
  if (t_max < 2) throw ConfigError("analyze-bias: t_max must be at least 2");
  for (double b : betas) {
    if (!(b >= 0 && b < 1)) throw ConfigError("analyze-bias: beta must lie in [0, 1)");
  }
  const ema::GradientStream stream(kind, params, t_max);
  BiasAnalysisResult res;
  os << kBiasHeader << '\n';
  for (double beta : betas) {
    for (const auto& r : ema::bias_report(stream, beta, t_max)) {
      const bool dominated = std::abs(r.zeta) <= std::abs(r.xi);
      res.all_dominated = res.all_dominated && dominated;
      res.max_residual = std::max(res.max_residual, r.identity_residual);
      ++res.rows;
      os << format_real(beta) << ',' << r.t << ',' << format_real(r.xi) << ',' << format_real(r.zeta) << ','
         << format_real(r.identity_residual) << ',' << (dominated ? 1 : 0) << ',' << format_real(r.m_closed) << ','
         << format_real(r.n_closed) << '\n';
    }
  }
  return res;
}

}  // namespace rsgdm::harness

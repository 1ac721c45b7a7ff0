// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "hlmsim/error.hpp"
#include "hlmsim/rng.hpp"
#include "hlmsim/types.hpp"

namespace hlmsim {

/// Temperature-perturbation settings. The defaults keep the Monte Carlo
/// error of the estimate near 0.19 (3 sigma at N = 64) and bracket the
/// unperturbed temperature symmetrically in log scale.
struct UncertaintyConfig {
  std::uint32_t n_samples = 64;  // N
  double temp_lo = 0.5;
  double temp_hi = 2.0;
  double threshold = 0.2;  // theta_u

  void validate() const {
    if (n_samples < 1) throw ValidationError("UncertaintyConfig: n_samples must be >= 1");
    if (!(temp_lo > 0.0) || !(temp_lo <= temp_hi) || !std::isfinite(temp_hi)) {
      throw ValidationError("UncertaintyConfig: need 0 < temp_lo <= temp_hi");
    }
    if (!(threshold >= 0.0 && threshold <= 1.0)) throw ValidationError("UncertaintyConfig: threshold must be in [0,1]");
  }
};

/// N temperatures, linear-uniform on [temp_lo, temp_hi). Consumes exactly
/// n_samples uniforms.
inline std::vector<double> draw_temperatures(const UncertaintyConfig& cfg, SeededRng& rng) {
  cfg.validate();
  std::vector<double> temps(cfg.n_samples);
  for (auto& t : temps) t = cfg.temp_lo + (cfg.temp_hi - cfg.temp_lo) * rng.next_double();
  return temps;
}

/// Mismatch fraction across perturbed resamples at the given temperatures.
/// Consumes exactly temps.size() uniforms (one per resample).
inline double estimate_uncertainty_with_temps(const LogitVector& logits, TokenId draft,
                                              std::span<const double> temps, SeededRng& rng) {
  if (draft >= logits.size()) throw ValidationError("estimate_uncertainty: draft id out of range");
  std::uint64_t mismatches = 0;
  for (double t : temps) {
    const ProbabilityVector perturbed = softmax(logits, t);
    if (sample(perturbed, rng) != draft) ++mismatches;
  }
  return static_cast<double>(mismatches) / static_cast<double>(temps.size());
}

/// u(t): draws N temperatures, resamples once per perturbed distribution, and
/// returns the fraction of resamples that disagree with the draft. Values lie
/// on the grid {0, 1/N, ..., 1}. Consumes exactly 2N uniforms (N temperature
/// draws, then N resamples).
inline double estimate_uncertainty(const LogitVector& logits, TokenId draft,
                                   const UncertaintyConfig& cfg, SeededRng& rng) {
  const std::vector<double> temps = draw_temperatures(cfg, rng);
  return estimate_uncertainty_with_temps(logits, draft, temps, rng);
}

/// Analytic counterpart: the expectation of the mismatch indicator given the
/// temperature draws, (1/N) sum_i (1 - softmax(logits, T_i)[draft]).
inline double exact_uncertainty(const LogitVector& logits, TokenId draft, std::span<const double> temps) {
  if (draft >= logits.size()) throw ValidationError("exact_uncertainty: draft id out of range");
  if (temps.empty()) throw ParamError("exact_uncertainty: no temperatures");
  double total = 0.0;
  for (double t : temps) {
    total += 1.0 - softmax(logits, t)[draft];
  }
  return total / static_cast<double>(temps.size());
}

}  // namespace hlmsim

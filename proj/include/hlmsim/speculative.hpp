// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <vector>

#include "hlmsim/error.hpp"
#include "hlmsim/rng.hpp"
#include "hlmsim/types.hpp"

namespace hlmsim {

enum class VerifyDecision { accepted, rejected };

struct VerifyOutcome {
  VerifyDecision decision;
  TokenId emitted_token;
  /// The uniform consumed by the acceptance test; present only when
  /// x_d > y_d forced a probabilistic decision.
  std::optional<double> acceptance_draw;
};

/// Normalized positive part of y - x. Throws ContractError when y <= x
/// everywhere, which can only happen if the caller resamples without a
/// possible rejection.
inline ProbabilityVector residual_distribution(const ProbabilityVector& x, const ProbabilityVector& y) {
  if (x.size() != y.size()) throw ValidationError("residual_distribution: dimension mismatch");
  std::vector<double> residual(x.size());
  double sum = 0.0;
  for (std::size_t v = 0; v < x.size(); ++v) {
    residual[v] = std::max(y[v] - x[v], 0.0);
    sum += residual[v];
  }
  if (!(sum > 0.0)) throw ContractError("residual_distribution: degenerate residual (y <= x everywhere)");
  for (double& r : residual) r /= sum;
  return ProbabilityVector(std::move(residual));
}

/// Draws the replacement token d* from the residual distribution.
/// Consumes exactly one uniform.
inline TokenId resample_residual(const ProbabilityVector& x, const ProbabilityVector& y, SeededRng& rng) {
  return sample(residual_distribution(x, y), rng);
}

/// Metropolis-Hastings verification of a draft sampled from x against the
/// verifier distribution y: accept outright when x_d <= y_d, otherwise accept
/// with probability y_d / x_d and resample from the residual on rejection.
///
/// Draw consumption is deterministic per branch: none when x_d <= y_d, one
/// uniform for the acceptance test otherwise, plus one more on rejection for
/// the resample. That fixed budget is what makes recorded traces replayable.
inline VerifyOutcome verify(TokenId draft, const ProbabilityVector& x, const ProbabilityVector& y, SeededRng& rng) {
  if (x.size() != y.size()) throw ValidationError("verify: dimension mismatch");
  if (draft >= x.size()) throw ValidationError("verify: draft id out of range");
  const double x_d = x[draft];
  const double y_d = y[draft];
  if (!(x_d > 0.0)) throw ContractError("verify: draft has zero probability under x");
  if (x_d <= y_d) {
    return VerifyOutcome{VerifyDecision::accepted, draft, std::nullopt};
  }
  const double u = rng.next_double();
  if (u < y_d / x_d) {
    return VerifyOutcome{VerifyDecision::accepted, draft, u};
  }
  const TokenId replacement = resample_residual(x, y, rng);
  return VerifyOutcome{VerifyDecision::rejected, replacement, u};
}

}  // namespace hlmsim

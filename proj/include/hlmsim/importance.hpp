// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "hlmsim/error.hpp"

namespace hlmsim {

/// Which attention values the top-k test sorts: the draft token's row
/// (default, consistent with the row-derived threshold) or every defined
/// weight of the current attention matrix.
enum class TopkScope { row, matrix };

struct ImportanceConfig {
  std::uint32_t k = 5;
  double gamma = 1.0;
  TopkScope scope = TopkScope::row;

  void validate() const {
    if (k < 1) throw ValidationError("ImportanceConfig: k must be >= 1");
    if (!(gamma >= 0.0) || !std::isfinite(gamma)) throw ValidationError("ImportanceConfig: gamma must be >= 0");
  }
};

/// Full record of one upload decision. delta is the conjunction of the
/// uncertainty test and the importance test, both strict.
struct GateDecision {
  bool delta = false;
  double u_value = 0.0;
  bool importance_pass = false;
  double theta_imp = std::numeric_limits<double>::infinity();
  double topk_value = -std::numeric_limits<double>::infinity();
};

/// Adaptive threshold max(A_i) - gamma * std(A_i). std is the population
/// standard deviation (divisor = row length), which stays defined for
/// single-element rows.
inline double importance_threshold(std::span<const double> row, double gamma) {
  if (row.empty()) throw ParamError("importance_threshold: empty attention row");
  const double mx = *std::max_element(row.begin(), row.end());
  double mean = 0.0;
  for (double v : row) mean += v;
  mean /= static_cast<double>(row.size());
  double var = 0.0;
  for (double v : row) var += (v - mean) * (v - mean);
  var /= static_cast<double>(row.size());
  return mx - gamma * std::sqrt(var);
}

/// k-th largest of the given values; -inf when fewer than k values exist,
/// which guarantees the strict gate comparison fails.
inline double topk_value(std::span<const double> values, std::uint32_t k) {
  if (k < 1) throw ParamError("topk_value: k must be >= 1");
  if (values.size() < k) return -std::numeric_limits<double>::infinity();
  std::vector<double> sorted(values.begin(), values.end());
  std::nth_element(sorted.begin(), sorted.begin() + (k - 1), sorted.end(), std::greater<double>());
  return sorted[k - 1];
}

/// The selective upload policy: delta = 1 iff u > theta_u and the k-th
/// largest attention value strictly exceeds the adaptive threshold. An empty
/// row (the first generated position has no attention evidence) forces the
/// importance test to fail, so the token commits locally.
inline GateDecision decide_upload(double u, std::span<const double> row,
                                  std::optional<std::span<const double>> full_matrix_values,
                                  const ImportanceConfig& cfg, double theta_u) {
  cfg.validate();
  if (!(u >= 0.0 && u <= 1.0)) throw ValidationError("decide_upload: u must be in [0,1]");
  if (cfg.scope == TopkScope::matrix && !full_matrix_values.has_value()) {
    throw ConfigError("decide_upload: scope=matrix requires the flattened matrix values");
  }

  GateDecision gate;
  gate.u_value = u;
  const bool uncertain = u > theta_u;
  if (!row.empty()) {
    gate.theta_imp = importance_threshold(row, cfg.gamma);
    const std::span<const double> pool = cfg.scope == TopkScope::row ? row : *full_matrix_values;
    gate.topk_value = topk_value(pool, cfg.k);
    gate.importance_pass = gate.topk_value > gate.theta_imp;
  }
  gate.delta = uncertain && gate.importance_pass;
  return gate;
}

}  // namespace hlmsim

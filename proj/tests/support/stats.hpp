// SPDX-License-Identifier: Apache-2.0
//
// Test-only statistics helpers: goodness-of-fit machinery and distance
// measures used as independent oracles. Deliberately not part of the library.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

namespace teststats {

// Upper critical values of the chi-square distribution at significance 0.001.
inline double chi2_critical_001(std::size_t df) {
  switch (df) {
    case 1: return 10.8275661707;
    case 3: return 16.2662361962;
    case 7: return 24.3218863479;
    case 15: return 37.6972982184;
    default: throw std::runtime_error("chi2_critical_001: df not tabulated");
  }
}

inline double chi2_statistic(std::span<const std::uint64_t> observed, std::span<const double> expected_probs,
                             std::uint64_t n) {
  double stat = 0.0;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    const double expect = expected_probs[i] * static_cast<double>(n);
    const double diff = static_cast<double>(observed[i]) - expect;
    stat += diff * diff / expect;
  }
  return stat;
}

// One-sample Kolmogorov-Smirnov statistic against exp(1).
inline double ks_statistic_exp1(std::vector<double> samples) {
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  double d = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double cdf = 1.0 - std::exp(-samples[i]);
    d = std::max(d, std::abs(cdf - static_cast<double>(i + 1) / n));
    d = std::max(d, std::abs(cdf - static_cast<double>(i) / n));
  }
  return d;
}

// Asymptotic KS critical value: sqrt(ln(2/alpha) / 2) / sqrt(n).
inline double ks_critical(double alpha, std::size_t n) {
  return std::sqrt(std::log(2.0 / alpha) / 2.0) / std::sqrt(static_cast<double>(n));
}

inline double total_variation(std::span<const double> p, std::span<const double> q) {
  double tv = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) tv += std::abs(p[i] - q[i]);
  return 0.5 * tv;
}

inline double shannon_entropy(std::span<const double> p) {
  double h = 0.0;
  for (double v : p) {
    if (v > 0.0) h -= v * std::log(v);
  }
  return h;
}

}  // namespace teststats

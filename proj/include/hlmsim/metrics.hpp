// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "hlmsim/error.hpp"
#include "hlmsim/trace.hpp"
#include "hlmsim/types.hpp"

namespace hlmsim {

/// Upload strategies, in the row order of the results table.
enum class Method { slm_only, hlm_full, u_only, i_only, u_plus_i };

inline const char* method_name(Method m) {
  switch (m) {
    case Method::slm_only: return "slm_only";
    case Method::hlm_full: return "hlm_full";
    case Method::u_only: return "u_only";
    case Method::i_only: return "i_only";
    case Method::u_plus_i: return "u_plus_i";
  }
  return "?";
}

struct LatencyParams {
  double mu_slm = 0.0;  // seconds per SLM step
  double mu_llm = 0.0;  // seconds per LLM verification step

  void validate() const {
    if (!(mu_slm >= 0.0) || !(mu_llm >= 0.0)) throw ValidationError("LatencyParams: latencies must be >= 0");
  }
};

/// Whether the uplink payload enters the energy term literally in bits or
/// normalized to megabits.
enum class PayloadFactor { literal_bits, normalized_mbits };

/// Whether l_s counts every drafted token or only locally committed ones.
enum class SlmCountMode { all, local_only };

struct EnergyParams {
  double eps_u = 300.0;
  double eps_r = 350.0;
  double eps_s = 100.0;
  PayloadFactor payload_factor = PayloadFactor::normalized_mbits;
  SlmCountMode slm_count_mode = SlmCountMode::all;

  void validate() const {
    if (!(eps_u >= 0.0) || !(eps_r >= 0.0) || !(eps_s >= 0.0)) {
      throw ValidationError("EnergyParams: cost coefficients must be >= 0");
    }
  }
};

struct TokenCounts {
  std::uint64_t uploaded = 0;  // l_u
  std::uint64_t rejected = 0;  // l_r
  std::uint64_t local = 0;     // l_s
};

/// Token throughput of one step: 1/(mu_slm + mu_uplink + mu_llm) on upload,
/// 1/mu_slm on a local commit. An infinite uplink (outage) yields 0.
inline double step_throughput(bool delta, double mu_uplink, const LatencyParams& lat) {
  lat.validate();
  if (delta) {
    const double total = lat.mu_slm + mu_uplink + lat.mu_llm;
    if (std::isinf(total)) return 0.0;
    return 1.0 / total;
  }
  if (!(lat.mu_slm > 0.0)) throw ParamError("step_throughput: mu_slm must be positive when delta=0");
  return 1.0 / lat.mu_slm;
}

inline double payload_energy_factor(std::uint64_t bits, PayloadFactor mode) {
  const auto b = static_cast<double>(bits);
  return mode == PayloadFactor::literal_bits ? b : b / 1e6;
}

/// e = l_u * B * eps_u + l_r * eps_r + l_s * eps_s, with B scaled per the
/// payload factor mode.
inline double total_energy(const TokenCounts& counts, std::uint64_t payload_b, const EnergyParams& ep) {
  ep.validate();
  if (counts.rejected > counts.uploaded) throw ValidationError("total_energy: rejected count exceeds uploaded count");
  const double bf = payload_energy_factor(payload_b, ep.payload_factor);
  return static_cast<double>(counts.uploaded) * bf * ep.eps_u +
         static_cast<double>(counts.rejected) * ep.eps_r +
         static_cast<double>(counts.local) * ep.eps_s;
}

/// eta = 1 - e_run / e_hlm_baseline. Negative when the run costs more than
/// the baseline.
inline double energy_saving(double e_run, double e_hlm_baseline) {
  if (!(e_hlm_baseline > 0.0)) throw ParamError("energy_saving: baseline energy must be positive");
  return 1.0 - e_run / e_hlm_baseline;
}

/// One cell of the results table.
struct RunSummary {
  Method method = Method::slm_only;
  std::optional<std::uint32_t> k;
  std::optional<double> gamma;
  std::uint64_t tokens_total = 0;
  std::uint64_t upload_count = 0;  // l_u
  std::uint64_t reject_count = 0;  // l_r
  std::uint64_t local_count = 0;   // l_s (per the configured count mode)
  double upload_rate = 0.0;
  double reject_rate = 0.0;  // over uploaded tokens; 0 when nothing uploaded
  double energy_total = 0.0;
  double energy_saving = 0.0;
  double mean_throughput = 0.0;
  double fidelity = 0.0;  // emitted-token agreement with the hlm_full baseline
  std::uint64_t seed = 0;
};

/// The generated tokens and the per-step records of one prompt's decode.
struct PromptOutcome {
  std::vector<TokenId> emitted;
  std::vector<DecodeStepRecord> steps;
};

inline TokenCounts count_tokens(const std::vector<PromptOutcome>& run, SlmCountMode mode) {
  TokenCounts counts;
  std::uint64_t total = 0;
  for (const auto& prompt : run) {
    for (const auto& rec : prompt.steps) {
      ++total;
      if (rec.delta) {
        ++counts.uploaded;
        if (rec.verify && rec.verify->decision == VerifyDecision::rejected) ++counts.rejected;
      } else {
        if (mode == SlmCountMode::local_only) ++counts.local;
      }
    }
  }
  if (mode == SlmCountMode::all) counts.local = total;
  return counts;
}

inline double run_energy(const std::vector<PromptOutcome>& run, std::uint64_t payload_b, const EnergyParams& ep) {
  return total_energy(count_tokens(run, ep.slm_count_mode), payload_b, ep);
}

/// Position-wise agreement of emitted tokens, truncated to the shorter
/// sequence, pooled over prompts.
inline double fidelity(const std::vector<PromptOutcome>& run, const std::vector<PromptOutcome>& baseline) {
  if (run.size() != baseline.size()) throw ValidationError("fidelity: prompt count mismatch with baseline");
  std::uint64_t matches = 0;
  std::uint64_t compared = 0;
  for (std::size_t p = 0; p < run.size(); ++p) {
    const auto& a = run[p].emitted;
    const auto& b = baseline[p].emitted;
    const std::size_t n = std::min(a.size(), b.size());
    for (std::size_t i = 0; i < n; ++i) {
      if (a[i] == b[i]) ++matches;
    }
    compared += n;
  }
  return compared == 0 ? 0.0 : static_cast<double>(matches) / static_cast<double>(compared);
}

/// Aggregates one method cell against the full-verification baseline.
/// Mean throughput is harmonic: tokens_total / sum of per-step times.
inline RunSummary summarize(const std::vector<PromptOutcome>& run, const EnergyParams& ep,
                            const std::vector<PromptOutcome>& baseline, double baseline_energy) {
  std::uint64_t tokens = 0;
  double total_time = 0.0;
  for (const auto& prompt : run) {
    tokens += prompt.steps.size();
    for (const auto& rec : prompt.steps) total_time += rec.step_time_s;
  }
  if (tokens == 0) throw ParamError("summarize: empty run");

  std::uint64_t payload_b = 0;
  for (const auto& prompt : run) {
    for (const auto& rec : prompt.steps) {
      if (rec.payload_bits > 0) {
        payload_b = rec.payload_bits;
        break;
      }
    }
    if (payload_b > 0) break;
  }

  const TokenCounts counts = count_tokens(run, ep.slm_count_mode);
  RunSummary s;
  s.tokens_total = tokens;
  s.upload_count = counts.uploaded;
  s.reject_count = counts.rejected;
  s.local_count = counts.local;
  s.upload_rate = static_cast<double>(counts.uploaded) / static_cast<double>(tokens);
  s.reject_rate = counts.uploaded == 0
                      ? 0.0
                      : static_cast<double>(counts.rejected) / static_cast<double>(counts.uploaded);
  s.energy_total = total_energy(counts, payload_b, ep);
  s.energy_saving = energy_saving(s.energy_total, baseline_energy);
  s.mean_throughput = std::isinf(total_time) ? 0.0 : static_cast<double>(tokens) / total_time;
  s.fidelity = fidelity(run, baseline);
  return s;
}

}  // namespace hlmsim

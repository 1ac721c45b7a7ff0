// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hlmsim/backend.hpp"
#include "hlmsim/channel.hpp"
#include "hlmsim/error.hpp"
#include "hlmsim/importance.hpp"
#include "hlmsim/metrics.hpp"
#include "hlmsim/rng.hpp"
#include "hlmsim/speculative.hpp"
#include "hlmsim/trace.hpp"
#include "hlmsim/types.hpp"
#include "hlmsim/uncertainty.hpp"

namespace hlmsim {

/// Everything one decode needs. `method` selects which gate terms are live.
struct RunConfig {
  Vocabulary vocab;
  std::size_t s_max = 0;
  TokenId eos_token = 0;
  UncertaintyConfig uncertainty;
  ImportanceConfig importance;
  ChannelParams channel;
  LatencyParams latency;
  EnergyParams energy;
  Method method = Method::u_plus_i;
  std::uint64_t master_seed = 0;

  void validate() const {
    if (s_max == 0) throw ValidationError("RunConfig: s_max must be positive");
    if (!vocab.contains(eos_token)) throw ValidationError("RunConfig: eos_token outside vocabulary");
    uncertainty.validate();
    importance.validate();
    channel.validate();
    latency.validate();
    energy.validate();
    if (!(latency.mu_slm > 0.0)) throw ValidationError("RunConfig: mu_slm must be positive");
    if (channel.vocab_size != vocab.size()) throw ValidationError("RunConfig: channel vocab_size disagrees with vocabulary");
  }
};

namespace detail {

inline constexpr std::uint64_t kDecodeTag = 0x4445434f4445ull;  // "DECODE"
inline constexpr std::uint64_t kPromptTag = 0x50524f4d5054ull;  // "PROMPT"

inline bool effective_delta(Method method, const GateDecision& gate, double theta_u) {
  switch (method) {
    case Method::slm_only: return false;
    case Method::hlm_full: return true;
    case Method::u_only: return gate.u_value > theta_u;
    case Method::i_only: return gate.importance_pass;
    case Method::u_plus_i: return gate.delta;
  }
  throw ParamError("effective_delta: unknown method");
}

}  // namespace detail

/// Per-prompt seed, derived so prompt sets are independently reproducible.
inline std::uint64_t prompt_run_seed(std::uint64_t master_seed, std::size_t prompt_index) {
  return mix_seed(mix_seed(master_seed, detail::kDecodeTag), prompt_index);
}

/// The autoregressive loop: SLM forward, draft sample, gate, optional
/// upload/verify/resample, append; stops on EOS emission or at s_max.
///
/// Every step index owns one RNG child stream with a fixed consumption
/// order: 1 uniform for the draft, N for temperatures, N for perturbation
/// resamples, then (only on upload) the fading draw and the verification
/// draws. Gate parameters therefore cannot perturb the draft drawn at any
/// step whose context prefix is unchanged.
inline PromptOutcome decode(const RunConfig& cfg, const LmBackend& backend,
                            std::span<const TokenId> prompt, std::uint64_t run_seed) {
  cfg.validate();
  if (prompt.size() >= cfg.s_max) throw ValidationError("decode: prompt must be shorter than s_max");
  TokenSequence seq(std::vector<TokenId>(prompt.begin(), prompt.end()), cfg.s_max, cfg.eos_token, cfg.vocab);
  const SeededRng run_rng(run_seed);

  PromptOutcome out;
  const bool need_matrix = cfg.importance.scope == TopkScope::matrix;
  for (std::uint64_t t = 0; !seq.full(); ++t) {
    SeededRng step_rng = run_rng.child(t);

    const ModelOutput slm = backend.slm_forward(seq);
    const ProbabilityVector x = softmax(slm.logits, 1.0);
    const TokenId draft = sample(x, step_rng);
    const double u = estimate_uncertainty(slm.logits, draft, cfg.uncertainty, step_rng);

    const std::vector<double> row = attention_row(slm.attention, seq.size() + 1);
    std::optional<std::vector<double>> matrix_values;
    std::optional<std::span<const double>> matrix_span;
    if (need_matrix) {
      matrix_values = flattened_attention(slm.attention);
      matrix_span = std::span<const double>(*matrix_values);
    }
    const GateDecision gate = decide_upload(u, row, matrix_span, cfg.importance, cfg.uncertainty.threshold);

    DecodeStepRecord rec;
    rec.step_index = t;
    rec.draft_token = draft;
    rec.u_value = u;
    rec.gate = gate;
    rec.delta = detail::effective_delta(cfg.method, gate, cfg.uncertainty.threshold);

    if (rec.delta) {
      const double h = draw_fading(cfg.channel, step_rng);
      rec.uplink_time_s = uplink_time(cfg.channel, h);
      rec.payload_bits = payload_bits(cfg.channel);
      const ModelOutput llm = backend.llm_forward(seq);
      const ProbabilityVector y = softmax(llm.logits, 1.0);
      rec.verify = verify(draft, x, y, step_rng);
      rec.emitted_token = rec.verify->emitted_token;
      rec.step_time_s = cfg.latency.mu_slm + rec.uplink_time_s + cfg.latency.mu_llm;
    } else {
      rec.emitted_token = draft;
      rec.step_time_s = cfg.latency.mu_slm;
    }

    seq.append(rec.emitted_token);
    out.emitted.push_back(rec.emitted_token);
    out.steps.push_back(std::move(rec));
    if (out.emitted.back() == cfg.eos_token) break;
  }
  return out;
}

/// Uniform random prompts of fixed length. The draw stream is independent of
/// every decode stream. The 64-bit modulo bias is ~|V|/2^64 and ignored.
inline std::vector<std::vector<TokenId>> synth_prompts(std::uint32_t n_prompts, std::uint32_t prompt_len,
                                                       const Vocabulary& vocab, std::uint64_t master_seed) {
  std::vector<std::vector<TokenId>> prompts(n_prompts);
  for (std::uint32_t p = 0; p < n_prompts; ++p) {
    SeededRng rng(mix_seed(mix_seed(master_seed, detail::kPromptTag), p));
    prompts[p].resize(prompt_len);
    for (auto& id : prompts[p]) id = static_cast<TokenId>(rng.next_u64() % vocab.size());
  }
  return prompts;
}

struct SweepSpec {
  std::vector<std::uint32_t> k_values{3, 5, 7, 9, 11};
  std::vector<double> gamma_values{0.5, 1.0, 1.5};
  std::vector<Method> methods{Method::slm_only, Method::hlm_full, Method::u_only, Method::i_only, Method::u_plus_i};
};

struct CellResult {
  Method method = Method::slm_only;
  std::optional<std::uint32_t> k;
  std::optional<double> gamma;
  std::vector<PromptOutcome> prompts;
  RunSummary summary;
};

struct ExperimentResult {
  std::vector<CellResult> cells;

  std::vector<RunSummary> summaries() const {
    std::vector<RunSummary> out;
    out.reserve(cells.size());
    for (const auto& c : cells) out.push_back(c.summary);
    return out;
  }
};

/// Runs every requested method cell over the full prompt set. The hlm_full
/// run over the same prompts and seeds is always computed first: it is the
/// baseline for the energy saving ratio and the fidelity column. Cells are
/// emitted in table order: slm, hlm, u, i, then the (k, gamma) grid with k
/// ascending and gamma ascending within k.
inline ExperimentResult run_experiment(const RunConfig& base, const LmBackend& backend,
                                       const std::vector<std::vector<TokenId>>& prompts,
                                       const SweepSpec& sweep) {
  base.validate();
  if (prompts.empty()) throw ParamError("run_experiment: prompt set is empty");
  if (sweep.methods.empty()) throw ParamError("run_experiment: no methods requested");

  const auto run_cell = [&](const RunConfig& cfg) {
    std::vector<PromptOutcome> outcomes;
    outcomes.reserve(prompts.size());
    for (std::size_t p = 0; p < prompts.size(); ++p) {
      outcomes.push_back(decode(cfg, backend, prompts[p], prompt_run_seed(cfg.master_seed, p)));
    }
    return outcomes;
  };

  RunConfig hlm_cfg = base;
  hlm_cfg.method = Method::hlm_full;
  std::vector<PromptOutcome> baseline = run_cell(hlm_cfg);
  const double baseline_energy = run_energy(baseline, payload_bits(base.channel), base.energy);

  const auto wants = [&](Method m) {
    return std::find(sweep.methods.begin(), sweep.methods.end(), m) != sweep.methods.end();
  };

  std::vector<std::uint32_t> ks = sweep.k_values;
  std::vector<double> gammas = sweep.gamma_values;
  std::sort(ks.begin(), ks.end());
  std::sort(gammas.begin(), gammas.end());

  ExperimentResult result;
  const auto add_cell = [&](Method m, std::optional<std::uint32_t> k, std::optional<double> gamma,
                            std::vector<PromptOutcome> outcomes) {
    CellResult cell;
    cell.method = m;
    cell.k = k;
    cell.gamma = gamma;
    cell.summary = summarize(outcomes, base.energy, baseline, baseline_energy);
    cell.summary.method = m;
    cell.summary.k = k;
    cell.summary.gamma = gamma;
    cell.summary.seed = base.master_seed;
    cell.prompts = std::move(outcomes);
    result.cells.push_back(std::move(cell));
  };

  for (Method m : {Method::slm_only, Method::hlm_full, Method::u_only, Method::i_only}) {
    if (!wants(m)) continue;
    if (m == Method::hlm_full) {
      add_cell(m, std::nullopt, std::nullopt, baseline);
      continue;
    }
    RunConfig cfg = base;
    cfg.method = m;
    const bool gated = m == Method::i_only;
    add_cell(m, gated ? std::optional<std::uint32_t>(cfg.importance.k) : std::nullopt,
             gated ? std::optional<double>(cfg.importance.gamma) : std::nullopt, run_cell(cfg));
  }
  if (wants(Method::u_plus_i)) {
    for (std::uint32_t k : ks) {
      for (double gamma : gammas) {
        RunConfig cfg = base;
        cfg.method = Method::u_plus_i;
        cfg.importance.k = k;
        cfg.importance.gamma = gamma;
        add_cell(Method::u_plus_i, k, gamma, run_cell(cfg));
      }
    }
  }
  return result;
}

}  // namespace hlmsim

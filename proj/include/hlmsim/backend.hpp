// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hlmsim/error.hpp"
#include "hlmsim/rng.hpp"
#include "hlmsim/types.hpp"

namespace hlmsim {

/// Query/key embeddings for every position up to and including the current
/// one. Position indices are 1-based to match the row/column convention of
/// the attention matrix.
struct AttentionState {
  std::vector<std::vector<double>> queries;
  std::vector<std::vector<double>> keys;
  std::uint32_t d_k = 0;

  std::size_t positions() const { return keys.size(); }
};

struct ModelOutput {
  LogitVector logits;
  AttentionState attention;
};

/// Attention row of position i over its i-1 predecessors:
/// softmax_j( q_i . k_j / sqrt(d_k) ), j = 1..i-1.
/// Returns an empty row for i == 1 (no predecessors); the importance gate
/// treats that as its degenerate case.
inline std::vector<double> attention_row(const AttentionState& state, std::size_t i) {
  const std::size_t n = state.positions();
  if (i < 1 || i > n) throw ValidationError("attention_row: position index out of range");
  if (state.queries.size() != n) throw ValidationError("attention_row: query/key count mismatch");
  if (i == 1) return {};
  const auto& q = state.queries[i - 1];
  if (q.size() != state.d_k) throw ValidationError("attention_row: query dimension mismatch");
  const double inv_sqrt_dk = 1.0 / std::sqrt(static_cast<double>(state.d_k));
  std::vector<double> scores(i - 1);
  for (std::size_t j = 0; j < i - 1; ++j) {
    const auto& k = state.keys[j];
    if (k.size() != state.d_k) throw ValidationError("attention_row: key dimension mismatch");
    double dot = 0.0;
    for (std::size_t m = 0; m < q.size(); ++m) dot += q[m] * k[m];
    scores[j] = dot * inv_sqrt_dk;
  }
  return stable_softmax(scores, 1.0);
}

/// Every defined attention weight of the current matrix (rows 2..n, each row
/// over its predecessors), flattened in row order. This is the pool the
/// matrix-scope top-k test sorts; structural zeros above the causal diagonal
/// are not weights and are not included.
inline std::vector<double> flattened_attention(const AttentionState& state) {
  std::vector<double> out;
  const std::size_t n = state.positions();
  if (n >= 2) out.reserve(n * (n - 1) / 2);
  for (std::size_t i = 2; i <= n; ++i) {
    const auto row = attention_row(state, i);
    out.insert(out.end(), row.begin(), row.end());
  }
  return out;
}

/// Synthetic SLM/LLM pair. Stands in for a real model pair: logits are a
/// deterministic hash of (seed, bounded context suffix), and `divergence`
/// dials how far the SLM deviates from the LLM (0 = identical twins).
struct SyntheticPairConfig {
  Vocabulary vocab;
  std::uint32_t d_k = 4;
  double divergence = 0.5;       // in [0, 1]
  double logit_scale = 1.0;      // > 0
  std::uint64_t seed = 0;
  /// Linear score bonus for recent keys. 0 leaves rows as pure seeded
  /// softmaxes, which flatten as the sequence grows (the collapse regime);
  /// positive slopes sharpen rows toward recent context.
  double attn_recency_slope = 0.0;
  /// Context suffix window hashed into the logits.
  std::uint32_t context_window = 4;

  void validate() const {
    if (!(divergence >= 0.0 && divergence <= 1.0)) throw ValidationError("SyntheticPairConfig: divergence must be in [0,1]");
    if (!(logit_scale > 0.0) || !std::isfinite(logit_scale)) throw ValidationError("SyntheticPairConfig: logit_scale must be positive");
    if (d_k < 1) throw ValidationError("SyntheticPairConfig: d_k must be >= 1");
    if (attn_recency_slope != 0.0 && d_k < 2) {
      throw ValidationError("SyntheticPairConfig: recency slope needs d_k >= 2");
    }
    if (!std::isfinite(attn_recency_slope) || attn_recency_slope < 0.0) {
      throw ValidationError("SyntheticPairConfig: attn_recency_slope must be >= 0");
    }
    if (context_window < 1) throw ValidationError("SyntheticPairConfig: context_window must be >= 1");
  }
};

/// Pluggable model interface: logits plus the attention state at the current
/// position. Implementations must be pure functions of (context, their own
/// construction parameters).
class LmBackend {
 public:
  virtual ~LmBackend() = default;
  virtual ModelOutput slm_forward(const TokenSequence& context) const = 0;
  virtual ModelOutput llm_forward(const TokenSequence& context) const = 0;
};

class SyntheticPairBackend final : public LmBackend {
 public:
  explicit SyntheticPairBackend(SyntheticPairConfig cfg) : cfg_(cfg) { cfg_.validate(); }

  const SyntheticPairConfig& config() const { return cfg_; }

  ModelOutput slm_forward(const TokenSequence& context) const override { return forward(context, /*slm=*/true); }
  ModelOutput llm_forward(const TokenSequence& context) const override { return forward(context, /*slm=*/false); }

 private:
  // Stream tags keep the logit, noise, and embedding draws independent.
  static constexpr std::uint64_t kLogitTag = 0x4c4f474954ull;      // "LOGIT"
  static constexpr std::uint64_t kNoiseTag = 0x4e4f495345ull;      // "NOISE"
  static constexpr std::uint64_t kAttnTag = 0x4154544eull;         // "ATTN"
  static constexpr std::uint64_t kQueryTag = 0x51554552ull;        // "QUER"
  static constexpr std::uint64_t kTokenTag = 0x544f4b454eull;      // "TOKEN"

  ModelOutput forward(const TokenSequence& context, bool slm) const {
    if (context.size() >= context.max_len()) {
      throw ValidationError("backend forward: context already at max_len");
    }
    const auto tokens = context.tokens();
    const std::uint32_t vsize = cfg_.vocab.size();

    // Hash the bounded suffix, oldest to newest. Suffixes of different
    // lengths hash apart because the chain starts from a fixed tag.
    std::uint64_t h = mix_seed(cfg_.seed, kLogitTag);
    const std::size_t win = std::min<std::size_t>(cfg_.context_window, tokens.size());
    for (std::size_t j = tokens.size() - win; j < tokens.size(); ++j) {
      h = mix_seed(h, static_cast<std::uint64_t>(tokens[j]) + 1);
    }

    std::vector<double> logits(vsize);
    SeededRng base_rng(h);
    for (auto& v : logits) v = cfg_.logit_scale * base_rng.next_gaussian();
    if (slm && cfg_.divergence > 0.0) {
      SeededRng noise_rng(mix_seed(h, kNoiseTag));
      for (auto& v : logits) v += cfg_.divergence * cfg_.logit_scale * noise_rng.next_gaussian();
    }

    return ModelOutput{LogitVector(std::move(logits)), attention_state(context)};
  }

  /// Every position gets a seeded Gaussian embedding pair. Filled positions
  /// draw from a stream keyed by their token, so repeated tokens share
  /// embeddings and rows carry the score ties real content produces; the
  /// current query position, which has no token yet, draws from a stream
  /// keyed by (position, previous token). A nonzero recency slope is encoded
  /// in the last embedding coordinate (query: slope * sqrt(d_k), key: its
  /// position index) so rows stay exact softmaxes of q.k/sqrt(d_k).
  AttentionState attention_state(const TokenSequence& context) const {
    const auto tokens = context.tokens();
    const std::size_t current = tokens.size() + 1;  // 1-based position of the draft
    AttentionState state;
    state.d_k = cfg_.d_k;
    state.queries.reserve(current);
    state.keys.reserve(current);
    const bool biased = cfg_.attn_recency_slope > 0.0;
    const std::uint32_t gauss_dims = biased ? cfg_.d_k - 1 : cfg_.d_k;
    const double q_bias = cfg_.attn_recency_slope * std::sqrt(static_cast<double>(cfg_.d_k));

    const std::uint64_t attn_seed = mix_seed(cfg_.seed, kAttnTag);
    for (std::size_t pos = 1; pos <= current; ++pos) {
      std::uint64_t key;
      if (pos <= tokens.size()) {
        key = mix_seed(kTokenTag, static_cast<std::uint64_t>(tokens[pos - 1]) + 1);
      } else {
        const std::uint64_t prev = tokens.empty() ? 0 : static_cast<std::uint64_t>(tokens.back()) + 1;
        key = mix_seed(mix_seed(pos, kQueryTag), prev);
      }
      SeededRng rng(mix_seed(attn_seed, key));
      std::vector<double> q(cfg_.d_k), k(cfg_.d_k);
      for (std::uint32_t m = 0; m < gauss_dims; ++m) q[m] = rng.next_gaussian();
      for (std::uint32_t m = 0; m < gauss_dims; ++m) k[m] = rng.next_gaussian();
      if (biased) {
        q[cfg_.d_k - 1] = q_bias;
        k[cfg_.d_k - 1] = static_cast<double>(pos);
      }
      state.queries.push_back(std::move(q));
      state.keys.push_back(std::move(k));
    }
    return state;
  }

  SyntheticPairConfig cfg_;
};

}  // namespace hlmsim

// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "hlmsim/error.hpp"
#include "hlmsim/rng.hpp"

namespace hlmsim {

using TokenId = std::uint32_t;

/// Post-normalization tolerance on the probability mass.
inline constexpr double kProbSumTolerance = 1e-9;
/// Construction-time drift that is silently renormalized away; anything
/// larger is rejected as a real bug.
inline constexpr double kProbDriftTolerance = 1e-6;

class Vocabulary {
 public:
  explicit Vocabulary(std::uint32_t size) : size_(size) {
    if (size < 2) throw ValidationError("Vocabulary: size must be >= 2, got " + std::to_string(size));
  }
  std::uint32_t size() const { return size_; }
  bool contains(TokenId id) const { return id < size_; }

 private:
  std::uint32_t size_;
};

/// Pre-normalization scores. All entries must be finite.
class LogitVector {
 public:
  explicit LogitVector(std::vector<double> logits) : logits_(std::move(logits)) {
    if (logits_.empty()) throw ValidationError("LogitVector: empty");
    for (double v : logits_) {
      if (!std::isfinite(v)) throw ValidationError("LogitVector: non-finite entry");
    }
  }
  std::span<const double> values() const { return logits_; }
  std::size_t size() const { return logits_.size(); }
  double operator[](std::size_t i) const { return logits_[i]; }

 private:
  std::vector<double> logits_;
};

/// A distribution over the vocabulary: non-negative entries summing to 1
/// within kProbSumTolerance. Construction renormalizes drift up to
/// kProbDriftTolerance once and rejects anything worse.
class ProbabilityVector {
 public:
  explicit ProbabilityVector(std::vector<double> probs) : probs_(std::move(probs)) {
    if (probs_.empty()) throw ValidationError("ProbabilityVector: empty");
    double sum = 0.0;
    for (double p : probs_) {
      if (!(p >= 0.0)) throw ValidationError("ProbabilityVector: negative or NaN entry");
      sum += p;
    }
    if (std::abs(sum - 1.0) > kProbDriftTolerance) {
      throw ValidationError("ProbabilityVector: mass " + std::to_string(sum) + " drifts beyond 1e-6 from 1");
    }
    if (sum != 1.0) {
      for (double& p : probs_) p /= sum;
    }
    double check = 0.0;
    for (double p : probs_) check += p;
    if (std::abs(check - 1.0) > kProbSumTolerance) {
      throw ValidationError("ProbabilityVector: mass off by more than 1e-9 after renormalization");
    }
  }

  std::span<const double> probs() const { return probs_; }
  std::size_t size() const { return probs_.size(); }
  double operator[](std::size_t i) const { return probs_[i]; }

 private:
  std::vector<double> probs_;
};

/// Ordered token ids with a hard length cap and a designated EOS id.
class TokenSequence {
 public:
  TokenSequence(std::vector<TokenId> tokens, std::size_t max_len, TokenId eos_token, Vocabulary vocab)
      : tokens_(std::move(tokens)), max_len_(max_len), eos_token_(eos_token), vocab_(vocab) {
    if (max_len_ == 0) throw ValidationError("TokenSequence: max_len must be positive");
    if (tokens_.size() > max_len_) {
      throw ValidationError("TokenSequence: length " + std::to_string(tokens_.size()) +
                            " exceeds max_len " + std::to_string(max_len_));
    }
    if (!vocab_.contains(eos_token_)) throw ValidationError("TokenSequence: eos_token outside vocabulary");
    for (TokenId id : tokens_) {
      if (!vocab_.contains(id)) throw ValidationError("TokenSequence: token id outside vocabulary");
    }
  }

  void append(TokenId id) {
    if (full()) throw ValidationError("TokenSequence: append past max_len");
    if (!vocab_.contains(id)) throw ValidationError("TokenSequence: token id outside vocabulary");
    tokens_.push_back(id);
  }

  std::span<const TokenId> tokens() const { return tokens_; }
  std::size_t size() const { return tokens_.size(); }
  bool empty() const { return tokens_.empty(); }
  bool full() const { return tokens_.size() >= max_len_; }
  std::size_t max_len() const { return max_len_; }
  TokenId eos_token() const { return eos_token_; }
  const Vocabulary& vocab() const { return vocab_; }

 private:
  std::vector<TokenId> tokens_;
  std::size_t max_len_;
  TokenId eos_token_;
  Vocabulary vocab_;
};

/// Max-subtracted softmax over raw scores. Shared numeric core for token
/// distributions and attention rows.
inline std::vector<double> stable_softmax(std::span<const double> scores, double temperature) {
  if (scores.empty()) throw ParamError("softmax: no scores");
  if (!(temperature > 0.0) || !std::isfinite(temperature)) {
    throw ParamError("softmax: temperature must be positive and finite");
  }
  const double m = *std::max_element(scores.begin(), scores.end());
  std::vector<double> out(scores.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    out[i] = std::exp((scores[i] - m) / temperature);
    sum += out[i];
  }
  for (double& v : out) v /= sum;
  return out;
}

inline ProbabilityVector softmax(const LogitVector& logits, double temperature) {
  return ProbabilityVector(stable_softmax(logits.values(), temperature));
}

/// Inverse-CDF draw. Consumption contract: exactly one uniform per call.
inline TokenId sample(const ProbabilityVector& dist, SeededRng& rng) {
  const double u = rng.next_double();
  double acc = 0.0;
  std::size_t last_positive = 0;
  bool seen_positive = false;
  for (std::size_t v = 0; v < dist.size(); ++v) {
    const double p = dist[v];
    if (p > 0.0) {
      last_positive = v;
      seen_positive = true;
    }
    acc += p;
    if (u < acc) return static_cast<TokenId>(v);
  }
  // Rounding left acc marginally below 1; emit the last token with mass.
  if (!seen_positive) throw ValidationError("sample: distribution has no positive mass");
  return static_cast<TokenId>(last_positive);
}

}  // namespace hlmsim

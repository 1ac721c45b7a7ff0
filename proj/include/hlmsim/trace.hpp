// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>

#include "hlmsim/importance.hpp"
#include "hlmsim/speculative.hpp"
#include "hlmsim/types.hpp"

namespace hlmsim {

/// Per-token trace entry. `gate` always records the full selective-upload
/// evaluation; `delta` is the upload decision actually applied, which a
/// method variant (slm_only forces 0, hlm_full forces 1, u/i use one term)
/// may override. delta=0 implies no verify outcome and emitted == draft.
struct DecodeStepRecord {
  std::uint64_t step_index = 0;
  TokenId draft_token = 0;
  double u_value = 0.0;
  GateDecision gate;
  bool delta = false;
  std::optional<VerifyOutcome> verify;
  TokenId emitted_token = 0;
  double uplink_time_s = 0.0;   // 0 when delta=0
  double step_time_s = 0.0;
  std::uint64_t payload_bits = 0;  // 0 when delta=0
};

}  // namespace hlmsim

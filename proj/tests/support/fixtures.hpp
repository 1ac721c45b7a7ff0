// SPDX-License-Identifier: Apache-2.0
//
// Shared desk-scale fixtures for harness-level tests.
#pragma once

#include <cstdint>

#include "hlmsim/backend.hpp"
#include "hlmsim/channel.hpp"
#include "hlmsim/harness.hpp"

namespace testfix {

inline hlmsim::ChannelParams desk_channel() {
  hlmsim::ChannelParams ch;
  ch.bandwidth_hz = 1e6;
  ch.tx_power_w = hlmsim::dbm_to_watts(23.0);
  ch.noise_w = hlmsim::dbm_to_watts(-104.0);
  ch.distance_m = 2500.0;
  ch.pathloss_exp = 4.0;
  ch.fading = hlmsim::FadingModel::constant;
  ch.vocab_size = 8;
  ch.prob_bits = 16;
  return ch;
}

inline hlmsim::RunConfig desk_run_config(std::uint64_t seed, std::size_t s_max = 48) {
  hlmsim::RunConfig cfg{.vocab = hlmsim::Vocabulary(8)};
  cfg.s_max = s_max;
  cfg.eos_token = 0;
  cfg.uncertainty = hlmsim::UncertaintyConfig{.n_samples = 64, .temp_lo = 0.5, .temp_hi = 2.0, .threshold = 0.2};
  cfg.importance = hlmsim::ImportanceConfig{.k = 5, .gamma = 1.0, .scope = hlmsim::TopkScope::row};
  cfg.channel = desk_channel();
  cfg.latency.mu_slm = 1.0 / 0.53;
  cfg.latency.mu_llm = 1.0 / 0.25 - cfg.latency.mu_slm - hlmsim::uplink_time(cfg.channel, 1.0);
  cfg.energy = hlmsim::EnergyParams{};
  cfg.master_seed = seed;
  cfg.method = hlmsim::Method::u_plus_i;
  return cfg;
}

inline hlmsim::SyntheticPairConfig desk_pair(double divergence, std::uint64_t seed) {
  return hlmsim::SyntheticPairConfig{.vocab = hlmsim::Vocabulary(8),
                                     .d_k = 4,
                                     .divergence = divergence,
                                     .logit_scale = 1.0,
                                     .seed = seed};
}

}  // namespace testfix

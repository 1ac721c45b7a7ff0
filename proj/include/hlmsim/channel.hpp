// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>

#include "hlmsim/error.hpp"
#include "hlmsim/rng.hpp"

namespace hlmsim {

enum class FadingModel { constant, rayleigh };

/// Uplink parameters. All powers are in watts; the config layer converts
/// from dBm exactly once at parse time. Distance is in raw meters and enters
/// the path loss as d^-alpha with no reference-distance normalization; set
/// snr_override to pin the deterministic SNR factor directly when that
/// convention is not the one you want.
struct ChannelParams {
  double bandwidth_hz = 1e6;   // W
  double tx_power_w = 0.0;     // p
  double noise_w = 0.0;        // sigma^2
  double distance_m = 0.0;     // d
  double pathloss_exp = 4.0;   // alpha
  FadingModel fading = FadingModel::constant;
  std::uint32_t vocab_size = 0;
  std::uint32_t prob_bits = 32;  // b_prob
  /// Replaces p * d^-alpha / sigma^2; fading still multiplies.
  std::optional<double> snr_override;

  void validate() const {
    if (!(bandwidth_hz > 0.0)) throw ValidationError("ChannelParams: bandwidth_hz must be positive");
    if (!(tx_power_w > 0.0)) throw ValidationError("ChannelParams: tx_power_w must be positive");
    if (!(noise_w > 0.0)) throw ValidationError("ChannelParams: noise_w must be positive");
    if (!(distance_m > 0.0)) throw ValidationError("ChannelParams: distance_m must be positive");
    if (!(pathloss_exp >= 2.0)) throw ValidationError("ChannelParams: pathloss_exp must be >= 2");
    if (vocab_size < 2) throw ValidationError("ChannelParams: vocab_size must be >= 2");
    if (prob_bits != 16 && prob_bits != 32) throw ValidationError("ChannelParams: prob_bits must be 16 or 32");
    if (snr_override && !(*snr_override > 0.0)) throw ValidationError("ChannelParams: snr_override must be positive");
  }
};

inline double dbm_to_watts(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }

/// Uplink payload for one full distribution: |V| * b_prob bits. Integer exact.
inline std::uint64_t payload_bits(const ChannelParams& params) {
  return static_cast<std::uint64_t>(params.vocab_size) * static_cast<std::uint64_t>(params.prob_bits);
}

/// rho = h * p * d^-alpha / sigma^2 for channel gain h >= 0.
inline double snr(const ChannelParams& params, double h) {
  if (!(h >= 0.0)) throw ParamError("snr: channel gain must be >= 0");
  const double base = params.snr_override
                          ? *params.snr_override
                          : params.tx_power_w * std::pow(params.distance_m, -params.pathloss_exp) / params.noise_w;
  return h * base;
}

/// Shannon-capacity transmission time B / (W log2(1 + rho)). Zero SNR is an
/// outage and maps to +inf rather than an error so the decoding loop stays
/// total; zero payload takes zero time.
inline double uplink_time(const ChannelParams& params, double h) {
  const auto bits = static_cast<double>(payload_bits(params));
  if (bits == 0.0) return 0.0;
  const double rho = snr(params, h);
  if (!(rho > 0.0)) return std::numeric_limits<double>::infinity();
  return bits / (params.bandwidth_hz * std::log2(1.0 + rho));
}

/// h(t): exactly 1.0 in constant mode; exponential(mean 1) power gain in
/// rayleigh mode, consuming one uniform.
inline double draw_fading(const ChannelParams& params, SeededRng& rng) {
  switch (params.fading) {
    case FadingModel::constant:
      return 1.0;
    case FadingModel::rayleigh:
      return rng.next_exponential();
  }
  throw ParamError("draw_fading: unknown fading model");
}

}  // namespace hlmsim

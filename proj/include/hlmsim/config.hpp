// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "hlmsim/backend.hpp"
#include "hlmsim/channel.hpp"
#include "hlmsim/error.hpp"
#include "hlmsim/harness.hpp"

namespace hlmsim {

/// A parsed, validated run configuration: the decode parameters, the
/// synthetic backend, the prompt source, and the sweep lists.
struct SimConfig {
  RunConfig run;  // method field is set per cell by the harness
  SyntheticPairConfig backend;
  std::optional<std::uint64_t> backend_seed_explicit;
  std::vector<std::vector<TokenId>> explicit_prompts;  // empty means synthesize
  std::uint32_t n_prompts = 0;
  std::uint32_t prompt_len = 0;
  SweepSpec sweep;
};

namespace cfgdetail {

using json = nlohmann::json;

[[noreturn]] inline void fail(const std::string& key, const std::string& why) {
  throw ConfigError("config: " + key + ": " + why);
}

inline const json& section(const json& root, const std::string& name) {
  if (!root.contains(name)) fail(name, "missing section");
  const json& s = root.at(name);
  if (!s.is_object()) fail(name, "must be an object");
  return s;
}

inline void reject_unknown(const json& sec, const std::string& name, std::initializer_list<const char*> known) {
  for (const auto& [key, _] : sec.items()) {
    bool ok = false;
    for (const char* k : known) {
      if (key == k) {
        ok = true;
        break;
      }
    }
    if (!ok) fail(name + "." + key, "unknown key");
  }
}

inline bool is_nonneg_integer(const json& v) {
  return v.is_number_unsigned() || (v.is_number_integer() && v.get<std::int64_t>() >= 0);
}

template <typename T>
T get_num(const json& sec, const std::string& name, const std::string& key, T fallback, bool required = false) {
  if (!sec.contains(key)) {
    if (required) fail(name + "." + key, "missing");
    return fallback;
  }
  const json& v = sec.at(key);
  if constexpr (std::is_unsigned_v<T>) {
    if (!is_nonneg_integer(v)) fail(name + "." + key, "must be a non-negative integer");
  } else {
    if (!v.is_number()) fail(name + "." + key, "must be a number");
  }
  return v.get<T>();
}

inline std::string get_str(const json& sec, const std::string& name, const std::string& key, const std::string& fallback) {
  if (!sec.contains(key)) return fallback;
  const json& v = sec.at(key);
  if (!v.is_string()) fail(name + "." + key, "must be a string");
  return v.get<std::string>();
}

}  // namespace cfgdetail

inline Method parse_method(const std::string& name) {
  if (name == "slm_only") return Method::slm_only;
  if (name == "hlm_full") return Method::hlm_full;
  if (name == "u_only") return Method::u_only;
  if (name == "i_only") return Method::i_only;
  if (name == "u_plus_i") return Method::u_plus_i;
  throw ConfigError("config: run.methods: unknown method '" + name + "'");
}

inline SimConfig parse_config(const nlohmann::json& root) {
  using namespace cfgdetail;
  if (!root.is_object()) throw ConfigError("config: top level must be an object");
  reject_unknown(root, "config", {"backend", "uncertainty", "importance", "channel", "latency", "energy", "run"});

  SimConfig cfg{.run = RunConfig{.vocab = Vocabulary(2)},
                .backend = SyntheticPairConfig{.vocab = Vocabulary(2)}};

  // run section first: vocabulary feeds the other sections.
  const json& run = section(root, "run");
  reject_unknown(run, "run",
                 {"vocab_size", "s_max", "eos_token", "n_prompts", "prompt_len", "prompts", "master_seed",
                  "sweep_k", "sweep_gamma", "methods"});
  const auto vocab_size = get_num<std::uint32_t>(run, "run", "vocab_size", 0, true);
  if (vocab_size < 2) fail("run.vocab_size", "must be >= 2");
  cfg.run.vocab = Vocabulary(vocab_size);
  cfg.run.s_max = get_num<std::uint64_t>(run, "run", "s_max", 0, true);
  if (cfg.run.s_max == 0) fail("run.s_max", "must be positive");
  cfg.run.eos_token = get_num<TokenId>(run, "run", "eos_token", 0, true);
  if (cfg.run.eos_token >= vocab_size) fail("run.eos_token", "outside the vocabulary");
  cfg.run.master_seed = get_num<std::uint64_t>(run, "run", "master_seed", 0);

  if (run.contains("prompts")) {
    const json& prompts = run.at("prompts");
    if (!prompts.is_array() || prompts.empty()) fail("run.prompts", "must be a non-empty array of token-id arrays");
    for (const auto& p : prompts) {
      if (!p.is_array()) fail("run.prompts", "each prompt must be an array of token ids");
      std::vector<TokenId> ids;
      for (const auto& id : p) {
        if (!cfgdetail::is_nonneg_integer(id)) fail("run.prompts", "token ids must be non-negative integers");
        const auto v = id.get<std::uint64_t>();
        if (v >= vocab_size) fail("run.prompts", "token id " + std::to_string(v) + " outside the vocabulary");
        ids.push_back(static_cast<TokenId>(v));
      }
      if (ids.size() >= cfg.run.s_max) fail("run.prompts", "prompt length must be below s_max");
      cfg.explicit_prompts.push_back(std::move(ids));
    }
  } else {
    cfg.n_prompts = get_num<std::uint32_t>(run, "run", "n_prompts", 0, true);
    cfg.prompt_len = get_num<std::uint32_t>(run, "run", "prompt_len", 0, true);
    if (cfg.n_prompts == 0) fail("run.n_prompts", "must be positive");
    if (cfg.prompt_len >= cfg.run.s_max) fail("run.prompt_len", "must be below s_max");
  }

  if (run.contains("sweep_k")) {
    const json& ks = run.at("sweep_k");
    if (!ks.is_array() || ks.empty()) fail("run.sweep_k", "must be a non-empty array");
    cfg.sweep.k_values.clear();
    for (const auto& k : ks) {
      if (!cfgdetail::is_nonneg_integer(k) || k.get<std::uint64_t>() < 1) {
        fail("run.sweep_k", "entries must be integers >= 1");
      }
      cfg.sweep.k_values.push_back(k.get<std::uint32_t>());
    }
  }
  if (run.contains("sweep_gamma")) {
    const json& gs = run.at("sweep_gamma");
    if (!gs.is_array() || gs.empty()) fail("run.sweep_gamma", "must be a non-empty array");
    cfg.sweep.gamma_values.clear();
    for (const auto& g : gs) {
      if (!g.is_number() || !(g.get<double>() >= 0.0)) fail("run.sweep_gamma", "entries must be numbers >= 0");
      cfg.sweep.gamma_values.push_back(g.get<double>());
    }
  }
  if (run.contains("methods")) {
    const json& ms = run.at("methods");
    if (!ms.is_array() || ms.empty()) fail("run.methods", "must be a non-empty array");
    cfg.sweep.methods.clear();
    for (const auto& m : ms) {
      if (!m.is_string()) fail("run.methods", "entries must be strings");
      cfg.sweep.methods.push_back(parse_method(m.get<std::string>()));
    }
  }

  const json& backend = section(root, "backend");
  reject_unknown(backend, "backend", {"d_k", "divergence", "logit_scale", "attn_recency_slope", "context_window", "seed"});
  cfg.backend.vocab = cfg.run.vocab;
  cfg.backend.d_k = get_num<std::uint32_t>(backend, "backend", "d_k", 4);
  cfg.backend.divergence = get_num<double>(backend, "backend", "divergence", 0.5);
  cfg.backend.logit_scale = get_num<double>(backend, "backend", "logit_scale", 1.0);
  cfg.backend.attn_recency_slope = get_num<double>(backend, "backend", "attn_recency_slope", 0.0);
  cfg.backend.context_window = get_num<std::uint32_t>(backend, "backend", "context_window", 4);
  if (backend.contains("seed")) {
    cfg.backend_seed_explicit = get_num<std::uint64_t>(backend, "backend", "seed", 0);
  }
  cfg.backend.seed = cfg.backend_seed_explicit.value_or(cfg.run.master_seed);
  try {
    cfg.backend.validate();
  } catch (const ValidationError& e) {
    fail("backend", e.what());
  }

  const json& unc = section(root, "uncertainty");
  reject_unknown(unc, "uncertainty", {"n_samples", "temp_lo", "temp_hi", "theta_u", "temperature_law"});
  cfg.run.uncertainty.n_samples = get_num<std::uint32_t>(unc, "uncertainty", "n_samples", 64);
  cfg.run.uncertainty.temp_lo = get_num<double>(unc, "uncertainty", "temp_lo", 0.5);
  cfg.run.uncertainty.temp_hi = get_num<double>(unc, "uncertainty", "temp_hi", 2.0);
  cfg.run.uncertainty.threshold = get_num<double>(unc, "uncertainty", "theta_u", 0.2);
  // The temperature law is part of the config contract; only the linear
  // uniform draw is implemented.
  const std::string law = get_str(unc, "uncertainty", "temperature_law", "linear-uniform");
  if (law != "linear-uniform") fail("uncertainty.temperature_law", "only 'linear-uniform' is supported");
  try {
    cfg.run.uncertainty.validate();
  } catch (const ValidationError& e) {
    fail("uncertainty", e.what());
  }

  const json& imp = section(root, "importance");
  reject_unknown(imp, "importance", {"k", "gamma", "scope"});
  cfg.run.importance.k = get_num<std::uint32_t>(imp, "importance", "k", 5);
  cfg.run.importance.gamma = get_num<double>(imp, "importance", "gamma", 1.0);
  const std::string scope = get_str(imp, "importance", "scope", "row");
  if (scope == "row") {
    cfg.run.importance.scope = TopkScope::row;
  } else if (scope == "matrix") {
    cfg.run.importance.scope = TopkScope::matrix;
  } else {
    fail("importance.scope", "must be 'row' or 'matrix'");
  }
  try {
    cfg.run.importance.validate();
  } catch (const ValidationError& e) {
    fail("importance", e.what());
  }

  const json& ch = section(root, "channel");
  reject_unknown(ch, "channel",
                 {"bandwidth_hz", "tx_power_dbm", "noise_dbm", "distance_m", "pathloss_exp", "fading", "prob_bits",
                  "snr_override"});
  cfg.run.channel.bandwidth_hz = get_num<double>(ch, "channel", "bandwidth_hz", 1e6);
  // dBm converts to watts here, exactly once; everything downstream is watts.
  cfg.run.channel.tx_power_w = dbm_to_watts(get_num<double>(ch, "channel", "tx_power_dbm", 23.0));
  cfg.run.channel.noise_w = dbm_to_watts(get_num<double>(ch, "channel", "noise_dbm", -104.0));
  cfg.run.channel.distance_m = get_num<double>(ch, "channel", "distance_m", 2500.0);
  cfg.run.channel.pathloss_exp = get_num<double>(ch, "channel", "pathloss_exp", 4.0);
  cfg.run.channel.vocab_size = vocab_size;
  cfg.run.channel.prob_bits = get_num<std::uint32_t>(ch, "channel", "prob_bits", 32);
  const std::string fading = get_str(ch, "channel", "fading", "constant");
  if (fading == "constant") {
    cfg.run.channel.fading = FadingModel::constant;
  } else if (fading == "rayleigh") {
    cfg.run.channel.fading = FadingModel::rayleigh;
  } else {
    fail("channel.fading", "must be 'constant' or 'rayleigh'");
  }
  if (ch.contains("snr_override")) {
    cfg.run.channel.snr_override = get_num<double>(ch, "channel", "snr_override", 0.0);
  }
  try {
    cfg.run.channel.validate();
  } catch (const ValidationError& e) {
    fail("channel", e.what());
  }

  const json& lat = section(root, "latency");
  reject_unknown(lat, "latency", {"mu_slm", "mu_llm", "hlm_target_throughput"});
  cfg.run.latency.mu_slm = get_num<double>(lat, "latency", "mu_slm", 1.0 / 0.53);
  if (!(cfg.run.latency.mu_slm > 0.0)) fail("latency.mu_slm", "must be positive");
  const double target = get_num<double>(lat, "latency", "hlm_target_throughput", 0.25);
  if (!(target > 0.0)) fail("latency.hlm_target_throughput", "must be positive");
  bool auto_llm = true;
  if (lat.contains("mu_llm")) {
    const json& v = lat.at("mu_llm");
    if (v.is_string()) {
      if (v.get<std::string>() != "auto") fail("latency.mu_llm", "must be a number or 'auto'");
    } else if (v.is_number()) {
      cfg.run.latency.mu_llm = v.get<double>();
      if (!(cfg.run.latency.mu_llm >= 0.0)) fail("latency.mu_llm", "must be >= 0");
      auto_llm = false;
    } else {
      fail("latency.mu_llm", "must be a number or 'auto'");
    }
  }
  if (auto_llm) {
    // Calibrate so the all-upload run at average-case fading (h = 1) hits the
    // target throughput: mu_llm = 1/target - mu_slm - mu_uplink(h=1).
    const double mu_up = uplink_time(cfg.run.channel, 1.0);
    const double mu_llm = 1.0 / target - cfg.run.latency.mu_slm - mu_up;
    if (!(mu_llm >= 0.0)) {
      fail("latency.mu_llm", "auto calibration infeasible: uplink at h=1 takes " + std::to_string(mu_up) +
                                 " s, leaving no budget under target throughput " + std::to_string(target) +
                                 "; set mu_llm explicitly");
    }
    cfg.run.latency.mu_llm = mu_llm;
  }

  const json& en = section(root, "energy");
  reject_unknown(en, "energy", {"eps_u", "eps_r", "eps_s", "payload_factor", "slm_count_mode"});
  cfg.run.energy.eps_u = get_num<double>(en, "energy", "eps_u", 300.0);
  cfg.run.energy.eps_r = get_num<double>(en, "energy", "eps_r", 350.0);
  cfg.run.energy.eps_s = get_num<double>(en, "energy", "eps_s", 100.0);
  const std::string pf = get_str(en, "energy", "payload_factor", "normalized_mbits");
  if (pf == "normalized_mbits") {
    cfg.run.energy.payload_factor = PayloadFactor::normalized_mbits;
  } else if (pf == "literal_bits") {
    cfg.run.energy.payload_factor = PayloadFactor::literal_bits;
  } else {
    fail("energy.payload_factor", "must be 'normalized_mbits' or 'literal_bits'");
  }
  const std::string mode = get_str(en, "energy", "slm_count_mode", "all");
  if (mode == "all") {
    cfg.run.energy.slm_count_mode = SlmCountMode::all;
  } else if (mode == "local_only") {
    cfg.run.energy.slm_count_mode = SlmCountMode::local_only;
  } else {
    fail("energy.slm_count_mode", "must be 'all' or 'local_only'");
  }
  try {
    cfg.run.energy.validate();
  } catch (const ValidationError& e) {
    fail("energy", e.what());
  }

  try {
    RunConfig check = cfg.run;
    check.method = Method::u_plus_i;
    check.validate();
  } catch (const ValidationError& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return cfg;
}

inline SimConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot read file '" + path + "'");
  nlohmann::json root;
  try {
    root = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("config: '" + path + "' is not valid JSON: " + e.what());
  }
  return parse_config(root);
}

/// Applies a seed override (CLI flag or environment) before prompts and the
/// backend are built. A backend seed given explicitly in the file wins.
inline void apply_seed_override(SimConfig& cfg, std::uint64_t seed) {
  cfg.run.master_seed = seed;
  cfg.backend.seed = cfg.backend_seed_explicit.value_or(seed);
}

inline std::vector<std::vector<TokenId>> make_prompts(const SimConfig& cfg) {
  if (!cfg.explicit_prompts.empty()) return cfg.explicit_prompts;
  return synth_prompts(cfg.n_prompts, cfg.prompt_len, cfg.run.vocab, cfg.run.master_seed);
}

}  // namespace hlmsim

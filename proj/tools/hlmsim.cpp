// SPDX-License-Identifier: Apache-2.0
//
// Sweep driver for the hybrid-decoding simulator. `hlmsim run` loads a JSON
// config, runs every requested method cell, and writes a results CSV plus
// optional JSONL step traces and plot data.

#include <cstdint>
#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "hlmsim/hlmsim.hpp"

namespace {

std::vector<std::uint32_t> parse_k_list(const std::string& text) {
  std::vector<std::uint32_t> out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t comma = std::min(text.find(',', pos), text.size());
    const std::string item = text.substr(pos, comma - pos);
    try {
      std::size_t used = 0;
      const unsigned long v = std::stoul(item, &used);
      if (used != item.size() || v < 1) throw std::invalid_argument(item);
      out.push_back(static_cast<std::uint32_t>(v));
    } catch (const std::exception&) {
      throw hlmsim::ConfigError("--sweep-k: malformed entry '" + item + "'");
    }
    pos = comma + 1;
  }
  return out;
}

std::vector<double> parse_gamma_list(const std::string& text) {
  std::vector<double> out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t comma = std::min(text.find(',', pos), text.size());
    const std::string item = text.substr(pos, comma - pos);
    try {
      std::size_t used = 0;
      const double v = std::stod(item, &used);
      if (used != item.size() || !(v >= 0.0)) throw std::invalid_argument(item);
      out.push_back(v);
    } catch (const std::exception&) {
      throw hlmsim::ConfigError("--sweep-gamma: malformed entry '" + item + "'");
    }
    pos = comma + 1;
  }
  return out;
}

std::vector<hlmsim::Method> parse_method_list(const std::string& text) {
  std::vector<hlmsim::Method> out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t comma = std::min(text.find(',', pos), text.size());
    out.push_back(hlmsim::parse_method(text.substr(pos, comma - pos)));
    pos = comma + 1;
  }
  return out;
}

int run_command(const std::string& config_path, const std::string& out_path, const std::string& trace_path,
                std::optional<std::uint64_t> seed_flag, const std::string& sweep_k, const std::string& sweep_gamma,
                const std::string& methods, const std::string& plot_path) {
  hlmsim::SimConfig cfg = hlmsim::load_config(config_path);

  std::optional<std::uint64_t> seed = seed_flag;
  if (!seed) {
    if (const char* env = std::getenv("HLMSIM_SEED")) {
      try {
        seed = std::stoull(env);
      } catch (const std::exception&) {
        throw hlmsim::ConfigError("HLMSIM_SEED: malformed seed '" + std::string(env) + "'");
      }
    }
  }
  if (seed) hlmsim::apply_seed_override(cfg, *seed);
  if (!sweep_k.empty()) cfg.sweep.k_values = parse_k_list(sweep_k);
  if (!sweep_gamma.empty()) cfg.sweep.gamma_values = parse_gamma_list(sweep_gamma);
  if (!methods.empty()) cfg.sweep.methods = parse_method_list(methods);

  const hlmsim::SyntheticPairBackend backend(cfg.backend);
  const auto prompts = hlmsim::make_prompts(cfg);
  const hlmsim::ExperimentResult result = hlmsim::run_experiment(cfg.run, backend, prompts, cfg.sweep);

  hlmsim::write_text_file(out_path, hlmsim::render_csv(result.summaries()));
  std::cout << "wrote " << result.cells.size() << " rows to " << out_path << "\n";
  if (!trace_path.empty()) {
    hlmsim::write_text_file(trace_path, hlmsim::render_trace_jsonl(result));
    std::cout << "wrote trace to " << trace_path << "\n";
  }
  if (!plot_path.empty()) {
    hlmsim::write_text_file(plot_path, hlmsim::render_plot_data(result.summaries()));
    std::cout << "wrote plot data to " << plot_path << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"hybrid SLM/LLM speculative decoding simulator"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "run a config-driven sweep and emit a results CSV");
  std::string config_path;
  std::string out_path = "results.csv";
  std::string trace_path;
  std::string sweep_k;
  std::string sweep_gamma;
  std::string methods;
  std::string plot_path;
  std::optional<std::uint64_t> seed;
  run->add_option("--config", config_path, "JSON run configuration")->required();
  run->add_option("--out", out_path, "results CSV path (default results.csv)");
  run->add_option("--trace", trace_path, "per-step JSONL trace path");
  run->add_option("--seed", seed, "master seed override (falls back to HLMSIM_SEED, then the config)");
  run->add_option("--sweep-k", sweep_k, "comma list of top-k values");
  run->add_option("--sweep-gamma", sweep_gamma, "comma list of gamma values");
  run->add_option("--methods", methods, "comma list of methods to run");
  run->add_option("--plot-data", plot_path, "tidy long-format CSV for plotting");

  CLI11_PARSE(app, argc, argv);

  try {
    return run_command(config_path, out_path, trace_path, seed, sweep_k, sweep_gamma, methods, plot_path);
  } catch (const hlmsim::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "hlmsim/error.hpp"
#include "hlmsim/harness.hpp"
#include "hlmsim/metrics.hpp"

namespace hlmsim {

inline constexpr const char* kCsvHeader =
    "method,k,gamma,upload_rate_pct,reject_rate_pct,energy_saving_pct,"
    "throughput_tok_per_sec,fidelity_pct,tokens_total,seed";

inline std::string fmt2(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

inline std::string csv_row(const RunSummary& s) {
  std::string row = method_name(s.method);
  row += ',';
  if (s.k) row += std::to_string(*s.k);
  row += ',';
  if (s.gamma) row += fmt2(*s.gamma);
  row += ',';
  row += fmt2(100.0 * s.upload_rate) + ',';
  row += fmt2(100.0 * s.reject_rate) + ',';
  row += fmt2(100.0 * s.energy_saving) + ',';
  row += fmt2(s.mean_throughput) + ',';
  row += fmt2(100.0 * s.fidelity) + ',';
  row += std::to_string(s.tokens_total) + ',';
  row += std::to_string(s.seed);
  return row;
}

inline std::string render_csv(const std::vector<RunSummary>& summaries) {
  std::string out = kCsvHeader;
  out += '\n';
  for (const auto& s : summaries) {
    out += csv_row(s);
    out += '\n';
  }
  return out;
}

/// Long-format table for external plotting tools: one (cell, metric) pair
/// per row.
inline std::string render_plot_data(const std::vector<RunSummary>& summaries) {
  std::string out = "method,k,gamma,metric,value\n";
  for (const auto& s : summaries) {
    const std::string prefix = std::string(method_name(s.method)) + ',' + (s.k ? std::to_string(*s.k) : "") + ',' +
                               (s.gamma ? fmt2(*s.gamma) : "") + ',';
    const std::pair<const char*, double> metrics[] = {
        {"upload_rate_pct", 100.0 * s.upload_rate},   {"reject_rate_pct", 100.0 * s.reject_rate},
        {"energy_saving_pct", 100.0 * s.energy_saving}, {"throughput_tok_per_sec", s.mean_throughput},
        {"fidelity_pct", 100.0 * s.fidelity},
    };
    for (const auto& [name, value] : metrics) {
      out += prefix;
      out += name;
      out += ',';
      out += fmt2(value);
      out += '\n';
    }
  }
  return out;
}

namespace repdetail {

inline nlohmann::ordered_json num_or_null(double v) {
  if (!std::isfinite(v)) return nullptr;
  return v;
}

}  // namespace repdetail

/// One self-contained JSON object per decode step.
inline nlohmann::ordered_json step_record_json(const CellResult& cell, std::size_t prompt_index,
                                               const DecodeStepRecord& rec) {
  nlohmann::ordered_json j;
  j["method"] = method_name(cell.method);
  j["k"] = cell.k ? nlohmann::ordered_json(*cell.k) : nlohmann::ordered_json(nullptr);
  j["gamma"] = cell.gamma ? nlohmann::ordered_json(*cell.gamma) : nlohmann::ordered_json(nullptr);
  j["prompt"] = prompt_index;
  j["step"] = rec.step_index;
  j["draft"] = rec.draft_token;
  j["u"] = rec.u_value;
  j["gate"] = {{"delta", rec.gate.delta ? 1 : 0},
               {"importance_pass", rec.gate.importance_pass},
               {"theta_imp", repdetail::num_or_null(rec.gate.theta_imp)},
               {"topk_value", repdetail::num_or_null(rec.gate.topk_value)}};
  j["delta"] = rec.delta ? 1 : 0;
  if (rec.verify) {
    nlohmann::ordered_json v;
    v["decision"] = rec.verify->decision == VerifyDecision::accepted ? "accepted" : "rejected";
    v["emitted"] = rec.verify->emitted_token;
    v["accept_draw"] =
        rec.verify->acceptance_draw ? nlohmann::ordered_json(*rec.verify->acceptance_draw) : nlohmann::ordered_json(nullptr);
    j["verify"] = v;
  } else {
    j["verify"] = nullptr;
  }
  j["emitted"] = rec.emitted_token;
  j["uplink_s"] = repdetail::num_or_null(rec.uplink_time_s);
  j["step_s"] = repdetail::num_or_null(rec.step_time_s);
  j["payload_bits"] = rec.payload_bits;
  return j;
}

inline std::string render_trace_jsonl(const ExperimentResult& result) {
  std::string out;
  for (const auto& cell : result.cells) {
    for (std::size_t p = 0; p < cell.prompts.size(); ++p) {
      for (const auto& rec : cell.prompts[p].steps) {
        out += step_record_json(cell, p, rec).dump();
        out += '\n';
      }
    }
  }
  return out;
}

inline void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  out << content;
  if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

}  // namespace hlmsim

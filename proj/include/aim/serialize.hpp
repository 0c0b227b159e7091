// Copyright (C) 2026 The aim Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// JSON and CSV conversions for configs, profiles and reports.

#include <cstdint>
#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

#include "aim/costmodel.hpp"
#include "aim/planner.hpp"
#include "aim/simengine.hpp"
#include "json.hpp"

namespace aim {

using Json = nlohmann::ordered_json;

const char* tool_version();

// AIM_PROFILE_DIR if set, else the directory baked in at build time.
std::filesystem::path profile_search_dir();

// `ref` is a path to a JSON file, or a bare name looked up as
// <profile dir>/<name>.json.
std::filesystem::path resolve_profile(const std::string& ref);

ModelProfile model_profile_from_json(const Json& j);
HardwareProfile hardware_profile_from_json(const Json& j);
ModelProfile load_model_profile(const std::string& ref);
HardwareProfile load_hardware_profile(const std::string& ref);
Json to_json(const ModelProfile& p);
Json to_json(const HardwareProfile& p);

Json read_json_file(const std::filesystem::path& path);

const char* to_string(SimilarityScope s);
const char* to_string(PruneTiming t);
SimilarityScope similarity_scope_from_string(const std::string& s);
PruneTiming prune_timing_from_string(const std::string& s);

// Everything a CLI invocation needs. Unknown keys in the JSON form are
// rejected so that typos do not silently fall back to defaults.
struct RunConfig {
  std::size_t frames = 32;
  std::size_t tokens_per_frame = 196;
  std::size_t dim = 32;
  std::size_t text_tokens = 100;
  // Similarity width for the cost model; 0 means the decoder width.
  std::size_t feature_dim = 0;
  double redundancy = 0.5;

  MergeConfig merge{0.25, MergeMode::spatial};
  // l1 == 0 disables pruning.
  std::size_t l1 = 14;
  std::size_t l2 = 22;
  PruneOptions prune;

  std::string model_profile = "qwen2-7b";
  std::string hardware_profile = "a100";
  // Width of the toy decoder used by `simulate`; depth follows the model
  // profile unless toy_layers is non-zero.
  std::size_t toy_hidden = 32;
  std::size_t toy_heads = 4;
  std::size_t toy_intermediate = 64;
  std::size_t toy_layers = 0;

  CostOptions cost;
  std::uint64_t seed = 0;
  std::string token_input;
  std::string out_dir = ".";

  VisualGeometry geometry() const { return {frames, tokens_per_frame, text_tokens, feature_dim}; }
  // Schedule over `layers`, with base count left at 0.
  PruneSchedule schedule(std::size_t layers) const;
  void validate() const;
};

RunConfig run_config_from_json(const Json& j, RunConfig base = {});
Json to_json(const RunConfig& c);

// Grid file: geometry, merge mode, and either an explicit "candidates" list
// or a "cross_product" of ratios, l1 and l2 values. l1 = 0 in a candidate
// means pruning disabled and maps to layers + 1.
CandidateGrid grid_from_json(const Json& j, std::size_t layers);
CandidateGrid load_grid(const std::string& path, std::size_t layers);
Json to_json(const CandidateGrid& g);

Json to_json(const Candidate& c);
Json to_json(const CostReport& r, bool per_layer = true);
Json to_json(const Plan& p);
Json to_json(const MergeTrace& t);
Json to_json(const PrefillResult& r);

// FNV-1a over the IEEE-754 bits of every entry, as 16 hex digits.
std::string digest(const Matrix& m);

// Columns: config_id, ratio, l1, l2, frames, flops_tb, merge_overhead_gf,
// prune_overhead_gf, prefill_ms. Reals use 6 significant digits. Lines
// starting with '#' before the header carry the tool version and config.
void write_sweep_csv(std::ostream& out, const CandidateGrid& grid, const std::vector<CostReport>& reports,
                     const Json& echo);

}  // namespace aim

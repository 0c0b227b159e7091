// Copyright (C) 2026 The aim Authors
// SPDX-License-Identifier: Apache-2.0

#include "aim/serialize.hpp"

#include <algorithm>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "aim/error.hpp"

#ifndef AIM_VERSION
#define AIM_VERSION "0.0.0"
#endif
#ifndef AIM_DEFAULT_PROFILE_DIR
#define AIM_DEFAULT_PROFILE_DIR "profiles"
#endif

namespace aim {

namespace fs = std::filesystem;

const char* tool_version() { return AIM_VERSION; }

fs::path profile_search_dir() {
  if (const char* env = std::getenv("AIM_PROFILE_DIR"); env != nullptr && *env != '\0') return fs::path(env);
  return fs::path(AIM_DEFAULT_PROFILE_DIR);
}

fs::path resolve_profile(const std::string& ref) {
  if (ref.empty()) throw InvalidArgument("empty profile reference");
  const fs::path direct(ref);
  if (ref.find('/') != std::string::npos || direct.extension() == ".json") {
    if (!fs::exists(direct)) throw FormatError("profile file '" + ref + "' does not exist");
    return direct;
  }
  const fs::path found = profile_search_dir() / (ref + ".json");
  if (!fs::exists(found)) {
    throw FormatError("profile '" + ref + "' not found (looked for " + found.string() + ")");
  }
  return found;
}

Json read_json_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open '" + path.string() + "'");
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw FormatError("'" + path.string() + "' is not valid JSON: " + e.what());
  }
}

namespace {

void reject_unknown_keys(const Json& j, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!j.is_object()) throw FormatError(where + ": expected a JSON object");
  for (const auto& [key, value] : j.items()) {
    const bool known = std::any_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; });
    if (!known) throw FormatError(where + ": unknown key '" + key + "'");
  }
}

template <typename T>
void read_field(const Json& j, const char* key, T& out, const std::string& where) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const Json::exception& e) {
    throw FormatError(where + "." + key + ": " + e.what());
  }
}

template <typename T>
T required_field(const Json& j, const char* key, const std::string& where) {
  if (!j.contains(key)) throw FormatError(where + ": missing key '" + key + "'");
  T out{};
  read_field(j, key, out, where);
  return out;
}

}  // namespace

ModelProfile model_profile_from_json(const Json& j) {
  const std::string w = "model profile";
  reject_unknown_keys(j,
                      {"name", "layers", "hidden", "heads", "kv_heads", "head_dim", "intermediate", "mlp_matrices",
                       "exclude_vocab_projection", "bytes_per_weight", "source"},
                      w);
  ModelProfile p;
  p.name = required_field<std::string>(j, "name", w);
  p.layers = required_field<std::size_t>(j, "layers", w);
  p.hidden = required_field<std::size_t>(j, "hidden", w);
  p.heads = required_field<std::size_t>(j, "heads", w);
  p.kv_heads = p.heads;
  read_field(j, "kv_heads", p.kv_heads, w);
  p.head_dim = p.hidden / std::max<std::size_t>(p.heads, 1);
  read_field(j, "head_dim", p.head_dim, w);
  p.intermediate = required_field<std::size_t>(j, "intermediate", w);
  read_field(j, "mlp_matrices", p.mlp_matrices, w);
  read_field(j, "exclude_vocab_projection", p.exclude_vocab_projection, w);
  read_field(j, "bytes_per_weight", p.bytes_per_weight, w);
  read_field(j, "source", p.source, w);
  p.validate();
  return p;
}

HardwareProfile hardware_profile_from_json(const Json& j) {
  const std::string w = "hardware profile";
  reject_unknown_keys(j, {"name", "peak_flops", "memory_bandwidth", "source"}, w);
  HardwareProfile h;
  h.name = required_field<std::string>(j, "name", w);
  h.peak_flops = required_field<double>(j, "peak_flops", w);
  h.memory_bandwidth = required_field<double>(j, "memory_bandwidth", w);
  h.validate();
  return h;
}

ModelProfile load_model_profile(const std::string& ref) { return model_profile_from_json(read_json_file(resolve_profile(ref))); }

HardwareProfile load_hardware_profile(const std::string& ref) {
  return hardware_profile_from_json(read_json_file(resolve_profile(ref)));
}

Json to_json(const ModelProfile& p) {
  return Json{{"name", p.name},
              {"layers", p.layers},
              {"hidden", p.hidden},
              {"heads", p.heads},
              {"kv_heads", p.kv_heads},
              {"head_dim", p.head_dim},
              {"intermediate", p.intermediate},
              {"mlp_matrices", p.mlp_matrices},
              {"exclude_vocab_projection", p.exclude_vocab_projection},
              {"bytes_per_weight", p.bytes_per_weight},
              {"source", p.source}};
}

Json to_json(const HardwareProfile& p) {
  return Json{{"name", p.name}, {"peak_flops", p.peak_flops}, {"memory_bandwidth", p.memory_bandwidth}};
}

const char* to_string(SimilarityScope s) { return s == SimilarityScope::dense_sequence ? "dense_sequence" : "per_scope"; }

const char* to_string(PruneTiming t) { return t == PruneTiming::before_layer ? "before_layer" : "after_layer"; }

SimilarityScope similarity_scope_from_string(const std::string& s) {
  if (s == "dense_sequence") return SimilarityScope::dense_sequence;
  if (s == "per_scope") return SimilarityScope::per_scope;
  throw InvalidArgument("similarity scope must be dense_sequence or per_scope, got '" + s + "'");
}

PruneTiming prune_timing_from_string(const std::string& s) {
  if (s == "before_layer") return PruneTiming::before_layer;
  if (s == "after_layer") return PruneTiming::after_layer;
  throw InvalidArgument("prune timing must be before_layer or after_layer, got '" + s + "'");
}

PruneSchedule RunConfig::schedule(std::size_t layers) const {
  if (l1 == 0) return PruneSchedule::disabled(layers, 0);
  return PruneSchedule{l1, l2, layers, 0};
}

void RunConfig::validate() const {
  if (frames < 1 || tokens_per_frame < 1 || dim < 1 || text_tokens < 1) {
    throw InvalidArgument("config: frames, tokens_per_frame, dim and text_tokens must be >= 1");
  }
  if (!(redundancy >= 0.0 && redundancy <= 1.0)) throw InvalidArgument("config: redundancy must be in [0, 1]");
  merge.validate();
  if (l1 != 0 && l2 < l1) {
    throw InvalidArgument("config: l2 (" + std::to_string(l2) + ") must be >= l1 (" + std::to_string(l1) + ")");
  }
  if (prune.scoring.iterations < 1) throw InvalidArgument("config: prune iterations must be >= 1");
  if (toy_hidden < 1 || toy_heads < 1 || toy_hidden % toy_heads != 0) {
    throw InvalidArgument("config: toy hidden width must be a positive multiple of toy heads");
  }
}

RunConfig run_config_from_json(const Json& j, RunConfig c) {
  reject_unknown_keys(j,
                      {"geometry", "merge", "schedule", "prune", "model_profile", "hardware_profile", "toy_model",
                       "cost", "seed", "tokens", "outputs", "tool", "version"},
                      "config");
  if (j.contains("geometry")) {
    const Json& g = j["geometry"];
    reject_unknown_keys(g, {"frames", "tokens_per_frame", "dim", "text_tokens", "feature_dim"}, "config.geometry");
    read_field(g, "frames", c.frames, "geometry");
    read_field(g, "tokens_per_frame", c.tokens_per_frame, "geometry");
    read_field(g, "dim", c.dim, "geometry");
    read_field(g, "text_tokens", c.text_tokens, "geometry");
    read_field(g, "feature_dim", c.feature_dim, "geometry");
  }
  if (j.contains("merge")) {
    const Json& m = j["merge"];
    reject_unknown_keys(m, {"ratio", "mode"}, "config.merge");
    read_field(m, "ratio", c.merge.retention_ratio, "merge");
    if (m.contains("mode")) c.merge.mode = merge_mode_from_string(m["mode"].get<std::string>());
  }
  if (j.contains("schedule")) {
    const Json& s = j["schedule"];
    reject_unknown_keys(s, {"l1", "l2"}, "config.schedule");
    read_field(s, "l1", c.l1, "schedule");
    read_field(s, "l2", c.l2, "schedule");
  }
  if (j.contains("prune")) {
    const Json& p = j["prune"];
    reject_unknown_keys(p, {"direction", "iterations", "until_converged", "tolerance", "prune_text", "causal_debias"},
                        "config.prune");
    if (p.contains("direction")) c.prune.scoring.direction = score_direction_from_string(p["direction"].get<std::string>());
    read_field(p, "iterations", c.prune.scoring.iterations, "prune");
    read_field(p, "until_converged", c.prune.scoring.until_converged, "prune");
    read_field(p, "tolerance", c.prune.scoring.tolerance, "prune");
    read_field(p, "prune_text", c.prune.prune_text, "prune");
    read_field(p, "causal_debias", c.prune.scoring.causal_debias, "prune");
  }
  read_field(j, "model_profile", c.model_profile, "config");
  read_field(j, "hardware_profile", c.hardware_profile, "config");
  if (j.contains("toy_model")) {
    const Json& t = j["toy_model"];
    reject_unknown_keys(t, {"hidden", "heads", "intermediate", "layers"}, "config.toy_model");
    read_field(t, "hidden", c.toy_hidden, "toy_model");
    read_field(t, "heads", c.toy_heads, "toy_model");
    read_field(t, "intermediate", c.toy_intermediate, "toy_model");
    read_field(t, "layers", c.toy_layers, "toy_model");
  }
  if (j.contains("cost")) {
    const Json& k = j["cost"];
    reject_unknown_keys(k, {"similarity_scope", "timing", "scoring_iterations", "count_elementwise"}, "config.cost");
    if (k.contains("similarity_scope")) {
      c.cost.similarity_scope = similarity_scope_from_string(k["similarity_scope"].get<std::string>());
    }
    if (k.contains("timing")) c.cost.timing = prune_timing_from_string(k["timing"].get<std::string>());
    read_field(k, "scoring_iterations", c.cost.scoring_iterations, "cost");
    read_field(k, "count_elementwise", c.cost.count_elementwise, "cost");
  }
  read_field(j, "seed", c.seed, "config");
  if (j.contains("tokens")) {
    const Json& t = j["tokens"];
    reject_unknown_keys(t, {"input", "redundancy"}, "config.tokens");
    read_field(t, "input", c.token_input, "tokens");
    read_field(t, "redundancy", c.redundancy, "tokens");
  }
  if (j.contains("outputs")) {
    const Json& o = j["outputs"];
    reject_unknown_keys(o, {"dir"}, "config.outputs");
    read_field(o, "dir", c.out_dir, "outputs");
  }
  c.validate();
  return c;
}

Json to_json(const RunConfig& c) {
  return Json{
      {"geometry",
       {{"frames", c.frames},
        {"tokens_per_frame", c.tokens_per_frame},
        {"dim", c.dim},
        {"text_tokens", c.text_tokens},
        {"feature_dim", c.feature_dim}}},
      {"merge", {{"ratio", c.merge.retention_ratio}, {"mode", to_string(c.merge.mode)}}},
      {"schedule", {{"l1", c.l1}, {"l2", c.l2}}},
      {"prune",
       {{"direction", to_string(c.prune.scoring.direction)},
        {"iterations", c.prune.scoring.iterations},
        {"until_converged", c.prune.scoring.until_converged},
        {"tolerance", c.prune.scoring.tolerance},
        {"prune_text", c.prune.prune_text},
        {"causal_debias", c.prune.scoring.causal_debias}}},
      {"model_profile", c.model_profile},
      {"hardware_profile", c.hardware_profile},
      {"toy_model",
       {{"hidden", c.toy_hidden}, {"heads", c.toy_heads}, {"intermediate", c.toy_intermediate}, {"layers", c.toy_layers}}},
      {"cost",
       {{"similarity_scope", to_string(c.cost.similarity_scope)},
        {"timing", to_string(c.cost.timing)},
        {"scoring_iterations", c.cost.scoring_iterations},
        {"count_elementwise", c.cost.count_elementwise}}},
      {"seed", c.seed},
      {"tokens", {{"input", c.token_input}, {"redundancy", c.redundancy}}},
      {"outputs", {{"dir", c.out_dir}}},
  };
}

namespace {

VisualGeometry geometry_from_json(const Json& g, const std::string& where) {
  reject_unknown_keys(g, {"frames", "tokens_per_frame", "text_tokens", "feature_dim"}, where);
  VisualGeometry out;
  read_field(g, "frames", out.frames, where);
  read_field(g, "tokens_per_frame", out.tokens_per_frame, where);
  read_field(g, "text_tokens", out.text_tokens, where);
  read_field(g, "feature_dim", out.feature_dim, where);
  out.validate();
  return out;
}

Json geometry_to_json(const VisualGeometry& g) {
  return Json{{"frames", g.frames},
              {"tokens_per_frame", g.tokens_per_frame},
              {"text_tokens", g.text_tokens},
              {"feature_dim", g.feature_dim}};
}

Candidate candidate_from_json(const Json& c, std::size_t layers) {
  reject_unknown_keys(c, {"ratio", "l1", "l2"}, "grid candidate");
  Candidate out;
  out.ratio = required_field<double>(c, "ratio", "grid candidate");
  read_field(c, "l1", out.l1, "grid candidate");
  read_field(c, "l2", out.l2, "grid candidate");
  if (out.l1 == 0) out.l1 = out.l2 = layers + 1;
  return out;
}

}  // namespace

CandidateGrid grid_from_json(const Json& j, std::size_t layers) {
  reject_unknown_keys(j, {"name", "description", "model_profile", "geometry", "mode", "candidates", "cross_product"},
                      "grid");
  CandidateGrid grid;
  if (j.contains("geometry")) grid.geometry = geometry_from_json(j["geometry"], "grid.geometry");
  if (j.contains("mode")) grid.mode = merge_mode_from_string(j["mode"].get<std::string>());
  if (j.contains("candidates") == j.contains("cross_product")) {
    throw FormatError("grid: exactly one of 'candidates' or 'cross_product' is required");
  }
  if (j.contains("candidates")) {
    for (const Json& c : j["candidates"]) grid.candidates.push_back(candidate_from_json(c, layers));
  } else {
    const Json& x = j["cross_product"];
    reject_unknown_keys(x, {"ratios", "l1", "l2"}, "grid.cross_product");
    std::vector<double> ratios = default_ratios();
    read_field(x, "ratios", ratios, "grid.cross_product");
    const auto l1s = required_field<std::vector<std::size_t>>(x, "l1", "grid.cross_product");
    const auto l2s = required_field<std::vector<std::size_t>>(x, "l2", "grid.cross_product");
    CandidateGrid expanded = CandidateGrid::cross_product(ratios, l1s, l2s, grid.geometry);
    grid.candidates = std::move(expanded.candidates);
  }
  grid.validate(layers);
  return grid;
}

CandidateGrid load_grid(const std::string& path, std::size_t layers) {
  if (!fs::exists(path)) throw FormatError("grid file '" + path + "' does not exist");
  return grid_from_json(read_json_file(path), layers);
}

Json to_json(const CandidateGrid& g) {
  Json cands = Json::array();
  for (const Candidate& c : g.candidates) cands.push_back(to_json(c));
  return Json{{"geometry", geometry_to_json(g.geometry)}, {"mode", to_string(g.mode)}, {"candidates", cands}};
}

Json to_json(const Candidate& c) { return Json{{"ratio", c.ratio}, {"l1", c.l1}, {"l2", c.l2}}; }

Json to_json(const CostReport& r, bool per_layer) {
  Json j{{"llm_flops", r.llm_flops},
         {"merge_overhead_flops", r.merge_overhead},
         {"prune_overhead_flops", r.prune_overhead},
         {"total_flops", r.total_flops},
         {"flops_tb", static_cast<double>(r.llm_flops) / 1e12},
         {"prefill_ms", r.prefill_ms}};
  if (per_layer) {
    Json layers = Json::array();
    for (std::size_t l = 0; l < r.per_layer.size(); ++l) {
      const LayerFlops& f = r.per_layer[l];
      layers.push_back(Json{{"layer", l + 1},
                            {"tokens", r.tokens_per_layer[l]},
                            {"visual_tokens", r.visual_per_layer[l]},
                            {"qkv", f.qkv},
                            {"attn_scores", f.attn_scores},
                            {"attn_apply", f.attn_apply},
                            {"out_proj", f.out_proj},
                            {"mlp", f.mlp},
                            {"elementwise", f.elementwise},
                            {"total", f.total()}});
    }
    j["per_layer"] = std::move(layers);
  }
  return j;
}

Json to_json(const Plan& p) {
  Json ranked = Json::array();
  for (const RankedCandidate& rc : p.ranked) {
    ranked.push_back(Json{{"config", to_json(rc.candidate)},
                          {"grid_index", rc.grid_index},
                          {"cost", to_json(rc.report, false)}});
  }
  return Json{{"budget",
               {{"kind", p.budget.kind == Budget::Kind::flops ? "flops" : "prefill_ms"}, {"value", p.budget.value}}},
              {"ordering", p.used_quality_table ? "quality_table" : "default"},
              {"chosen", {{"config", to_json(p.chosen.candidate)}, {"grid_index", p.chosen.grid_index},
                          {"cost", to_json(p.chosen.report, true)}}},
              {"ranked_feasible", ranked}};
}

Json to_json(const MergeTrace& t) {
  Json events = Json::array();
  for (const MergeEvent& e : t.events) {
    events.push_back(Json{{"step", e.step}, {"destination", e.destination}, {"absorbed", e.absorbed}, {"result", e.result}});
  }
  Json groups = Json::array();
  for (const MergeGroup& g : t.groups) {
    groups.push_back(Json{{"output_id", g.output_id}, {"members", g.members}, {"weights", g.weights}});
  }
  return Json{{"events", events}, {"groups", groups}};
}

std::string digest(const Matrix& m) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&h](std::uint64_t v) {
    for (int b = 0; b < 8; ++b) {
      h ^= (v >> (8 * b)) & 0xffU;
      h *= 0x100000001b3ULL;
    }
  };
  mix(m.rows());
  mix(m.cols());
  for (double x : m.values()) {
    std::uint64_t bits;
    std::memcpy(&bits, &x, sizeof bits);
    mix(bits);
  }
  std::ostringstream s;
  s << std::hex << std::setw(16) << std::setfill('0') << h;
  return s.str();
}

Json to_json(const PrefillResult& r) {
  Json layers = Json::array();
  for (const LayerRecord& l : r.layers) {
    layers.push_back(Json{{"layer", l.layer},
                          {"visual_count", l.visual_count},
                          {"text_count", l.text_count},
                          {"visual_ids", l.visual_ids},
                          {"text_ids", l.text_ids}});
  }
  return Json{{"input_visual_count", r.input_visual_count},
              {"merged_visual_count", r.merged_visual_count},
              {"visual_counts", r.visual_counts()},
              {"text_counts", r.text_counts()},
              {"schedule", {{"l1", r.schedule.l1}, {"l2", r.schedule.l2}, {"layers", r.schedule.layers},
                            {"base_visual_count", r.schedule.base_visual_count}}},
              {"layers", layers},
              {"final_hidden", {{"rows", r.final_hidden.rows()}, {"cols", r.final_hidden.cols()},
                                {"digest", digest(r.final_hidden)}}},
              {"merge_trace", to_json(r.merge_trace)}};
}

void write_sweep_csv(std::ostream& out, const CandidateGrid& grid, const std::vector<CostReport>& reports,
                     const Json& echo) {
  if (reports.size() != grid.candidates.size()) {
    throw ShapeError("write_sweep_csv: " + std::to_string(reports.size()) + " reports for " +
                     std::to_string(grid.candidates.size()) + " candidates");
  }
  out << "# aim " << tool_version() << '\n';
  out << "# config " << echo.dump() << '\n';
  out << "config_id,ratio,l1,l2,frames,flops_tb,merge_overhead_gf,prune_overhead_gf,prefill_ms\n";
  std::ostringstream row;
  row << std::setprecision(6);
  for (std::size_t i = 0; i < reports.size(); ++i) {
    const Candidate& c = grid.candidates[i];
    const CostReport& r = reports[i];
    row.str("");
    row << i << ',' << c.ratio << ',' << c.l1 << ',' << c.l2 << ',' << grid.geometry.frames << ','
        << static_cast<double>(r.llm_flops) / 1e12 << ',' << static_cast<double>(r.merge_overhead) / 1e9 << ','
        << static_cast<double>(r.prune_overhead) / 1e9 << ',' << r.prefill_ms << '\n';
    out << row.str();
  }
}

}  // namespace aim

// Copyright (C) 2026 The aim Authors
// SPDX-License-Identifier: Apache-2.0

#include "aim/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "aim/error.hpp"
#include "aim/serialize.hpp"
#include "aim/token_file.hpp"

namespace aim {

namespace {

namespace fs = std::filesystem;

// Flag values; unset options leave the config file's (or default) value alone.
struct Overrides {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;

  std::optional<std::size_t> frames, tokens_per_frame, dim, text_tokens, feature_dim;
  std::optional<double> redundancy, ratio;
  std::optional<std::string> mode;
  std::optional<std::size_t> l1, l2, iterations;
  std::optional<std::string> direction;
  bool prune_text = false, causal_debias = false;
  std::optional<std::string> model, hardware, tokens;
  std::optional<std::string> scope, timing;
  bool count_elementwise = false;

  std::string input, output, trace, grid, quality;
  std::optional<double> budget_tflops, budget_ms;
};

RunConfig build_config(const Overrides& o) {
  RunConfig c;
  if (!o.config_path.empty()) {
    if (!fs::exists(o.config_path)) throw FormatError("config file '" + o.config_path + "' does not exist");
    c = run_config_from_json(read_json_file(o.config_path), c);
  }
  if (o.seed) c.seed = *o.seed;
  if (o.out_dir) c.out_dir = *o.out_dir;
  if (o.frames) c.frames = *o.frames;
  if (o.tokens_per_frame) c.tokens_per_frame = *o.tokens_per_frame;
  if (o.dim) c.dim = *o.dim;
  if (o.text_tokens) c.text_tokens = *o.text_tokens;
  if (o.feature_dim) c.feature_dim = *o.feature_dim;
  if (o.redundancy) c.redundancy = *o.redundancy;
  if (o.ratio) c.merge.retention_ratio = *o.ratio;
  if (o.mode) c.merge.mode = merge_mode_from_string(*o.mode);
  if (o.l1) c.l1 = *o.l1;
  if (o.l2) c.l2 = *o.l2;
  if (o.l1 && *o.l1 != 0 && !o.l2) c.l2 = std::max(c.l2, *o.l1);
  if (o.iterations) c.prune.scoring.iterations = *o.iterations;
  if (o.direction) c.prune.scoring.direction = score_direction_from_string(*o.direction);
  if (o.prune_text) c.prune.prune_text = true;
  if (o.causal_debias) c.prune.scoring.causal_debias = true;
  if (o.model) c.model_profile = *o.model;
  if (o.hardware) c.hardware_profile = *o.hardware;
  if (o.tokens) c.token_input = *o.tokens;
  if (o.scope) c.cost.similarity_scope = similarity_scope_from_string(*o.scope);
  if (o.timing) c.cost.timing = prune_timing_from_string(*o.timing);
  if (o.count_elementwise) c.cost.count_elementwise = true;
  c.validate();
  return c;
}

Json envelope(const char* command, const RunConfig& c) {
  return Json{{"tool", "aim"}, {"version", tool_version()}, {"command", command}, {"config", to_json(c)}};
}

fs::path output_path(const RunConfig& c, const std::string& explicit_path, const char* default_name) {
  if (!explicit_path.empty()) return fs::path(explicit_path);
  return fs::path(c.out_dir) / default_name;
}

void ensure_parent(const fs::path& p) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
}

void write_json(const fs::path& p, const Json& j) {
  ensure_parent(p);
  std::ofstream f(p);
  if (!f) throw Error("cannot write '" + p.string() + "'");
  f << j.dump(2) << '\n';
  if (!f) throw Error("write failed for '" + p.string() + "'");
}

TokenMatrix require_token_file(const std::string& path) {
  if (!fs::exists(path)) throw FormatError("token file '" + path + "' does not exist");
  return read_token_file(path);
}

CostContext cost_context(const RunConfig& c) {
  return CostContext{load_model_profile(c.model_profile), load_hardware_profile(c.hardware_profile), c.cost};
}

std::size_t effective_l1(const RunConfig& c, std::size_t layers) { return c.l1 == 0 ? layers + 1 : c.l1; }
std::size_t effective_l2(const RunConfig& c, std::size_t layers) { return c.l1 == 0 ? layers + 1 : c.l2; }

int cmd_gen_tokens(const Overrides& o, std::ostream& out) {
  const RunConfig c = build_config(o);
  const TokenMatrix tokens = synthesize_tokens(c.seed, c.frames, c.tokens_per_frame, c.dim, c.redundancy);
  const fs::path path = output_path(c, o.output, "tokens.aimt");
  ensure_parent(path);
  write_token_file(path.string(), tokens);
  out << "wrote " << tokens.size() << " tokens (" << c.frames << " frames x " << c.tokens_per_frame << ", dim "
      << tokens.dim() << ") to " << path.string() << '\n';
  return kExitOk;
}

int cmd_merge(const Overrides& o, std::ostream& out) {
  const RunConfig c = build_config(o);
  const std::string input = !o.input.empty() ? o.input : c.token_input;
  if (input.empty()) throw InvalidArgument("merge: --input is required");
  const TokenMatrix tokens = require_token_file(input);
  const auto [merged, trace] = merge_to_ratio(tokens, c.merge);
  const fs::path path = output_path(c, o.output, "merged.aimt");
  ensure_parent(path);
  write_token_file(path.string(), merged);
  if (!o.trace.empty()) {
    Json j = envelope("merge", c);
    j["input"] = input;
    j["input_tokens"] = tokens.size();
    j["output_tokens"] = merged.size();
    j["trace"] = to_json(trace);
    write_json(o.trace, j);
  }
  out << "merged " << tokens.size() << " -> " << merged.size() << " tokens (ratio " << c.merge.retention_ratio << ", "
      << to_string(c.merge.mode) << ") into " << path.string() << '\n';
  return kExitOk;
}

int cmd_simulate(const Overrides& o, std::ostream& out) {
  const RunConfig c = build_config(o);
  const ModelProfile profile = load_model_profile(c.model_profile);
  const std::size_t layers = c.toy_layers != 0 ? c.toy_layers : profile.layers;
  const TokenMatrix visual = c.token_input.empty()
                                 ? synthesize_tokens(c.seed, c.frames, c.tokens_per_frame, c.dim, c.redundancy)
                                 : require_token_file(c.token_input);
  const TokenMatrix text = synthesize_tokens(c.seed + 1, 1, c.text_tokens, visual.dim(), 0.0);
  const ToyModel model(ToyModelConfig{layers, c.toy_hidden, c.toy_heads, c.toy_intermediate, c.seed});
  const PrefillResult result = run_prefill(visual, text, model, c.merge, c.schedule(layers), c.prune);

  Json j = envelope("simulate", c);
  j["result"] = to_json(result);
  const fs::path path = output_path(c, o.output, "prefill.json");
  write_json(path, j);

  out << "layer,visual,text\n";
  for (const LayerRecord& r : result.layers) out << r.layer << ',' << r.visual_count << ',' << r.text_count << '\n';
  out << "merged " << result.input_visual_count << " -> " << result.merged_visual_count << " visual tokens; wrote "
      << path.string() << '\n';
  return kExitOk;
}

void print_cost_summary(std::ostream& out, const CostReport& r) {
  std::ostringstream s;
  s << std::setprecision(6);
  s << "flops_tb " << static_cast<double>(r.llm_flops) / 1e12 << '\n'
    << "merge_overhead_gf " << static_cast<double>(r.merge_overhead) / 1e9 << '\n'
    << "prune_overhead_gf " << static_cast<double>(r.prune_overhead) / 1e9 << '\n'
    << "total_tb " << static_cast<double>(r.total_flops) / 1e12 << '\n'
    << "prefill_ms " << r.prefill_ms << '\n';
  out << s.str();
}

int cmd_cost(const Overrides& o, std::ostream& out) {
  const RunConfig c = build_config(o);
  const CostContext ctx = cost_context(c);
  const std::size_t layers = ctx.model.layers;
  const CostReport r =
      pipeline_flops(ctx, c.geometry(), c.merge, effective_l1(c, layers), effective_l2(c, layers));
  Json j = envelope("cost", c);
  j["model"] = to_json(ctx.model);
  j["hardware"] = to_json(ctx.hardware);
  j["report"] = to_json(r);
  const fs::path path = output_path(c, o.output, "cost.json");
  write_json(path, j);
  print_cost_summary(out, r);
  out << "wrote " << path.string() << '\n';
  return kExitOk;
}

CandidateGrid require_grid(const Overrides& o, std::size_t layers) {
  if (o.grid.empty()) throw InvalidArgument("--grid is required");
  return load_grid(o.grid, layers);
}

int cmd_sweep(const Overrides& o, std::ostream& out) {
  const RunConfig c = build_config(o);
  const CostContext ctx = cost_context(c);
  const CandidateGrid grid = require_grid(o, ctx.model.layers);
  const std::vector<CostReport> reports = sweep(ctx, grid);
  Json echo = envelope("sweep", c);
  echo["grid"] = o.grid;
  const fs::path path = output_path(c, o.output, "sweep.csv");
  ensure_parent(path);
  std::ofstream f(path);
  if (!f) throw Error("cannot write '" + path.string() + "'");
  write_sweep_csv(f, grid, reports, echo);
  write_sweep_csv(out, grid, reports, echo);
  return kExitOk;
}

int cmd_plan(const Overrides& o, std::ostream& out, std::ostream& err) {
  const RunConfig c = build_config(o);
  if (o.budget_tflops.has_value() == o.budget_ms.has_value()) {
    throw InvalidArgument("plan: give exactly one of --budget-tflops or --budget-ms");
  }
  const Budget budget = o.budget_tflops ? Budget::tflops(*o.budget_tflops) : Budget::milliseconds(*o.budget_ms);
  const CostContext ctx = cost_context(c);
  const CandidateGrid grid = require_grid(o, ctx.model.layers);
  std::optional<QualityTable> quality;
  if (!o.quality.empty()) quality = QualityTable::from_csv_file(o.quality);
  try {
    const Plan plan = search_config(ctx, grid, budget, quality ? &*quality : nullptr);
    Json j = envelope("plan", c);
    j["grid"] = o.grid;
    j["plan"] = to_json(plan);
    const fs::path path = output_path(c, o.output, "plan.json");
    write_json(path, j);
    const Candidate& ch = plan.chosen.candidate;
    std::ostringstream s;
    s << std::setprecision(6);
    s << "chosen ratio " << ch.ratio << " l1 " << ch.l1 << " l2 " << ch.l2 << '\n'
      << "flops_tb " << static_cast<double>(plan.chosen.report.llm_flops) / 1e12 << " (total "
      << static_cast<double>(plan.chosen.report.total_flops) / 1e12 << ")\n"
      << "prefill_ms " << plan.chosen.report.prefill_ms << '\n'
      << plan.ranked.size() << " of " << grid.candidates.size() << " candidates feasible; wrote " << path.string()
      << '\n';
    out << s.str();
    return kExitOk;
  } catch (const BudgetInfeasible& e) {
    err << "aim: " << e.what() << '\n';
    const double cheapest = e.cheapest_cost();
    if (budget.kind == Budget::Kind::flops) {
      err << "cheapest candidate: " << cheapest / 1e12 << " TFLOPs\n";
    } else {
      err << "cheapest candidate: " << cheapest << " ms\n";
    }
    return kExitInfeasible;
  }
}

void add_geometry_flags(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--frames", o.frames, "Number of frames");
  cmd->add_option("--tokens-per-frame", o.tokens_per_frame, "Visual tokens per frame");
  cmd->add_option("--text-tokens", o.text_tokens, "Text tokens");
}

void add_merge_flags(CLI::App* cmd, Overrides& o, const char* ratio_flag) {
  cmd->add_option(ratio_flag, o.ratio, "Merge retention ratio in (0, 1]");
  cmd->add_option("--mode", o.mode, "Merge scope: spatial or temporal");
}

void add_schedule_flags(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--l1", o.l1, "First pruning layer; 0 disables pruning");
  cmd->add_option("--l2", o.l2, "Layer after which no visual token remains");
}

void add_profile_flags(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--model", o.model, "Model profile name or JSON path");
  cmd->add_option("--hardware", o.hardware, "Hardware profile name or JSON path");
  cmd->add_option("--similarity-scope", o.scope, "dense_sequence or per_scope");
  cmd->add_option("--timing", o.timing, "before_layer or after_layer");
  cmd->add_flag("--count-elementwise", o.count_elementwise, "Count softmax and norm FLOPs");
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Overrides o;
  CLI::App app{"Token merging, pruning and cost analysis for multi-modal decoder prefill", "aim"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_version_flag("--version", std::string("aim ") + tool_version());
  app.add_option("--config", o.config_path, "Run config JSON");
  app.add_option("--seed", o.seed, "RNG seed");
  app.add_option("--out", o.out_dir, "Output directory");

  CLI::App* gen = app.add_subcommand("gen-tokens", "Write a synthetic token file");
  add_geometry_flags(gen, o);
  gen->add_option("--dim", o.dim, "Embedding width");
  gen->add_option("--redundancy", o.redundancy, "Fraction of near-duplicate tokens");
  gen->add_option("--output", o.output, "Token file path");

  CLI::App* merge = app.add_subcommand("merge", "Merge a token file to a retention ratio");
  merge->add_option("--input", o.input, "Input token file");
  add_merge_flags(merge, o, "--ratio");
  merge->add_option("--output", o.output, "Output token file");
  merge->add_option("--trace", o.trace, "Merge trace JSON path");

  CLI::App* sim = app.add_subcommand("simulate", "Run a toy-model prefill with merging and pruning");
  add_geometry_flags(sim, o);
  sim->add_option("--dim", o.dim, "Embedding width of synthetic tokens");
  sim->add_option("--tokens", o.tokens, "Visual token file (synthetic tokens if omitted)");
  add_merge_flags(sim, o, "--merge-ratio");
  add_schedule_flags(sim, o);
  sim->add_option("--direction", o.direction, "Score direction: received or given");
  sim->add_option("--iterations", o.iterations, "PageRank iterations");
  sim->add_flag("--prune-text", o.prune_text, "Let text tokens compete for retention");
  sim->add_flag("--causal-debias", o.causal_debias, "Normalize received mass by causal exposure");
  sim->add_option("--model", o.model, "Model profile giving the layer count");
  sim->add_option("--output", o.output, "Result JSON path");

  CLI::App* cost = app.add_subcommand("cost", "Cost report for one configuration");
  add_geometry_flags(cost, o);
  cost->add_option("--feature-dim", o.feature_dim, "Similarity width for merge overhead; 0 = hidden");
  add_merge_flags(cost, o, "--merge-ratio");
  add_schedule_flags(cost, o);
  add_profile_flags(cost, o);
  cost->add_option("--output", o.output, "Report JSON path");

  CLI::App* sw = app.add_subcommand("sweep", "Cost every candidate of a grid file");
  sw->add_option("--grid", o.grid, "Grid JSON")->required();
  add_profile_flags(sw, o);
  sw->add_option("--output", o.output, "CSV path");

  CLI::App* plan = app.add_subcommand("plan", "Pick the best configuration under a budget");
  plan->add_option("--grid", o.grid, "Grid JSON")->required();
  plan->add_option("--budget-tflops", o.budget_tflops, "FLOPs budget in TFLOPs");
  plan->add_option("--budget-ms", o.budget_ms, "Prefill time budget in ms");
  plan->add_option("--quality", o.quality, "Quality CSV (ratio,l1,l2,score)");
  add_profile_flags(plan, o);
  plan->add_option("--output", o.output, "Plan JSON path");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitBadInput;
  }

  try {
    if (*gen) return cmd_gen_tokens(o, out);
    if (*merge) return cmd_merge(o, out);
    if (*sim) return cmd_simulate(o, out);
    if (*cost) return cmd_cost(o, out);
    if (*sw) return cmd_sweep(o, out);
    if (*plan) return cmd_plan(o, out, err);
  } catch (const BudgetInfeasible& e) {
    err << "aim: " << e.what() << '\n';
    return kExitInfeasible;
  } catch (const InvalidArgument& e) {
    err << "aim: " << e.what() << '\n';
    return kExitBadInput;
  } catch (const FormatError& e) {
    err << "aim: " << e.what() << '\n';
    return kExitBadInput;
  } catch (const ShapeError& e) {
    err << "aim: " << e.what() << '\n';
    return kExitBadInput;
  } catch (const std::exception& e) {
    err << "aim: " << e.what() << '\n';
    return kExitRuntimeError;
  }
  return kExitBadInput;
}

}  // namespace aim

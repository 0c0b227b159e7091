// Copyright (C) 2026 The aim Authors
// SPDX-License-Identifier: Apache-2.0

#include "aim/costmodel.hpp"

#include <algorithm>
#include <bit>
#include <string>

#include "aim/error.hpp"

namespace aim {

namespace {

Flops ceil_log2(std::size_t n) { return n <= 1 ? 0 : std::bit_width(n - 1); }

}  // namespace

void ModelProfile::validate() const {
  if (layers < 1 || hidden < 1 || heads < 1 || kv_heads < 1 || head_dim < 1 || intermediate < 1 ||
      mlp_matrices < 1) {
    throw InvalidArgument("ModelProfile '" + name + "': all counts must be >= 1");
  }
  if (hidden != heads * head_dim) {
    throw InvalidArgument("ModelProfile '" + name + "': hidden " + std::to_string(hidden) +
                          " != heads x head_dim " + std::to_string(heads * head_dim));
  }
  if (!(bytes_per_weight > 0.0)) throw InvalidArgument("ModelProfile '" + name + "': bytes_per_weight must be > 0");
}

void HardwareProfile::validate() const {
  if (!(peak_flops > 0.0) || !(memory_bandwidth > 0.0)) {
    throw InvalidArgument("HardwareProfile '" + name + "': peak_flops and memory_bandwidth must be > 0");
  }
}

void VisualGeometry::validate() const {
  if (frames < 1 || tokens_per_frame < 1) {
    throw InvalidArgument("VisualGeometry: frames and tokens_per_frame must be >= 1");
  }
}

VisualGeometry VisualGeometry::video() { return VisualGeometry{32, 196, 100, 0}; }

VisualGeometry VisualGeometry::image() { return VisualGeometry{1, 576, 40, 1024}; }

LayerFlops layer_flops(const ModelProfile& p, std::size_t tokens, bool count_elementwise) {
  const Flops n = tokens, d = p.hidden, h = p.heads, dh = p.head_dim;
  LayerFlops f;
  f.qkv = 2 * n * d * (d + 2 * p.kv_heads * dh);
  f.attn_scores = 2 * n * n * h * dh;
  f.attn_apply = 2 * n * n * h * dh;
  f.out_proj = 2 * n * d * d;
  f.mlp = 2 * n * d * p.intermediate * p.mlp_matrices;
  if (count_elementwise) f.elementwise = 5 * h * n * n + 2 * 7 * n * d;
  return f;
}

std::vector<std::size_t> layer_visual_tokens(const PruneSchedule& schedule, PruneTiming timing) {
  const auto counts = retained_counts(schedule);
  if (timing == PruneTiming::before_layer) return counts;
  std::vector<std::size_t> shifted(counts.size());
  for (std::size_t l = 0; l < counts.size(); ++l) shifted[l] = l == 0 ? schedule.base_visual_count : counts[l - 1];
  return shifted;
}

Flops merge_overhead_flops(const VisualGeometry& g, const MergeConfig& merge, std::size_t hidden,
                           SimilarityScope scope) {
  g.validate();
  merge.validate();
  const Flops f = g.feature_dim == 0 ? hidden : g.feature_dim;
  std::vector<std::size_t> sizes = merge.mode == MergeMode::spatial
                                       ? std::vector<std::size_t>(g.frames, g.tokens_per_frame)
                                       : std::vector<std::size_t>{g.visual_tokens()};
  std::vector<std::size_t> targets(sizes.size());
  for (std::size_t s = 0; s < sizes.size(); ++s) targets[s] = merge_target_count(sizes[s], merge.retention_ratio);

  Flops total = 0;
  const Flops pair_cost = 2 * f + 3;  // dot product, two norm scalings, one comparison
  for (;;) {
    Flops sum_a = 0, sum_b = 0, per_scope = 0, active_tokens = 0, pairs_total = 0;
    bool any = false;
    for (std::size_t s = 0; s < sizes.size(); ++s) {
      const std::size_t n = sizes[s];
      if (n <= targets[s]) continue;
      any = true;
      const Flops a = (n + 1) / 2, b = n / 2;
      sum_a += a;
      sum_b += b;
      per_scope += a * b;
      active_tokens += n;
      const std::size_t pairs = std::min(n / 2, n - targets[s]);
      pairs_total += pairs;
      sizes[s] = n - pairs;
    }
    if (!any) break;
    const Flops similarity = scope == SimilarityScope::dense_sequence ? sum_a * sum_b : per_scope;
    total += similarity * pair_cost;
    total += active_tokens * 2 * f;  // row norms
    total += pairs_total * 2 * f;    // accumulate into the destination, then rescale
  }
  return total;
}

Flops prune_overhead_flops(const ModelProfile& profile, const std::vector<std::size_t>& visual_per_layer,
                           std::size_t text_tokens, bool pruning_enabled, std::size_t iterations) {
  if (!pruning_enabled) return 0;
  const Flops h = profile.heads;
  Flops total = 0;
  for (std::size_t l = 0; l + 1 < visual_per_layer.size(); ++l) {
    if (visual_per_layer[l] == 0) continue;
    const Flops n = visual_per_layer[l] + text_tokens;
    total += h * n * n * (1 + 2 * static_cast<Flops>(iterations)) + n * ceil_log2(n);
  }
  return total;
}

double prefill_time_ms(const ModelProfile& p, const HardwareProfile& hw, const std::vector<LayerFlops>& per_layer,
                       const std::vector<std::size_t>& tokens_per_layer) {
  hw.validate();
  if (per_layer.size() != tokens_per_layer.size()) {
    throw ShapeError("prefill_time_ms: " + std::to_string(per_layer.size()) + " layer costs for " +
                     std::to_string(tokens_per_layer.size()) + " token counts");
  }
  const double d = static_cast<double>(p.hidden);
  const double weights = d * (d + 2.0 * static_cast<double>(p.kv_heads * p.head_dim)) + d * d +
                         static_cast<double>(p.mlp_matrices) * d * static_cast<double>(p.intermediate);
  double seconds = 0.0;
  for (std::size_t l = 0; l < per_layer.size(); ++l) {
    const double n = static_cast<double>(tokens_per_layer[l]);
    if (n == 0.0) continue;
    const double bytes = weights * p.bytes_per_weight + n * d * 2.0 * p.bytes_per_weight;
    seconds += std::max(static_cast<double>(per_layer[l].total()) / hw.peak_flops, bytes / hw.memory_bandwidth);
  }
  return seconds * 1e3;
}

CostReport pipeline_flops(const CostContext& ctx, const std::vector<std::size_t>& visual_per_layer,
                          const VisualGeometry& geometry, const MergeConfig& merge, bool pruning_enabled) {
  ctx.model.validate();
  if (visual_per_layer.size() != ctx.model.layers) {
    throw ShapeError("pipeline_flops: schedule has " + std::to_string(visual_per_layer.size()) +
                     " layers, profile '" + ctx.model.name + "' has " + std::to_string(ctx.model.layers));
  }
  CostReport r;
  r.visual_per_layer = visual_per_layer;
  for (std::size_t v : visual_per_layer) {
    const std::size_t n = v + geometry.text_tokens;
    r.tokens_per_layer.push_back(n);
    r.per_layer.push_back(layer_flops(ctx.model, n, ctx.options.count_elementwise));
    r.llm_flops += r.per_layer.back().total();
  }
  r.merge_overhead = merge_overhead_flops(geometry, merge, ctx.model.hidden, ctx.options.similarity_scope);
  r.prune_overhead = prune_overhead_flops(ctx.model, visual_per_layer, geometry.text_tokens, pruning_enabled,
                                          ctx.options.scoring_iterations);
  r.total_flops = r.llm_flops + r.merge_overhead + r.prune_overhead;
  r.prefill_ms = prefill_time_ms(ctx.model, ctx.hardware, r.per_layer, r.tokens_per_layer);
  return r;
}

CostReport pipeline_flops(const CostContext& ctx, const VisualGeometry& geometry, const MergeConfig& merge,
                          std::size_t l1, std::size_t l2) {
  geometry.validate();
  const std::size_t n1 =
      merged_token_count(TokenMatrix::uniform_spans(geometry.frames, geometry.tokens_per_frame), merge);
  const PruneSchedule schedule{l1, l2, ctx.model.layers, n1};
  schedule.validate();
  return pipeline_flops(ctx, layer_visual_tokens(schedule, ctx.options.timing), geometry, merge,
                        schedule.pruning_enabled());
}

}  // namespace aim

// Copyright (C) 2026 The aim Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Analytical prefill cost of a dense decoder stack whose token count varies by
// layer. FLOPs use the 2-FLOPs-per-MAC convention; embedding and vocabulary
// projections are not counted. Latency is a per-layer roofline:
// max(FLOPs / peak, bytes / bandwidth).

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "aim/merge.hpp"
#include "aim/schedule.hpp"

namespace aim {

using Flops = std::uint64_t;

struct ModelProfile {
  std::string name;
  std::size_t layers = 0;
  std::size_t hidden = 0;
  std::size_t heads = 0;
  std::size_t kv_heads = 0;
  std::size_t head_dim = 0;
  std::size_t intermediate = 0;
  // 3 for gated (gate, up, down), 2 for a plain two-matrix MLP.
  std::size_t mlp_matrices = 3;
  bool exclude_vocab_projection = true;
  double bytes_per_weight = 2.0;
  std::string source;

  void validate() const;
};

struct HardwareProfile {
  std::string name;
  double peak_flops = 0.0;        // FLOP/s
  double memory_bandwidth = 0.0;  // bytes/s

  void validate() const;
};

// How the merge stage's similarity work is laid out.
enum class SimilarityScope {
  // One dense similarity between all A and all B tokens of the sequence per
  // iteration, with cross-frame pairs masked out afterwards.
  dense_sequence,
  // Each scope (frame, or the whole sequence in temporal mode) on its own.
  per_scope,
};

// Which layer's token count a scheduled reduction applies to.
enum class PruneTiming {
  // Layer l processes retained_counts[l-1] visual tokens (engine default).
  before_layer,
  // Layer l processes retained_counts[l-2]; layer 1 sees the full set.
  after_layer,
};

struct VisualGeometry {
  std::size_t frames = 32;
  std::size_t tokens_per_frame = 196;
  std::size_t text_tokens = 100;
  // Width of the embeddings the merge similarity runs on; 0 means the
  // decoder's hidden width.
  std::size_t feature_dim = 0;

  std::size_t visual_tokens() const { return frames * tokens_per_frame; }
  void validate() const;

  static VisualGeometry video();  // 32 x 196 visual, 100 text
  static VisualGeometry image();  // 576 visual, 40 text, similarity at width 1024
};

struct CostOptions {
  SimilarityScope similarity_scope = SimilarityScope::dense_sequence;
  PruneTiming timing = PruneTiming::before_layer;
  std::size_t scoring_iterations = 1;
  // Adds softmax (5 FLOPs per score element per head) and two RMSNorms
  // (7 FLOPs per element each) to every layer.
  bool count_elementwise = false;
};

struct LayerFlops {
  Flops qkv = 0;
  Flops attn_scores = 0;
  Flops attn_apply = 0;
  Flops out_proj = 0;
  Flops mlp = 0;
  Flops elementwise = 0;

  Flops total() const { return qkv + attn_scores + attn_apply + out_proj + mlp + elementwise; }
  bool operator==(const LayerFlops&) const = default;
};

struct CostReport {
  std::vector<LayerFlops> per_layer;
  // Tokens (visual + text) processed by each layer.
  std::vector<std::size_t> tokens_per_layer;
  std::vector<std::size_t> visual_per_layer;
  Flops llm_flops = 0;
  Flops merge_overhead = 0;
  Flops prune_overhead = 0;
  Flops total_flops = 0;
  double prefill_ms = 0.0;
};

LayerFlops layer_flops(const ModelProfile& profile, std::size_t tokens, bool count_elementwise = false);

// Visual tokens seen by each layer for the schedule and timing convention.
std::vector<std::size_t> layer_visual_tokens(const PruneSchedule& schedule, PruneTiming timing);

Flops merge_overhead_flops(const VisualGeometry& geometry, const MergeConfig& merge,
                           std::size_t hidden, SimilarityScope scope);

// Scoring cost: after every layer that still carries visual tokens and feeds
// another layer, the per-head attention tensor is reduced to its head mean
// (h * n^2) and propagated per head (2 * h * n^2 per iteration), plus a
// top-k over n scores.
Flops prune_overhead_flops(const ModelProfile& profile, const std::vector<std::size_t>& visual_per_layer,
                           std::size_t text_tokens, bool pruning_enabled, std::size_t iterations);

double prefill_time_ms(const ModelProfile& profile, const HardwareProfile& hardware,
                       const std::vector<LayerFlops>& per_layer, const std::vector<std::size_t>& tokens_per_layer);

struct CostContext {
  ModelProfile model;
  HardwareProfile hardware;
  CostOptions options;
};

// Full report for one (merge, l1, l2) configuration over a workload.
CostReport pipeline_flops(const CostContext& ctx, const VisualGeometry& geometry, const MergeConfig& merge,
                          std::size_t l1, std::size_t l2);

// Same, with an explicit per-layer visual token schedule (length L).
CostReport pipeline_flops(const CostContext& ctx, const std::vector<std::size_t>& visual_per_layer,
                          const VisualGeometry& geometry, const MergeConfig& merge, bool pruning_enabled);

}  // namespace aim

// Copyright (C) 2026 The aim Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Desk-scale causal decoder used to exercise the merge -> prune pipeline on
// real attention matrices. Pre-norm blocks (RMSNorm without gains), multi-head
// causal self-attention and a SiLU-gated MLP; no positional encoding.
// Weights are drawn from a seeded symmetric uniform distribution with unit
// output variance, so attention stays away from both uniform and one-hot.

#include <cstddef>
#include <cstdint>
#include <vector>

#include "aim/merge.hpp"
#include "aim/numerics.hpp"
#include "aim/prune.hpp"
#include "aim/schedule.hpp"
#include "aim/tokens.hpp"

namespace aim {

struct ToyModelConfig {
  std::size_t layers = 4;
  std::size_t hidden = 32;
  std::size_t heads = 4;
  std::size_t intermediate = 64;
  std::uint64_t seed = 0;

  void validate() const;
};

struct DecoderWeights {
  Matrix wq, wk, wv, wo;
  Matrix w_gate, w_up, w_down;
};

class ToyModel {
 public:
  explicit ToyModel(const ToyModelConfig& config);

  const ToyModelConfig& config() const { return config_; }
  std::size_t layers() const { return config_.layers; }
  std::size_t hidden() const { return config_.hidden; }
  std::size_t heads() const { return config_.heads; }
  std::size_t head_dim() const { return config_.hidden / config_.heads; }

  // 1-based layer index.
  const DecoderWeights& layer(std::size_t l) const;

  // Maps token embeddings to the hidden width. Identity when the widths
  // already agree, otherwise a fixed projection derived from the seed and
  // the input width.
  Matrix embed(const Matrix& tokens) const;

 private:
  ToyModelConfig config_;
  std::vector<DecoderWeights> layers_;
};

struct LayerOutput {
  Matrix hidden;
  AttentionSnapshot attention;
};

LayerOutput decoder_layer(const Matrix& hidden, const ToyModel& model, std::size_t layer);

// All layers, no token reduction.
Matrix forward(const ToyModel& model, const Matrix& hidden);

struct PruneOptions {
  ScoringOptions scoring;
  bool prune_text = false;
  bool keep_snapshots = false;
};

struct LayerRecord {
  std::size_t layer = 0;
  std::size_t visual_count = 0;
  std::size_t text_count = 0;
  std::vector<SourceId> visual_ids;
  std::vector<SourceId> text_ids;
};

struct PrefillResult {
  // One record per layer describing the tokens that layer processed.
  std::vector<LayerRecord> layers;
  std::size_t input_visual_count = 0;
  std::size_t merged_visual_count = 0;
  MergeTrace merge_trace;
  Matrix final_hidden;
  std::vector<AttentionSnapshot> snapshots;

  MergeConfig merge;
  PruneSchedule schedule;
  PruneOptions prune;
  ToyModelConfig model;

  std::vector<std::size_t> visual_counts() const;
  std::vector<std::size_t> text_counts() const;
};

// Merges the visual tokens, concatenates text, then runs the stack. Before
// layer l the visual set is cut to retained_counts(schedule)[l - 1], ranked
// by importance scores taken from layer l-1's attention. The schedule's
// base_visual_count is replaced by the post-merge count.
PrefillResult run_prefill(const TokenMatrix& visual, const TokenMatrix& text, const ToyModel& model,
                          const MergeConfig& merge, const PruneSchedule& schedule,
                          const PruneOptions& prune = {});

}  // namespace aim

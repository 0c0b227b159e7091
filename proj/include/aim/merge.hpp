// Copyright (C) 2026 The aim Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Similarity-based visual token merging ahead of the decoder stack.
//
// One merge step splits a scope into A (even positions) and B (odd positions),
// matches every A token to its most cosine-similar B token, and folds the
// `pairs` best-matched A tokens into their B partners by plain averaging.
// Several A tokens may land on the same B token in one step; the result is
// the unweighted mean of all of them. The merged token carries the smallest
// source id of its group and sits in the slot of its earliest member, so
// surviving tokens keep their relative order.
//
// Scopes are frames (spatial mode, the default) or the whole sequence
// (temporal mode). Ties resolve to the lower index throughout.

#include <cstddef>
#include <utility>
#include <vector>

#include "aim/tokens.hpp"

namespace aim {

enum class MergeMode { spatial, temporal };

struct MergeConfig {
  double retention_ratio = 1.0;
  MergeMode mode = MergeMode::spatial;

  void validate() const;
};

struct MergeEvent {
  std::size_t step = 0;
  // Source id of the B token that received the merge.
  SourceId destination = 0;
  // Source ids of the A tokens folded into it, ascending.
  std::vector<SourceId> absorbed;
  // Source id carried by the merged token: min(destination, absorbed...).
  SourceId result = 0;

  bool operator==(const MergeEvent&) const = default;
};

struct MergeGroup {
  SourceId output_id = 0;
  // Original tokens that make up this output token, ascending.
  std::vector<SourceId> members;
  // Contribution of each member to the output embedding; positive, sums to 1.
  std::vector<double> weights;
};

struct MergeTrace {
  std::vector<MergeEvent> events;
  // One group per output token, in output order.
  std::vector<MergeGroup> groups;
};

struct MergeStepResult {
  TokenMatrix tokens;
  std::vector<MergeEvent> events;
};

std::size_t round_half_up(double x);

// max(1, round_half_up(n * ratio)) for a non-empty scope, 0 for an empty one.
std::size_t merge_target_count(std::size_t scope_size, double retention_ratio);

// Total tokens left by merge_to_ratio for the given frame layout.
std::size_t merged_token_count(const std::vector<FrameSpan>& spans, const MergeConfig& config);

// Most pairs a single step can merge: sum over scopes of floor(n_scope / 2).
std::size_t merge_step_capacity(const TokenMatrix& tokens, MergeMode mode);

MergeStepResult merge_step(const TokenMatrix& tokens, std::size_t pairs_to_merge, MergeMode mode,
                           std::size_t step_index = 0);

std::pair<TokenMatrix, MergeTrace> merge_to_ratio(const TokenMatrix& tokens, const MergeConfig& config);

const char* to_string(MergeMode mode);
MergeMode merge_mode_from_string(const std::string& s);

}  // namespace aim

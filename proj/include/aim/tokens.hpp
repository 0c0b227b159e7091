// Copyright (C) 2026 The aim Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "aim/numerics.hpp"

namespace aim {

using SourceId = std::uint64_t;

/// Half-open index range [start, end) of one video frame inside a TokenMatrix.
struct FrameSpan {
  std::size_t start = 0;
  std::size_t end = 0;

  std::size_t size() const { return end - start; }
  bool operator==(const FrameSpan&) const = default;
};

/// A block of token embeddings (N x D) together with its frame layout and the
/// original index of every row.
///
/// Invariants, checked on construction:
///  - frame spans are non-empty, sorted, contiguous and cover [0, N) exactly
///    (an empty matrix has no spans);
///  - source ids are strictly increasing, so reductions never reorder tokens.
class TokenMatrix {
 public:
  TokenMatrix() = default;
  TokenMatrix(Matrix embeddings, std::vector<FrameSpan> spans, std::vector<SourceId> source_ids);
  // Source ids 0..N-1.
  TokenMatrix(Matrix embeddings, std::vector<FrameSpan> spans);

  // One span covering every token; zero tokens give zero spans.
  static TokenMatrix single_span(Matrix embeddings);
  static TokenMatrix empty(std::size_t dim);
  // count frames of tokens_per_frame each.
  static std::vector<FrameSpan> uniform_spans(std::size_t frames, std::size_t tokens_per_frame);

  std::size_t size() const { return embeddings_.rows(); }
  std::size_t dim() const { return embeddings_.cols(); }
  bool empty() const { return size() == 0; }

  const Matrix& embeddings() const { return embeddings_; }
  const std::vector<FrameSpan>& frame_spans() const { return spans_; }
  const std::vector<SourceId>& source_ids() const { return source_ids_; }
  std::span<const double> token(std::size_t i) const { return embeddings_.row(i); }

  // Keeps the given strictly ascending row indices; spans shrink accordingly
  // and frames that lose every token are dropped.
  TokenMatrix select(std::span<const std::size_t> indices) const;

  bool operator==(const TokenMatrix&) const = default;

 private:
  void validate() const;

  Matrix embeddings_;
  std::vector<FrameSpan> spans_;
  std::vector<SourceId> source_ids_;
};

/// The flattened decoder input x = [visual; text] at one layer.
struct SequenceState {
  TokenMatrix visual;
  TokenMatrix text;
  std::size_t layer_index = 1;

  std::size_t visual_count() const { return visual.size(); }
  std::size_t text_count() const { return text.size(); }
  std::size_t total() const { return visual.size() + text.size(); }
  // Index of the first text token in the flattened sequence.
  std::size_t boundary() const { return visual.size(); }
  std::size_t dim() const { return visual.dim(); }

  Matrix flatten() const;
};

SequenceState concat_sequence(TokenMatrix visual, TokenMatrix text);

// Splits a flattened (N+M) x D block back into visual and text parts, reusing
// the layout of the given state.
SequenceState split_sequence(const Matrix& flat, const SequenceState& layout);

struct SynthesisOptions {
  std::uint64_t seed = 0;
  std::size_t frames = 1;
  std::size_t tokens_per_frame = 1;
  std::size_t dim = 1;
  // Fraction of tokens drawn as small perturbations of a cluster centroid;
  // the rest are i.i.d. standard normal vectors.
  double redundancy = 0.5;
  std::size_t clusters = 8;
  // Per-component standard deviation of the perturbation around a centroid.
  double perturbation = 0.01;
};

TokenMatrix synthesize_tokens(const SynthesisOptions& options);

TokenMatrix synthesize_tokens(std::uint64_t seed, std::size_t frames, std::size_t tokens_per_frame,
                              std::size_t dim, double redundancy);

}  // namespace aim

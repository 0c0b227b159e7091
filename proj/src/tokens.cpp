// Copyright (C) 2026 The aim Authors
// SPDX-License-Identifier: Apache-2.0

#include "aim/tokens.hpp"

#include <string>

#include "aim/error.hpp"
#include "aim/random.hpp"

namespace aim {

TokenMatrix::TokenMatrix(Matrix embeddings, std::vector<FrameSpan> spans,
                         std::vector<SourceId> source_ids)
    : embeddings_(std::move(embeddings)), spans_(std::move(spans)), source_ids_(std::move(source_ids)) {
  validate();
}

TokenMatrix::TokenMatrix(Matrix embeddings, std::vector<FrameSpan> spans)
    : embeddings_(std::move(embeddings)), spans_(std::move(spans)) {
  source_ids_.resize(embeddings_.rows());
  for (std::size_t i = 0; i < source_ids_.size(); ++i) source_ids_[i] = i;
  validate();
}

TokenMatrix TokenMatrix::single_span(Matrix embeddings) {
  std::vector<FrameSpan> spans;
  if (embeddings.rows() > 0) spans.push_back({0, embeddings.rows()});
  return TokenMatrix(std::move(embeddings), std::move(spans));
}

TokenMatrix TokenMatrix::empty(std::size_t dim) { return TokenMatrix(Matrix(0, dim), {}); }

std::vector<FrameSpan> TokenMatrix::uniform_spans(std::size_t frames, std::size_t tokens_per_frame) {
  std::vector<FrameSpan> spans(frames);
  for (std::size_t f = 0; f < frames; ++f) spans[f] = {f * tokens_per_frame, (f + 1) * tokens_per_frame};
  return spans;
}

void TokenMatrix::validate() const {
  const std::size_t n = embeddings_.rows();
  if (source_ids_.size() != n) {
    throw ShapeError("TokenMatrix: " + std::to_string(source_ids_.size()) + " source ids for " +
                     std::to_string(n) + " tokens");
  }
  std::size_t cursor = 0;
  for (const auto& s : spans_) {
    if (s.start != cursor || s.end <= s.start) {
      throw InvalidArgument("TokenMatrix: frame spans must be non-empty, sorted and contiguous (span [" +
                            std::to_string(s.start) + ", " + std::to_string(s.end) + ") at offset " +
                            std::to_string(cursor) + ")");
    }
    cursor = s.end;
  }
  if (cursor != n) {
    throw InvalidArgument("TokenMatrix: frame spans cover [0, " + std::to_string(cursor) +
                          ") but there are " + std::to_string(n) + " tokens");
  }
  for (std::size_t i = 1; i < n; ++i) {
    if (source_ids_[i] <= source_ids_[i - 1]) {
      throw InvalidArgument("TokenMatrix: source ids must be strictly increasing");
    }
  }
}

TokenMatrix TokenMatrix::select(std::span<const std::size_t> indices) const {
  for (std::size_t i = 1; i < indices.size(); ++i) {
    if (indices[i] <= indices[i - 1]) {
      throw InvalidArgument("TokenMatrix::select: indices must be strictly ascending");
    }
  }
  Matrix rows = embeddings_.select_rows(indices);
  std::vector<SourceId> ids(indices.size());
  std::vector<FrameSpan> spans;
  std::size_t k = 0;
  for (const auto& s : spans_) {
    const std::size_t begin = k;
    while (k < indices.size() && indices[k] < s.end) ++k;
    if (k > begin) spans.push_back({begin, k});
  }
  for (std::size_t i = 0; i < indices.size(); ++i) ids[i] = source_ids_[indices[i]];
  return TokenMatrix(std::move(rows), std::move(spans), std::move(ids));
}

Matrix SequenceState::flatten() const {
  const std::size_t d = visual.dim();
  Matrix flat(total(), d);
  for (std::size_t i = 0; i < visual.size(); ++i) {
    auto src = visual.token(i);
    std::copy(src.begin(), src.end(), flat.row(i).begin());
  }
  for (std::size_t i = 0; i < text.size(); ++i) {
    auto src = text.token(i);
    std::copy(src.begin(), src.end(), flat.row(visual.size() + i).begin());
  }
  return flat;
}

SequenceState concat_sequence(TokenMatrix visual, TokenMatrix text) {
  if (visual.dim() != text.dim()) {
    throw ShapeError("concat_sequence: visual embedding dim " + std::to_string(visual.dim()) +
                     " differs from text embedding dim " + std::to_string(text.dim()));
  }
  return SequenceState{std::move(visual), std::move(text), 1};
}

SequenceState split_sequence(const Matrix& flat, const SequenceState& layout) {
  if (flat.rows() != layout.total()) {
    throw ShapeError("split_sequence: " + flat.shape_string() + " does not hold " +
                     std::to_string(layout.total()) + " tokens");
  }
  const std::size_t nv = layout.visual_count();
  std::vector<std::size_t> vi(nv), ti(layout.text_count());
  for (std::size_t i = 0; i < nv; ++i) vi[i] = i;
  for (std::size_t i = 0; i < ti.size(); ++i) ti[i] = nv + i;
  TokenMatrix visual(flat.select_rows(vi), layout.visual.frame_spans(), layout.visual.source_ids());
  TokenMatrix text(flat.select_rows(ti), layout.text.frame_spans(), layout.text.source_ids());
  return SequenceState{std::move(visual), std::move(text), layout.layer_index};
}

TokenMatrix synthesize_tokens(const SynthesisOptions& o) {
  if (o.frames == 0 || o.tokens_per_frame == 0 || o.dim == 0 || o.clusters == 0) {
    throw InvalidArgument("synthesize_tokens: frames, tokens_per_frame, dim and clusters must be >= 1");
  }
  if (!(o.redundancy >= 0.0 && o.redundancy <= 1.0)) {
    throw InvalidArgument("synthesize_tokens: redundancy must lie in [0, 1]");
  }
  Rng rng(o.seed);
  Matrix centroids(o.clusters, o.dim);
  for (double& v : centroids.values()) v = rng.normal();

  const std::size_t n = o.frames * o.tokens_per_frame;
  Matrix e(n, o.dim);
  for (std::size_t i = 0; i < n; ++i) {
    auto row = e.row(i);
    if (rng.uniform01() < o.redundancy) {
      const auto c = static_cast<std::size_t>(rng.below(o.clusters));
      for (std::size_t p = 0; p < o.dim; ++p) row[p] = centroids(c, p) + o.perturbation * rng.normal();
    } else {
      for (std::size_t p = 0; p < o.dim; ++p) row[p] = rng.normal();
    }
  }
  return TokenMatrix(std::move(e), TokenMatrix::uniform_spans(o.frames, o.tokens_per_frame));
}

TokenMatrix synthesize_tokens(std::uint64_t seed, std::size_t frames, std::size_t tokens_per_frame,
                              std::size_t dim, double redundancy) {
  SynthesisOptions o;
  o.seed = seed;
  o.frames = frames;
  o.tokens_per_frame = tokens_per_frame;
  o.dim = dim;
  o.redundancy = redundancy;
  return synthesize_tokens(o);
}

}  // namespace aim

// Copyright (C) 2026 The aim Authors
// SPDX-License-Identifier: Apache-2.0

#include "aim/prune.hpp"

#include <algorithm>
#include <cmath>

#include "aim/error.hpp"

namespace aim {

void AttentionSnapshot::validate(double tolerance) const {
  const std::size_t n = weights.rows();
  if (weights.cols() != n) {
    throw ShapeError("AttentionSnapshot: weights must be square, got " + weights.shape_string());
  }
  for (std::size_t i = 0; i < n; ++i) {
    double sum = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const double w = weights(i, j);
      if (j > i && w != 0.0) {
        throw InvalidArgument("AttentionSnapshot: non-zero weight above the diagonal at (" +
                              std::to_string(i) + ", " + std::to_string(j) + ")");
      }
      if (w < 0.0) throw InvalidArgument("AttentionSnapshot: negative weight in row " + std::to_string(i));
      sum += w;
    }
    if (std::abs(sum - 1.0) > tolerance) {
      throw InvalidArgument("AttentionSnapshot: row " + std::to_string(i) + " sums to " +
                            std::to_string(sum));
    }
  }
}

namespace {

void normalize(std::vector<double>& s) {
  double total = 0.0;
  for (double v : s) total += v;
  if (!(total > 0.0)) throw Error("importance_scores: score mass vanished during propagation");
  for (double& v : s) v /= total;
}

std::vector<double> propagate(const Matrix& a, const std::vector<double>& s, const ScoringOptions& o) {
  const std::size_t n = a.rows();
  std::vector<double> next =
      o.direction == ScoreDirection::received ? transposed_matvec(a, s) : matvec(a, s);
  const double inv_n = 1.0 / static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    next[i] *= inv_n;
    if (o.causal_debias && o.direction == ScoreDirection::received) {
      next[i] /= static_cast<double>(n - i);
    }
  }
  normalize(next);
  return next;
}

}  // namespace

ImportanceScores importance_scores(const AttentionSnapshot& attn, const ScoringOptions& options) {
  attn.validate();
  if (!options.until_converged && options.iterations == 0) {
    throw InvalidArgument("importance_scores: iterations must be >= 1");
  }
  const std::size_t n = attn.size();
  ImportanceScores out;
  if (n == 0) return out;
  out.scores.assign(n, 1.0 / static_cast<double>(n));

  const std::size_t limit = options.until_converged ? options.max_iterations : options.iterations;
  for (std::size_t it = 0; it < limit; ++it) {
    auto next = propagate(attn.weights, out.scores, options);
    double change = 0.0;
    for (std::size_t i = 0; i < n; ++i) change += std::abs(next[i] - out.scores[i]);
    out.scores = std::move(next);
    out.iterations_used = it + 1;
    if (options.until_converged && change < options.tolerance) break;
  }
  return out;
}

std::vector<std::size_t> select_retained(const SequenceState& state, const ImportanceScores& scores,
                                         std::size_t keep_visual, bool prune_text) {
  const std::size_t nv = state.visual_count(), total = state.total();
  if (scores.scores.size() != total) {
    throw ShapeError("select_retained: " + std::to_string(scores.scores.size()) + " scores for " +
                     std::to_string(total) + " tokens");
  }
  if (keep_visual > nv) {
    throw InvalidArgument("select_retained: keep_visual=" + std::to_string(keep_visual) +
                          " exceeds the " + std::to_string(nv) + " visual tokens present");
  }
  std::vector<std::size_t> kept;
  if (prune_text) {
    kept = top_k_indices(scores.scores, keep_visual + state.text_count());
  } else {
    kept = top_k_indices(std::span<const double>(scores.scores).first(nv), keep_visual);
    for (std::size_t i = nv; i < total; ++i) kept.push_back(i);
  }
  std::sort(kept.begin(), kept.end());
  return kept;
}

AttentionSnapshot head_average(std::span<const Matrix> per_head, std::size_t layer_index) {
  if (per_head.empty()) throw InvalidArgument("head_average: at least one head is required");
  const std::size_t r = per_head[0].rows(), c = per_head[0].cols();
  for (const auto& h : per_head) {
    if (h.rows() != r || h.cols() != c) {
      throw ShapeError("head_average: head shape " + h.shape_string() + " differs from " +
                       per_head[0].shape_string());
    }
  }
  Matrix mean(r, c);
  auto out = mean.values();
  for (const auto& h : per_head) {
    auto v = h.values();
    for (std::size_t k = 0; k < out.size(); ++k) out[k] += v[k];
  }
  const double inv = 1.0 / static_cast<double>(per_head.size());
  for (double& v : out) v *= inv;
  AttentionSnapshot snap{std::move(mean), layer_index};
  snap.validate(1e-9);
  return snap;
}

const char* to_string(ScoreDirection d) { return d == ScoreDirection::received ? "received" : "given"; }

ScoreDirection score_direction_from_string(const std::string& s) {
  if (s == "received") return ScoreDirection::received;
  if (s == "given") return ScoreDirection::given;
  throw InvalidArgument("unknown score direction '" + s + "' (expected received or given)");
}

}  // namespace aim

// Copyright (C) 2026 The aim Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "aim/numerics.hpp"
#include "aim/tokens.hpp"

namespace aim {

/// Head-averaged, causally masked attention probabilities of one layer.
/// Row i sums to 1 over columns j <= i; entries above the diagonal are 0.
struct AttentionSnapshot {
  Matrix weights;
  std::size_t layer_index = 0;

  std::size_t size() const { return weights.rows(); }
  // Throws InvalidArgument if the causal row-stochastic invariant fails.
  void validate(double tolerance = 1e-9) const;
};

enum class ScoreDirection {
  // s'_i = 1/n * sum_j A(j, i) s_j: a token gains importance from the
  // attention it receives.
  received,
  // s'_i = 1/n * sum_j A(i, j) s_j, the formula read literally. On a
  // row-stochastic matrix this maps the uniform vector to itself.
  given,
};

struct ScoringOptions {
  ScoreDirection direction = ScoreDirection::received;
  std::size_t iterations = 1;
  // Iterate until the L1 change drops below `tolerance` or `max_iterations`
  // is reached; `iterations` is ignored.
  bool until_converged = false;
  double tolerance = 1e-9;
  std::size_t max_iterations = 100;
  // Divide the mass received by token i by the number of queries that can
  // attend to it (n - i under a causal mask). Only affects `received`.
  bool causal_debias = false;
};

struct ImportanceScores {
  std::vector<double> scores;
  std::size_t iterations_used = 0;
};

// PageRank-style propagation of a uniform start vector through the snapshot,
// renormalized to sum 1 after every iteration.
ImportanceScores importance_scores(const AttentionSnapshot& attn, const ScoringOptions& options = {});

// Flattened indices (ascending) of the tokens kept for the next layer.
// With prune_text off every text token survives and the visual tokens with
// the keep_visual highest scores are kept. With prune_text on, the
// keep_visual + M best tokens overall survive regardless of modality.
std::vector<std::size_t> select_retained(const SequenceState& state, const ImportanceScores& scores,
                                         std::size_t keep_visual, bool prune_text = false);

AttentionSnapshot head_average(std::span<const Matrix> per_head, std::size_t layer_index = 0);

const char* to_string(ScoreDirection d);
ScoreDirection score_direction_from_string(const std::string& s);

}  // namespace aim

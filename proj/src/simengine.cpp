// Copyright (C) 2026 The aim Authors
// SPDX-License-Identifier: Apache-2.0

#include "aim/simengine.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>

#include "aim/error.hpp"
#include "aim/random.hpp"

namespace aim {

namespace {

constexpr double kNormEps = 1e-6;

Matrix uniform_matrix(Rng& rng, std::size_t rows, std::size_t cols) {
  // Var(U(-a, a)) = a^2 / 3; a = sqrt(3 / fan_in) gives unit output variance.
  const double a = std::sqrt(3.0 / static_cast<double>(rows));
  Matrix m(rows, cols);
  for (double& v : m.values()) v = rng.uniform(-a, a);
  return m;
}

Matrix rms_norm(const Matrix& x) {
  Matrix out(x.rows(), x.cols());
  for (std::size_t i = 0; i < x.rows(); ++i) {
    const auto r = x.row(i);
    double ss = 0.0;
    for (double v : r) ss += v * v;
    const double inv = 1.0 / std::sqrt(ss / static_cast<double>(r.size()) + kNormEps);
    auto o = out.row(i);
    for (std::size_t p = 0; p < r.size(); ++p) o[p] = r[p] * inv;
  }
  return out;
}

Matrix column_block(const Matrix& m, std::size_t start, std::size_t width) {
  Matrix out(m.rows(), width);
  for (std::size_t i = 0; i < m.rows(); ++i) {
    const auto r = m.row(i);
    std::copy_n(r.begin() + static_cast<std::ptrdiff_t>(start), width, out.row(i).begin());
  }
  return out;
}

void add_in_place(Matrix& dst, const Matrix& src) {
  auto d = dst.values();
  auto s = src.values();
  for (std::size_t k = 0; k < d.size(); ++k) d[k] += s[k];
}

SequenceState keep_tokens(const SequenceState& state, const std::vector<std::size_t>& retained) {
  std::vector<std::size_t> vis, txt;
  for (std::size_t i : retained) {
    if (i < state.boundary()) {
      vis.push_back(i);
    } else {
      txt.push_back(i - state.boundary());
    }
  }
  return SequenceState{state.visual.select(vis), state.text.select(txt), state.layer_index};
}

}  // namespace

void ToyModelConfig::validate() const {
  if (layers < 1 || hidden < 1 || heads < 1 || intermediate < 1) {
    throw InvalidArgument("ToyModelConfig: layers, hidden, heads and intermediate must be >= 1");
  }
  if (hidden % heads != 0) {
    throw InvalidArgument("ToyModelConfig: hidden " + std::to_string(hidden) +
                          " is not divisible by heads " + std::to_string(heads));
  }
}

ToyModel::ToyModel(const ToyModelConfig& config) : config_(config) {
  config_.validate();
  Rng rng(config_.seed);
  const std::size_t d = config_.hidden, m = config_.intermediate;
  layers_.reserve(config_.layers);
  for (std::size_t l = 0; l < config_.layers; ++l) {
    DecoderWeights w;
    w.wq = uniform_matrix(rng, d, d);
    w.wk = uniform_matrix(rng, d, d);
    w.wv = uniform_matrix(rng, d, d);
    w.wo = uniform_matrix(rng, d, d);
    w.w_gate = uniform_matrix(rng, d, m);
    w.w_up = uniform_matrix(rng, d, m);
    w.w_down = uniform_matrix(rng, m, d);
    layers_.push_back(std::move(w));
  }
}

const DecoderWeights& ToyModel::layer(std::size_t l) const {
  if (l < 1 || l > layers_.size()) {
    throw InvalidArgument("ToyModel: layer " + std::to_string(l) + " outside [1, " +
                          std::to_string(layers_.size()) + "]");
  }
  return layers_[l - 1];
}

Matrix ToyModel::embed(const Matrix& tokens) const {
  if (tokens.cols() == config_.hidden) return tokens;
  Rng rng(config_.seed ^ (0x9E3779B97F4A7C15ull * (tokens.cols() + 1)));
  return matmul(tokens, uniform_matrix(rng, tokens.cols(), config_.hidden));
}

LayerOutput decoder_layer(const Matrix& hidden, const ToyModel& model, std::size_t layer) {
  const auto& w = model.layer(layer);
  if (hidden.cols() != model.hidden()) {
    throw ShapeError("decoder_layer: hidden state " + hidden.shape_string() + " does not match width " +
                     std::to_string(model.hidden()));
  }
  const std::size_t n = hidden.rows(), dh = model.head_dim();
  const Matrix x = rms_norm(hidden);
  const Matrix q = matmul(x, w.wq), k = matmul(x, w.wk), v = matmul(x, w.wv);
  const Mask causal = Mask::causal(n);
  const double scale = 1.0 / std::sqrt(static_cast<double>(dh));

  Matrix context(n, model.hidden());
  std::vector<Matrix> probs;
  probs.reserve(model.heads());
  for (std::size_t h = 0; h < model.heads(); ++h) {
    Matrix scores = matmul_transposed(column_block(q, h * dh, dh), column_block(k, h * dh, dh));
    for (double& s : scores.values()) s *= scale;
    Matrix p = masked_softmax_rows(scores, causal);
    const Matrix ctx = matmul(p, column_block(v, h * dh, dh));
    for (std::size_t i = 0; i < n; ++i) {
      std::copy_n(ctx.row(i).begin(), dh, context.row(i).begin() + static_cast<std::ptrdiff_t>(h * dh));
    }
    probs.push_back(std::move(p));
  }

  LayerOutput out;
  out.hidden = hidden;
  add_in_place(out.hidden, matmul(context, w.wo));

  const Matrix x2 = rms_norm(out.hidden);
  Matrix gate = matmul(x2, w.w_gate);
  const Matrix up = matmul(x2, w.w_up);
  auto g = gate.values();
  auto u = up.values();
  for (std::size_t i = 0; i < g.size(); ++i) g[i] = g[i] / (1.0 + std::exp(-g[i])) * u[i];
  add_in_place(out.hidden, matmul(gate, w.w_down));
  out.hidden.check_finite("decoder_layer");

  out.attention = n == 0 ? AttentionSnapshot{Matrix(0, 0), layer} : head_average(probs, layer);
  return out;
}

Matrix forward(const ToyModel& model, const Matrix& hidden) {
  Matrix h = hidden;
  for (std::size_t l = 1; l <= model.layers(); ++l) h = decoder_layer(h, model, l).hidden;
  return h;
}

std::vector<std::size_t> PrefillResult::visual_counts() const {
  std::vector<std::size_t> c;
  for (const auto& r : layers) c.push_back(r.visual_count);
  return c;
}

std::vector<std::size_t> PrefillResult::text_counts() const {
  std::vector<std::size_t> c;
  for (const auto& r : layers) c.push_back(r.text_count);
  return c;
}

PrefillResult run_prefill(const TokenMatrix& visual, const TokenMatrix& text, const ToyModel& model,
                          const MergeConfig& merge, const PruneSchedule& schedule,
                          const PruneOptions& prune) {
  if (schedule.layers != model.layers()) {
    throw InvalidArgument("run_prefill: schedule covers " + std::to_string(schedule.layers) +
                          " layers but the model has " + std::to_string(model.layers()));
  }
  PrefillResult result;
  result.merge = merge;
  result.prune = prune;
  result.model = model.config();
  result.input_visual_count = visual.size();

  auto [merged, trace] = merge_to_ratio(visual, merge);
  result.merged_visual_count = merged.size();
  result.merge_trace = std::move(trace);

  result.schedule = schedule;
  result.schedule.base_visual_count = merged.size();
  const auto counts = retained_counts(result.schedule);

  SequenceState state = concat_sequence(std::move(merged), text);
  Matrix hidden = model.embed(state.flatten());
  std::optional<AttentionSnapshot> previous;

  for (std::size_t l = 1; l <= model.layers(); ++l) {
    const std::size_t target = counts[l - 1];
    if (target < state.visual_count()) {
      std::vector<std::size_t> retained;
      if (previous) {
        const auto scores = importance_scores(*previous, prune.scoring);
        retained = select_retained(state, scores, target, prune.prune_text);
      } else {
        // Only a step schedule at layer 1 prunes before any attention
        // exists, and it keeps no visual tokens, so no ranking is needed.
        for (std::size_t i = state.boundary(); i < state.total(); ++i) retained.push_back(i);
      }
      hidden = hidden.select_rows(retained);
      state = keep_tokens(state, retained);
    }
    state.layer_index = l;

    LayerRecord rec;
    rec.layer = l;
    rec.visual_count = state.visual_count();
    rec.text_count = state.text_count();
    rec.visual_ids = state.visual.source_ids();
    rec.text_ids = state.text.source_ids();
    result.layers.push_back(std::move(rec));

    auto out = decoder_layer(hidden, model, l);
    hidden = std::move(out.hidden);
    if (prune.keep_snapshots) result.snapshots.push_back(out.attention);
    previous = std::move(out.attention);
  }
  result.final_hidden = std::move(hidden);
  return result;
}

}  // namespace aim

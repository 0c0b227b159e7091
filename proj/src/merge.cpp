// Copyright (C) 2026 The aim Authors
// SPDX-License-Identifier: Apache-2.0

#include "aim/merge.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <map>
#include <string>

#include "aim/error.hpp"

namespace aim {

namespace {

struct WorkToken {
  std::vector<double> embedding;
  SourceId id = 0;
  std::size_t frame = 0;
  // (original id, weight), ascending by id.
  std::vector<std::pair<SourceId, double>> composition;
};

using Scope = std::vector<WorkToken>;

struct Match {
  std::size_t scope = 0;
  std::size_t a_pos = 0;
  std::size_t b_pos = 0;
  double similarity = 0.0;
};

Matrix gather(const Scope& scope, std::size_t first) {
  const std::size_t count = scope.size() > first ? (scope.size() - first + 1) / 2 : 0;
  const std::size_t d = scope.empty() ? 0 : scope.front().embedding.size();
  Matrix m(count, d);
  for (std::size_t k = 0; k < count; ++k) {
    const auto& t = scope[first + 2 * k];
    if (norm(t.embedding) == 0.0) throw ZeroNormError(t.id);
    std::copy(t.embedding.begin(), t.embedding.end(), m.row(k).begin());
  }
  return m;
}

// Best B partner for every A token of the scope, in A order.
std::vector<Match> best_matches(const Scope& scope, std::size_t scope_index) {
  std::vector<Match> out;
  if (scope.size() < 2) return out;
  const Matrix a = gather(scope, 0);
  const Matrix b = gather(scope, 1);
  const Matrix sim = cosine_similarity_matrix(a, b);
  out.reserve(a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    std::size_t best = 0;
    for (std::size_t j = 1; j < b.rows(); ++j)
      if (sim(i, j) > sim(i, best)) best = j;
    out.push_back({scope_index, 2 * i, 2 * best + 1, sim(i, best)});
  }
  return out;
}

// Folds the chosen A tokens of one scope into their partners.
Scope apply_merges(const Scope& scope, const std::vector<Match>& chosen, std::size_t step,
                   std::vector<MergeEvent>& events) {
  std::map<std::size_t, std::vector<std::size_t>> receivers;  // b_pos -> a_pos ascending
  for (const auto& m : chosen) receivers[m.b_pos].push_back(m.a_pos);

  std::vector<std::size_t> owner_of(scope.size());
  std::vector<bool> is_member(scope.size(), false);
  std::map<std::size_t, WorkToken> merged_at;  // slot -> merged token

  for (auto& [b_pos, a_list] : receivers) {
    std::sort(a_list.begin(), a_list.end());
    const WorkToken& b = scope[b_pos];
    WorkToken merged;
    merged.embedding = b.embedding;
    for (std::size_t a_pos : a_list) {
      const auto& ae = scope[a_pos].embedding;
      for (std::size_t p = 0; p < ae.size(); ++p) merged.embedding[p] += ae[p];
    }
    const double inv = 1.0 / static_cast<double>(a_list.size() + 1);
    for (double& v : merged.embedding) v *= inv;

    const std::size_t slot = std::min(b_pos, a_list.front());
    merged.id = scope[slot].id;
    merged.frame = scope[slot].frame;

    MergeEvent ev;
    ev.step = step;
    ev.destination = b.id;
    ev.result = merged.id;
    merged.composition = b.composition;
    is_member[b_pos] = true;
    for (std::size_t a_pos : a_list) {
      ev.absorbed.push_back(scope[a_pos].id);
      const auto& ac = scope[a_pos].composition;
      merged.composition.insert(merged.composition.end(), ac.begin(), ac.end());
      is_member[a_pos] = true;
    }
    for (auto& [id, w] : merged.composition) w *= inv;
    std::sort(merged.composition.begin(), merged.composition.end());
    events.push_back(std::move(ev));
    merged_at.emplace(slot, std::move(merged));
  }

  Scope out;
  out.reserve(scope.size() - chosen.size());
  for (std::size_t pos = 0; pos < scope.size(); ++pos) {
    if (auto it = merged_at.find(pos); it != merged_at.end()) {
      out.push_back(std::move(it->second));
    } else if (!is_member[pos]) {
      out.push_back(scope[pos]);
    }
  }
  std::sort(events.end() - static_cast<std::ptrdiff_t>(receivers.size()), events.end(),
            [](const MergeEvent& x, const MergeEvent& y) { return x.result < y.result; });
  return out;
}

// Selects the globally best `pairs` matches (ties: lower A position, taken in
// scope order) and applies them to every scope.
std::vector<Scope> step_scopes(const std::vector<Scope>& scopes, std::size_t pairs, std::size_t step,
                               std::vector<MergeEvent>& events) {
  std::vector<Match> all;
  for (std::size_t s = 0; s < scopes.size(); ++s) {
    auto m = best_matches(scopes[s], s);
    all.insert(all.end(), m.begin(), m.end());
  }
  if (pairs > all.size()) {
    throw InvalidArgument("merge_step: cannot merge " + std::to_string(pairs) + " pairs; at most " +
                          std::to_string(all.size()) + " are available");
  }
  std::vector<double> sims(all.size());
  for (std::size_t i = 0; i < all.size(); ++i) sims[i] = all[i].similarity;
  std::vector<std::vector<Match>> per_scope(scopes.size());
  for (std::size_t idx : top_k_indices(sims, pairs)) per_scope[all[idx].scope].push_back(all[idx]);

  std::vector<Scope> out(scopes.size());
  for (std::size_t s = 0; s < scopes.size(); ++s) {
    out[s] = per_scope[s].empty() ? scopes[s] : apply_merges(scopes[s], per_scope[s], step, events);
  }
  return out;
}

std::vector<Scope> to_scopes(const TokenMatrix& tokens, MergeMode mode) {
  std::vector<Scope> scopes(mode == MergeMode::spatial ? tokens.frame_spans().size() : 1);
  for (std::size_t f = 0; f < tokens.frame_spans().size(); ++f) {
    const auto& span = tokens.frame_spans()[f];
    Scope& dst = mode == MergeMode::spatial ? scopes[f] : scopes[0];
    for (std::size_t i = span.start; i < span.end; ++i) {
      const auto row = tokens.token(i);
      WorkToken t;
      t.embedding.assign(row.begin(), row.end());
      t.id = tokens.source_ids()[i];
      t.frame = f;
      t.composition = {{t.id, 1.0}};
      dst.push_back(std::move(t));
    }
  }
  return scopes;
}

TokenMatrix from_scopes(const std::vector<Scope>& scopes, std::size_t dim, std::size_t frames,
                        MergeTrace* trace) {
  std::vector<const WorkToken*> flat;
  for (const auto& s : scopes)
    for (const auto& t : s) flat.push_back(&t);

  Matrix e(flat.size(), dim);
  std::vector<SourceId> ids(flat.size());
  std::vector<std::size_t> per_frame(frames, 0);
  for (std::size_t i = 0; i < flat.size(); ++i) {
    std::copy(flat[i]->embedding.begin(), flat[i]->embedding.end(), e.row(i).begin());
    ids[i] = flat[i]->id;
    ++per_frame[flat[i]->frame];
    if (trace) {
      MergeGroup g;
      g.output_id = flat[i]->id;
      for (const auto& [id, w] : flat[i]->composition) {
        g.members.push_back(id);
        g.weights.push_back(w);
      }
      trace->groups.push_back(std::move(g));
    }
  }
  std::vector<FrameSpan> spans;
  std::size_t cursor = 0;
  for (std::size_t c : per_frame) {
    if (c == 0) continue;
    spans.push_back({cursor, cursor + c});
    cursor += c;
  }
  return TokenMatrix(std::move(e), std::move(spans), std::move(ids));
}

}  // namespace

void MergeConfig::validate() const {
  if (!(retention_ratio > 0.0 && retention_ratio <= 1.0)) {
    throw InvalidArgument("MergeConfig: retention_ratio must lie in (0, 1], got " +
                          std::to_string(retention_ratio));
  }
}

std::size_t round_half_up(double x) {
  if (!(x >= 0.0) || !std::isfinite(x)) throw InvalidArgument("round_half_up: value must be finite and >= 0");
  return static_cast<std::size_t>(std::floor(x + 0.5));
}

std::size_t merge_target_count(std::size_t scope_size, double retention_ratio) {
  if (scope_size == 0) return 0;
  return std::max<std::size_t>(1, round_half_up(static_cast<double>(scope_size) * retention_ratio));
}

std::size_t merged_token_count(const std::vector<FrameSpan>& spans, const MergeConfig& config) {
  config.validate();
  std::size_t n = 0, total = 0;
  for (const auto& s : spans) {
    n += s.size();
    if (config.mode == MergeMode::spatial) total += merge_target_count(s.size(), config.retention_ratio);
  }
  return config.mode == MergeMode::spatial ? total : merge_target_count(n, config.retention_ratio);
}

std::size_t merge_step_capacity(const TokenMatrix& tokens, MergeMode mode) {
  if (mode == MergeMode::temporal) return tokens.size() / 2;
  std::size_t cap = 0;
  for (const auto& s : tokens.frame_spans()) cap += s.size() / 2;
  return cap;
}

MergeStepResult merge_step(const TokenMatrix& tokens, std::size_t pairs_to_merge, MergeMode mode,
                           std::size_t step_index) {
  if (pairs_to_merge > merge_step_capacity(tokens, mode)) {
    throw InvalidArgument("merge_step: pairs_to_merge=" + std::to_string(pairs_to_merge) +
                          " exceeds the step capacity " +
                          std::to_string(merge_step_capacity(tokens, mode)) + " for " +
                          std::to_string(tokens.size()) + " tokens");
  }
  MergeStepResult result;
  auto scopes = to_scopes(tokens, mode);
  if (pairs_to_merge > 0) scopes = step_scopes(scopes, pairs_to_merge, step_index, result.events);
  result.tokens = from_scopes(scopes, tokens.dim(), tokens.frame_spans().size(), nullptr);
  return result;
}

std::pair<TokenMatrix, MergeTrace> merge_to_ratio(const TokenMatrix& tokens, const MergeConfig& config) {
  config.validate();
  auto scopes = to_scopes(tokens, config.mode);
  std::vector<std::vector<MergeEvent>> scope_events(scopes.size());
  std::vector<std::exception_ptr> failures(scopes.size());

  // Scopes are independent; each one's result depends only on its own tokens.
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t si = 0; si < static_cast<std::ptrdiff_t>(scopes.size()); ++si) {
    const auto s = static_cast<std::size_t>(si);
    try {
      const std::size_t target = merge_target_count(scopes[s].size(), config.retention_ratio);
      std::vector<Scope> one{std::move(scopes[s])};
      for (std::size_t step = 0; one[0].size() > target; ++step) {
        const std::size_t current = one[0].size();
        const std::size_t pairs = std::min(current / 2, current - target);
        one = step_scopes(one, pairs, step, scope_events[s]);
      }
      scopes[s] = std::move(one[0]);
    } catch (...) {
      failures[s] = std::current_exception();
    }
  }
  for (const auto& f : failures)
    if (f) std::rethrow_exception(f);

  MergeTrace trace;
  for (auto& ev : scope_events) trace.events.insert(trace.events.end(), ev.begin(), ev.end());
  TokenMatrix out = from_scopes(scopes, tokens.dim(), tokens.frame_spans().size(), &trace);
  return {std::move(out), std::move(trace)};
}

const char* to_string(MergeMode mode) { return mode == MergeMode::spatial ? "spatial" : "temporal"; }

MergeMode merge_mode_from_string(const std::string& s) {
  if (s == "spatial") return MergeMode::spatial;
  if (s == "temporal") return MergeMode::temporal;
  throw InvalidArgument("unknown merge mode '" + s + "' (expected spatial or temporal)");
}

}  // namespace aim

// Copyright (C) 2026 The aim Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Brute-force bipartite merge written from the matching rule alone: plain
// nested loops, no shared helpers with the library.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <vector>

namespace oracle {

struct Tok {
  std::vector<double> e;
  std::uint64_t id = 0;
  std::size_t frame = 0;
};

struct Pair {
  std::uint64_t a_id = 0;
  std::uint64_t b_id = 0;
  bool operator==(const Pair&) const = default;
  bool operator<(const Pair& o) const { return a_id != o.a_id ? a_id < o.a_id : b_id < o.b_id; }
};

using Scope = std::vector<Tok>;

inline double cosine(const std::vector<double>& u, const std::vector<double>& v) {
  double uv = 0, uu = 0, vv = 0;
  for (std::size_t i = 0; i < u.size(); ++i) uv += u[i] * v[i];
  for (std::size_t i = 0; i < u.size(); ++i) uu += u[i] * u[i];
  for (std::size_t i = 0; i < v.size(); ++i) vv += v[i] * v[i];
  const double c = uv / (std::sqrt(uu) * std::sqrt(vv));
  return c > 1.0 ? 1.0 : (c < -1.0 ? -1.0 : c);
}

// One step over all scopes with a single global ranking. Returns the chosen
// (A, B) pairs sorted by A id.
inline std::vector<Pair> step(std::vector<Scope>& scopes, std::size_t pairs) {
  struct Cand {
    double sim;
    std::size_t order, scope, a, b;
  };
  std::vector<Cand> cands;
  for (std::size_t s = 0; s < scopes.size(); ++s) {
    const Scope& sc = scopes[s];
    if (sc.size() < 2) continue;
    for (std::size_t a = 0; a < sc.size(); a += 2) {
      std::size_t best = 1;
      double best_sim = cosine(sc[a].e, sc[1].e);
      for (std::size_t b = 3; b < sc.size(); b += 2) {
        const double c = cosine(sc[a].e, sc[b].e);
        if (c > best_sim) {
          best_sim = c;
          best = b;
        }
      }
      cands.push_back({best_sim, cands.size(), s, a, best});
    }
  }
  std::sort(cands.begin(), cands.end(),
            [](const Cand& x, const Cand& y) { return x.sim != y.sim ? x.sim > y.sim : x.order < y.order; });
  cands.resize(pairs);

  std::vector<Pair> chosen;
  for (std::size_t s = 0; s < scopes.size(); ++s) {
    Scope& sc = scopes[s];
    // members[b] = A positions merged into b.
    std::vector<std::vector<std::size_t>> members(sc.size());
    std::vector<bool> gone(sc.size(), false);
    for (const Cand& c : cands) {
      if (c.scope != s) continue;
      members[c.b].push_back(c.a);
      chosen.push_back({sc[c.a].id, sc[c.b].id});
    }
    std::vector<std::pair<std::size_t, Tok>> placed;  // (slot, token)
    for (std::size_t b = 0; b < sc.size(); ++b) {
      if (members[b].empty()) continue;
      Tok t;
      t.e = sc[b].e;
      std::size_t slot = b;
      for (std::size_t a : members[b]) {
        for (std::size_t p = 0; p < t.e.size(); ++p) t.e[p] += sc[a].e[p];
        slot = std::min(slot, a);
        gone[a] = true;
      }
      for (double& v : t.e) v /= static_cast<double>(members[b].size() + 1);
      gone[b] = true;
      t.id = sc[slot].id;
      t.frame = sc[slot].frame;
      placed.push_back({slot, t});
    }
    Scope next;
    for (std::size_t pos = 0; pos < sc.size(); ++pos) {
      bool emitted = false;
      for (const auto& [slot, t] : placed) {
        if (slot == pos) {
          next.push_back(t);
          emitted = true;
        }
      }
      if (!emitted && !gone[pos]) next.push_back(sc[pos]);
    }
    sc = next;
  }
  std::sort(chosen.begin(), chosen.end());
  return chosen;
}

inline std::size_t target(std::size_t n, double r) {
  const auto t = static_cast<std::size_t>(std::floor(static_cast<double>(n) * r + 0.5));
  return t < 1 ? 1 : t;
}

// Repeats steps on each scope independently until it reaches its target.
// Returns every chosen pair across all steps, sorted.
inline std::vector<Pair> to_ratio(std::vector<Scope>& scopes, double r) {
  std::vector<Pair> all;
  for (Scope& sc : scopes) {
    const std::size_t goal = target(sc.size(), r);
    std::vector<Scope> one{sc};
    while (one[0].size() > goal) {
      const std::size_t n = one[0].size();
      const auto p = step(one, std::min(n / 2, n - goal));
      all.insert(all.end(), p.begin(), p.end());
    }
    sc = one[0];
  }
  std::sort(all.begin(), all.end());
  return all;
}

}  // namespace oracle

// Copyright (C) 2026 The aim Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <istream>
#include <map>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "aim/costmodel.hpp"

namespace aim {

// One (merge retention ratio, l1, l2) configuration. l1 = L + 1 means
// pruning is disabled.
struct Candidate {
  double ratio = 1.0;
  std::size_t l1 = 0;
  std::size_t l2 = 0;

  bool operator==(const Candidate&) const = default;
};

std::vector<double> default_ratios();

struct CandidateGrid {
  std::vector<Candidate> candidates;
  VisualGeometry geometry;
  MergeMode mode = MergeMode::spatial;

  // Every ratio paired with every valid (l1 <= l2) schedule. Ratios are
  // sorted descending; the order is ratio, then l1, then l2 as given.
  static CandidateGrid cross_product(std::vector<double> ratios, const std::vector<std::size_t>& l1_values,
                                     const std::vector<std::size_t>& l2_values, const VisualGeometry& geometry = {});

  void validate(std::size_t layers) const;
};

struct Budget {
  enum class Kind { flops, prefill_ms };
  Kind kind = Kind::flops;
  double value = 0.0;

  static Budget tflops(double t) { return {Kind::flops, t * 1e12}; }
  static Budget milliseconds(double ms) { return {Kind::prefill_ms, ms}; }
};

// User accuracy table keyed by (ratio, l1, l2). Ratios are matched after
// rounding to 1e-6.
class QualityTable {
 public:
  void set(const Candidate& c, double score);
  std::optional<double> score(const Candidate& c) const;
  std::size_t size() const { return scores_.size(); }

  // CSV with a header naming the columns ratio, l1, l2, score.
  static QualityTable from_csv(std::istream& in);
  static QualityTable from_csv_file(const std::string& path);

 private:
  using Key = std::tuple<long long, std::size_t, std::size_t>;
  static Key key(const Candidate& c);
  std::map<Key, double> scores_;
};

struct RankedCandidate {
  Candidate candidate;
  CostReport report;
  std::size_t grid_index = 0;
};

struct Plan {
  RankedCandidate chosen;
  // Every feasible candidate, best first.
  std::vector<RankedCandidate> ranked;
  Budget budget;
  bool used_quality_table = false;
};

MergeConfig merge_config_for(const CandidateGrid& grid, const Candidate& c);

// One report per candidate, in grid order.
std::vector<CostReport> sweep(const CostContext& ctx, const CandidateGrid& grid);

// Throws BudgetInfeasible when nothing fits; the error carries the cheapest
// candidate's cost in the budget's unit.
Plan search_config(const CostContext& ctx, const CandidateGrid& grid, const Budget& budget,
                   const QualityTable* quality = nullptr);

// Ranks already-costed candidates. True when a should come before b.
bool ranks_before(const RankedCandidate& a, const RankedCandidate& b, const QualityTable* quality);

double budget_cost(const CostReport& report, Budget::Kind kind);

}  // namespace aim

// Copyright (C) 2026 The aim Authors
// SPDX-License-Identifier: Apache-2.0

#include "aim/planner.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <fstream>
#include <functional>
#include <sstream>

#include "aim/error.hpp"

namespace aim {

std::vector<double> default_ratios() { return {1.0, 0.5, 0.25, 0.125, 0.063, 0.031, 0.016}; }

CandidateGrid CandidateGrid::cross_product(std::vector<double> ratios, const std::vector<std::size_t>& l1_values,
                                           const std::vector<std::size_t>& l2_values,
                                           const VisualGeometry& geometry) {
  std::stable_sort(ratios.begin(), ratios.end(), std::greater<>());
  CandidateGrid grid;
  grid.geometry = geometry;
  for (double r : ratios) {
    for (std::size_t l1 : l1_values) {
      for (std::size_t l2 : l2_values) {
        if (l1 <= l2) grid.candidates.push_back({r, l1, l2});
      }
    }
  }
  return grid;
}

void CandidateGrid::validate(std::size_t layers) const {
  if (candidates.empty()) throw InvalidArgument("CandidateGrid: no candidates");
  geometry.validate();
  for (const Candidate& c : candidates) {
    if (!(c.ratio > 0.0 && c.ratio <= 1.0)) {
      throw InvalidArgument("CandidateGrid: ratio " + std::to_string(c.ratio) + " outside (0, 1]");
    }
    PruneSchedule{c.l1, c.l2, layers, 0}.validate();
  }
}

QualityTable::Key QualityTable::key(const Candidate& c) {
  return {std::llround(c.ratio * 1e6), c.l1, c.l2};
}

void QualityTable::set(const Candidate& c, double score) {
  if (!std::isfinite(score)) throw InvalidArgument("QualityTable: non-finite score");
  scores_[key(c)] = score;
}

std::optional<double> QualityTable::score(const Candidate& c) const {
  auto it = scores_.find(key(c));
  if (it == scores_.end()) return std::nullopt;
  return it->second;
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) {
    const auto b = cell.find_first_not_of(" \t\r");
    const auto e = cell.find_last_not_of(" \t\r");
    out.push_back(b == std::string::npos ? "" : cell.substr(b, e - b + 1));
  }
  return out;
}

}  // namespace

QualityTable QualityTable::from_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw FormatError("quality table: empty input");
  const auto header = split_csv_line(line);
  auto column = [&](const std::string& name) {
    auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw FormatError("quality table: missing column '" + name + "'");
    return static_cast<std::size_t>(it - header.begin());
  };
  const std::size_t ci_ratio = column("ratio"), ci_l1 = column("l1"), ci_l2 = column("l2"), ci_score = column("score");
  QualityTable table;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto cells = split_csv_line(line);
    const std::size_t need = std::max({ci_ratio, ci_l1, ci_l2, ci_score}) + 1;
    if (cells.size() < need) throw FormatError("quality table line " + std::to_string(line_no) + ": too few columns");
    try {
      Candidate c{std::stod(cells[ci_ratio]), std::stoul(cells[ci_l1]), std::stoul(cells[ci_l2])};
      table.set(c, std::stod(cells[ci_score]));
    } catch (const std::logic_error&) {
      throw FormatError("quality table line " + std::to_string(line_no) + ": unparsable number");
    }
  }
  return table;
}

QualityTable QualityTable::from_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open quality table '" + path + "'");
  return from_csv(in);
}

MergeConfig merge_config_for(const CandidateGrid& grid, const Candidate& c) {
  return MergeConfig{c.ratio, grid.mode};
}

std::vector<CostReport> sweep(const CostContext& ctx, const CandidateGrid& grid) {
  grid.validate(ctx.model.layers);
  std::vector<CostReport> reports(grid.candidates.size());
  std::exception_ptr failure;
  const long long n = static_cast<long long>(grid.candidates.size());
#pragma omp parallel for schedule(dynamic)
  for (long long i = 0; i < n; ++i) {
    try {
      const Candidate& c = grid.candidates[static_cast<std::size_t>(i)];
      reports[static_cast<std::size_t>(i)] = pipeline_flops(ctx, grid.geometry, merge_config_for(grid, c), c.l1, c.l2);
    } catch (...) {
#pragma omp critical(aim_sweep_error)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
  return reports;
}

double budget_cost(const CostReport& report, Budget::Kind kind) {
  return kind == Budget::Kind::flops ? static_cast<double>(report.total_flops) : report.prefill_ms;
}

bool ranks_before(const RankedCandidate& a, const RankedCandidate& b, const QualityTable* quality) {
  if (quality != nullptr) {
    const auto sa = quality->score(a.candidate), sb = quality->score(b.candidate);
    if (sa.has_value() != sb.has_value()) return sa.has_value();
    if (sa && *sa != *sb) return *sa > *sb;
  }
  const Candidate &x = a.candidate, &y = b.candidate;
  if (x.ratio != y.ratio) return x.ratio > y.ratio;
  if (x.l1 != y.l1) return x.l1 > y.l1;
  if (x.l2 != y.l2) return x.l2 > y.l2;
  if (a.report.total_flops != b.report.total_flops) return a.report.total_flops < b.report.total_flops;
  return a.grid_index < b.grid_index;
}

Plan search_config(const CostContext& ctx, const CandidateGrid& grid, const Budget& budget,
                   const QualityTable* quality) {
  if (!(budget.value > 0.0) || !std::isfinite(budget.value)) throw InvalidArgument("budget must be finite and > 0");
  const auto reports = sweep(ctx, grid);
  Plan plan;
  plan.budget = budget;
  plan.used_quality_table = quality != nullptr;
  double cheapest = INFINITY;
  for (std::size_t i = 0; i < reports.size(); ++i) {
    const double cost = budget_cost(reports[i], budget.kind);
    cheapest = std::min(cheapest, cost);
    if (cost <= budget.value) plan.ranked.push_back({grid.candidates[i], reports[i], i});
  }
  if (plan.ranked.empty()) {
    std::ostringstream msg;
    msg << "budget infeasible: budget " << budget.value
        << (budget.kind == Budget::Kind::flops ? " FLOPs" : " ms") << ", cheapest candidate costs " << cheapest;
    throw BudgetInfeasible(msg.str(), cheapest);
  }
  std::sort(plan.ranked.begin(), plan.ranked.end(),
            [quality](const RankedCandidate& a, const RankedCandidate& b) { return ranks_before(a, b, quality); });
  plan.chosen = plan.ranked.front();
  return plan;
}

}  // namespace aim

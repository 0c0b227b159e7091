// Copyright (C) 2026 The aim Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <sstream>

#include "aim/error.hpp"
#include "aim/planner.hpp"
#include "aim/serialize.hpp"
#include "oracles/planner_oracle.hpp"
#include "test_support.hpp"

using aim::Budget;
using aim::Candidate;
using aim::CandidateGrid;

namespace {

aim::CostContext video_context() {
  const std::string dir = AIM_TEST_PROFILE_DIR;
  return {aim::load_model_profile(dir + "/qwen2-7b.json"), aim::load_hardware_profile(dir + "/a100.json"), {}};
}

std::string grid_path(const char* name) { return std::string(AIM_TEST_GRID_DIR) + "/" + name; }

}  // namespace

TEST(Grid, CrossProductKeepsOrderedPairsOnly) {
  const auto g = CandidateGrid::cross_product({0.25, 1.0}, {14, 22}, {14, 22});
  ASSERT_EQ(g.candidates.size(), 6u);
  EXPECT_EQ(g.candidates[0], (Candidate{1.0, 14, 14}));
  EXPECT_EQ(g.candidates[2], (Candidate{1.0, 22, 22}));
  EXPECT_EQ(g.candidates[3], (Candidate{0.25, 14, 14}));
}

TEST(Grid, ValidationRejectsBadCandidates) {
  CandidateGrid g;
  EXPECT_THROW(g.validate(28), aim::InvalidArgument);
  g.candidates = {{1.5, 1, 2}};
  EXPECT_THROW(g.validate(28), aim::InvalidArgument);
  g.candidates = {{0.5, 10, 5}};
  EXPECT_THROW(g.validate(28), aim::InvalidArgument);
}

TEST(Grid, DefaultRatios) {
  EXPECT_EQ(aim::default_ratios(), (std::vector<double>{1.0, 0.5, 0.25, 0.125, 0.063, 0.031, 0.016}));
}

TEST(Sweep, OrderStableWithDuplicates) {
  const auto ctx = video_context();
  CandidateGrid g;
  g.candidates = {{0.25, 14, 22}, {1.0, 29, 29}, {0.25, 14, 22}};
  const auto r = aim::sweep(ctx, g);
  ASSERT_EQ(r.size(), 3u);
  EXPECT_EQ(r[0].llm_flops, r[2].llm_flops);
  EXPECT_GT(r[1].llm_flops, r[0].llm_flops);
  const auto again = aim::sweep(ctx, g);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(again[i].total_flops, r[i].total_flops);
}

TEST(Sweep, AdaptiveGridDeclines) {
  const auto ctx = video_context();
  const auto g = aim::load_grid(grid_path("table7_adaptive.json"), 28);
  const auto r = aim::sweep(ctx, g);
  ASSERT_EQ(r.size(), 7u);
  EXPECT_NEAR(static_cast<double>(r.front().llm_flops) / 1e12, 99.63, 1.0);
  for (std::size_t i = 1; i < r.size(); ++i) EXPECT_LT(r[i].llm_flops, r[i - 1].llm_flops);
}

TEST(Plan, FifteenTeraflopsPicksDefaultConfig) {
  const auto ctx = video_context();
  const auto g = aim::load_grid(grid_path("table7_adaptive.json"), 28);
  const auto plan = aim::search_config(ctx, g, Budget::tflops(15));
  EXPECT_EQ(plan.chosen.candidate, (Candidate{0.25, 14, 22}));
  EXPECT_LE(static_cast<double>(plan.chosen.report.total_flops), 15e12);
  EXPECT_EQ(plan.ranked.size(), 5u);
}

TEST(Plan, GenerousBudgetPicksUnreducedModel) {
  const auto ctx = video_context();
  const auto g = aim::load_grid(grid_path("table7_adaptive.json"), 28);
  const auto plan = aim::search_config(ctx, g, Budget::tflops(1000));
  EXPECT_EQ(plan.chosen.candidate.ratio, 1.0);
  EXPECT_FALSE(aim::PruneSchedule({plan.chosen.candidate.l1, plan.chosen.candidate.l2, 28, 0}).pruning_enabled());
}

TEST(Plan, TinyBudgetIsInfeasibleWithCheapestCost) {
  const auto ctx = video_context();
  const auto g = aim::load_grid(grid_path("table7_adaptive.json"), 28);
  const auto sweep = aim::sweep(ctx, g);
  double cheapest = 1e300;
  for (const auto& r : sweep) cheapest = std::min(cheapest, static_cast<double>(r.total_flops));
  try {
    aim::search_config(ctx, g, Budget::tflops(1e-3));
    FAIL();
  } catch (const aim::BudgetInfeasible& e) {
    EXPECT_DOUBLE_EQ(e.cheapest_cost(), cheapest);
  }
}

TEST(Plan, RejectsNonPositiveBudget) {
  const auto ctx = video_context();
  const auto g = aim::load_grid(grid_path("table7_adaptive.json"), 28);
  EXPECT_THROW(aim::search_config(ctx, g, Budget::tflops(0)), aim::InvalidArgument);
}

TEST(Plan, PrefillBudgetUsesMilliseconds) {
  const auto ctx = video_context();
  const auto g = aim::load_grid(grid_path("table6_prune_grid.json"), 28);
  const auto sweep = aim::sweep(ctx, g);
  const auto plan = aim::search_config(ctx, g, Budget::milliseconds(sweep[5].prefill_ms));
  for (const auto& rc : plan.ranked) EXPECT_LE(rc.report.prefill_ms, sweep[5].prefill_ms);
}

TEST(Plan, QualityTableOverridesAndMissingRankLast) {
  const auto ctx = video_context();
  const auto g = aim::load_grid(grid_path("table6_prune_grid.json"), 28);
  aim::QualityTable q;
  q.set({0.25, 7, 8}, 0.9);
  q.set({0.25, 14, 22}, 0.8);
  const auto plan = aim::search_config(ctx, g, Budget::tflops(100), &q);
  EXPECT_EQ(plan.chosen.candidate, (Candidate{0.25, 7, 8}));
  EXPECT_EQ(plan.ranked[1].candidate, (Candidate{0.25, 14, 22}));
  // Unscored candidates follow in default order: later l1 first.
  EXPECT_EQ(plan.ranked[2].candidate, (Candidate{0.25, 28, 29}));
}

TEST(Plan, MatchesExhaustiveOracleAndIsMonotone) {
  const auto ctx = video_context();
  const auto g = aim::load_grid(grid_path("cross_7x5x5.json"), 28);
  const auto reports = aim::sweep(ctx, g);
  aim::Rng rng(404);
  for (int trial = 0; trial < 10; ++trial) {
    aim::QualityTable q;
    std::vector<oracle::PlanEntry> entries;
    for (std::size_t i = 0; i < g.candidates.size(); ++i) {
      const auto& c = g.candidates[i];
      std::optional<double> s;
      if (rng.below(4) != 0) {
        s = static_cast<double>(rng.below(20));
        q.set(c, *s);
      }
      entries.push_back({c.ratio, c.l1, c.l2, reports[i].total_flops, static_cast<double>(reports[i].total_flops), s});
    }
    int prev_rank = -1;
    for (double tf : {3.0, 8.0, 15.0, 40.0, 120.0}) {
      for (bool use_q : {false, true}) {
        const auto want = oracle::best_feasible(entries, tf * 1e12, use_q);
        ASSERT_TRUE(want.has_value());
        const auto plan = aim::search_config(ctx, g, Budget::tflops(tf), use_q ? &q : nullptr);
        EXPECT_EQ(plan.chosen.grid_index, *want) << "budget " << tf << " quality " << use_q;
      }
      // Default-order rank of the chosen candidate only improves with budget.
      const auto plan = aim::search_config(ctx, g, Budget::tflops(tf));
      const auto full = aim::search_config(ctx, g, Budget::tflops(1e6));
      int rank = 0;
      while (full.ranked[rank].grid_index != plan.chosen.grid_index) ++rank;
      if (prev_rank >= 0) EXPECT_LE(rank, prev_rank);
      prev_rank = rank;
    }
  }
}

TEST(QualityCsv, ParsesColumnsInAnyOrder) {
  std::istringstream in("score,l2,l1,ratio\n0.5, 22, 14, 0.25\n\n0.7,29,29,1.0\n");
  const auto q = aim::QualityTable::from_csv(in);
  EXPECT_EQ(q.size(), 2u);
  EXPECT_EQ(q.score({0.25, 14, 22}), 0.5);
  EXPECT_EQ(q.score({1.0, 29, 29}), 0.7);
  EXPECT_FALSE(q.score({0.5, 29, 29}).has_value());
}

TEST(QualityCsv, RejectsMalformedInput) {
  std::istringstream missing("ratio,l1,score\n0.5,1,2\n");
  EXPECT_THROW(aim::QualityTable::from_csv(missing), aim::FormatError);
  std::istringstream bad("ratio,l1,l2,score\nx,1,2,3\n");
  EXPECT_THROW(aim::QualityTable::from_csv(bad), aim::FormatError);
  EXPECT_THROW(aim::QualityTable::from_csv_file("/nonexistent.csv"), aim::FormatError);
}

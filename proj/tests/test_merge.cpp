// Copyright (C) 2026 The aim Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>
#include <omp.h>

#include <numeric>

#include "aim/error.hpp"
#include "aim/merge.hpp"
#include "test_support.hpp"

using aim::Matrix;
using aim::MergeConfig;
using aim::MergeMode;
using aim::TokenMatrix;

namespace {

TokenMatrix four_tokens() {
  return TokenMatrix::single_span(Matrix::from_rows({{1, 0}, {0.8, 0.6}, {0, 1}, {-1, 0}}));
}

}  // namespace

TEST(MergeStep, FourTokenExample) {
  const auto r = aim::merge_step(four_tokens(), 1, MergeMode::spatial);
  ASSERT_EQ(r.tokens.size(), 3u);
  EXPECT_NEAR(r.tokens.token(0)[0], 0.9, 1e-15);
  EXPECT_NEAR(r.tokens.token(0)[1], 0.3, 1e-15);
  EXPECT_EQ(r.tokens.token(1)[1], 1.0);
  EXPECT_EQ(r.tokens.token(2)[0], -1.0);
  EXPECT_EQ(r.tokens.source_ids(), (std::vector<aim::SourceId>{0, 2, 3}));
  ASSERT_EQ(r.events.size(), 1u);
  EXPECT_EQ(r.events[0].destination, 1u);
  EXPECT_EQ(r.events[0].absorbed, std::vector<aim::SourceId>{0});
  EXPECT_EQ(r.events[0].result, 0u);
}

TEST(MergeStep, ZeroPairsIsIdentity) {
  const auto t = four_tokens();
  EXPECT_EQ(aim::merge_step(t, 0, MergeMode::spatial).tokens, t);
}

TEST(MergeStep, MultiWayMergeAveragesAllMembers) {
  // Both A tokens (0 and 2) prefer B token 1.
  const TokenMatrix t = TokenMatrix::single_span(Matrix::from_rows({{1, 0.1}, {1, 0}, {1, -0.1}, {-1, 0}}));
  const auto r = aim::merge_step(t, 2, MergeMode::spatial);
  ASSERT_EQ(r.tokens.size(), 2u);
  EXPECT_NEAR(r.tokens.token(0)[0], 1.0, 1e-15);
  EXPECT_NEAR(r.tokens.token(0)[1], 0.0, 1e-15);
  EXPECT_EQ(r.tokens.source_ids(), (std::vector<aim::SourceId>{0, 3}));
  ASSERT_EQ(r.events.size(), 1u);
  EXPECT_EQ(r.events[0].absorbed, (std::vector<aim::SourceId>{0, 2}));
}

TEST(MergeStep, TiesPreferLowerIndices) {
  // All tokens identical: A0 and A2 tie on every B; both pick B1, and with
  // one pair A0 wins the ranking.
  const TokenMatrix t = TokenMatrix::single_span(Matrix(4, 2, 1.0));
  const auto r = aim::merge_step(t, 1, MergeMode::spatial);
  ASSERT_EQ(r.events.size(), 1u);
  EXPECT_EQ(r.events[0].destination, 1u);
  EXPECT_EQ(r.events[0].absorbed, std::vector<aim::SourceId>{0});
}

TEST(MergeStep, CapacityIsEnforced) {
  const TokenMatrix t(Matrix(5, 1, 1.0), {{0, 3}, {3, 5}});
  EXPECT_EQ(aim::merge_step_capacity(t, MergeMode::spatial), 2u);
  EXPECT_EQ(aim::merge_step_capacity(t, MergeMode::temporal), 2u);
  EXPECT_THROW(aim::merge_step(t, 3, MergeMode::spatial), aim::InvalidArgument);
}

TEST(MergeStep, SpatialNeverCrossesFrames) {
  // Token 1 (frame 0) is the perfect partner of token 2 (frame 1), but frames
  // are separate scopes.
  const TokenMatrix t(Matrix::from_rows({{1, 0}, {0, 1}, {0, 1}, {-1, 0}}), {{0, 2}, {2, 4}});
  const auto r = aim::merge_step(t, 2, MergeMode::spatial);
  EXPECT_EQ(r.tokens.source_ids(), (std::vector<aim::SourceId>{0, 2}));
  EXPECT_EQ(r.tokens.frame_spans().size(), 2u);
}

TEST(MergeStep, ZeroNormTokenReportsItsId) {
  const TokenMatrix t(Matrix::from_rows({{1, 0}, {0, 0}, {0, 1}}), {{0, 3}}, {10, 11, 12});
  try {
    aim::merge_step(t, 1, MergeMode::spatial);
    FAIL();
  } catch (const aim::ZeroNormError& e) {
    ASSERT_TRUE(e.token_id().has_value());
    EXPECT_EQ(*e.token_id(), 11u);
  }
}

TEST(MergeTarget, RoundHalfUpWithFloorOfOne) {
  EXPECT_EQ(aim::merge_target_count(196, 0.25), 49u);
  EXPECT_EQ(aim::merge_target_count(196, 0.125), 25u);  // 24.5 rounds up
  EXPECT_EQ(aim::merge_target_count(196, 0.001), 1u);
  EXPECT_EQ(aim::merge_target_count(0, 0.5), 0u);
  EXPECT_EQ(aim::merged_token_count(TokenMatrix::uniform_spans(32, 196), {0.25, MergeMode::spatial}), 1568u);
  EXPECT_EQ(aim::merged_token_count(TokenMatrix::uniform_spans(32, 196), {0.125, MergeMode::temporal}), 784u);
}

TEST(MergeConfig, RejectsOutOfRangeRatio) {
  EXPECT_THROW(aim::merge_to_ratio(four_tokens(), {0.0, MergeMode::spatial}), aim::InvalidArgument);
  EXPECT_THROW(aim::merge_to_ratio(four_tokens(), {1.5, MergeMode::spatial}), aim::InvalidArgument);
}

TEST(MergeToRatio, RatioOneIsIdentity) {
  const auto t = aim::synthesize_tokens(3, 4, 9, 5, 0.5);
  const auto [out, trace] = aim::merge_to_ratio(t, {1.0, MergeMode::spatial});
  EXPECT_EQ(out, t);
  EXPECT_TRUE(trace.events.empty());
  EXPECT_EQ(trace.groups.size(), t.size());
}

TEST(MergeToRatio, HitsTargetPerFrameAndKeepsOrder) {
  const auto t = aim::synthesize_tokens(4, 6, 37, 8, 0.6);
  for (double r : {0.5, 0.25, 0.063, 0.016}) {
    for (MergeMode mode : {MergeMode::spatial, MergeMode::temporal}) {
      const MergeConfig cfg{r, mode};
      const auto [out, trace] = aim::merge_to_ratio(t, cfg);
      EXPECT_EQ(out.size(), aim::merged_token_count(t.frame_spans(), cfg));
      if (mode == MergeMode::spatial) {
        ASSERT_EQ(out.frame_spans().size(), 6u);
        for (const auto& s : out.frame_spans()) EXPECT_EQ(s.size(), aim::merge_target_count(37, r));
      }
      const auto& ids = out.source_ids();
      EXPECT_TRUE(std::is_sorted(ids.begin(), ids.end()));
    }
  }
}

TEST(MergeToRatio, GroupsPartitionInputsAndReconstructEmbeddings) {
  const auto t = aim::synthesize_tokens(9, 3, 20, 6, 0.8);
  const auto [out, trace] = aim::merge_to_ratio(t, {0.2, MergeMode::temporal});
  ASSERT_EQ(trace.groups.size(), out.size());
  std::vector<int> seen(t.size(), 0);
  for (std::size_t g = 0; g < trace.groups.size(); ++g) {
    const auto& grp = trace.groups[g];
    EXPECT_EQ(grp.output_id, out.source_ids()[g]);
    EXPECT_EQ(grp.members.front(), grp.output_id);
    EXPECT_NEAR(std::accumulate(grp.weights.begin(), grp.weights.end(), 0.0), 1.0, 1e-12);
    std::vector<double> rebuilt(t.dim(), 0.0);
    for (std::size_t k = 0; k < grp.members.size(); ++k) {
      ++seen[grp.members[k]];
      for (std::size_t p = 0; p < t.dim(); ++p) rebuilt[p] += grp.weights[k] * t.token(grp.members[k])[p];
    }
    for (std::size_t p = 0; p < t.dim(); ++p) EXPECT_NEAR(rebuilt[p], out.token(g)[p], 1e-9);
  }
  for (int c : seen) EXPECT_EQ(c, 1);
}

TEST(MergeToRatio, MatchesBruteForceOracle) {
  aim::Rng rng(2024);
  for (int trial = 0; trial < 200; ++trial) {
    const auto t = testing_support::random_tokens(rng, 14, 6);
    const bool spatial = rng.below(2) == 0;
    const double r = 0.05 + 0.95 * rng.uniform01();
    auto scopes = testing_support::to_oracle_scopes(t, spatial);
    const auto expected_pairs = oracle::to_ratio(scopes, r);
    const auto expected = testing_support::flatten(scopes);

    const auto [out, trace] = aim::merge_to_ratio(t, {r, spatial ? MergeMode::spatial : MergeMode::temporal});
    std::vector<oracle::Pair> got;
    for (const auto& ev : trace.events)
      for (auto a : ev.absorbed) got.push_back({a, ev.destination});
    std::sort(got.begin(), got.end());
    ASSERT_EQ(got, expected_pairs) << "trial " << trial;
    ASSERT_EQ(out.size(), expected.size());
    for (std::size_t i = 0; i < out.size(); ++i) {
      EXPECT_EQ(out.source_ids()[i], expected[i].id);
      for (std::size_t p = 0; p < out.dim(); ++p) EXPECT_NEAR(out.token(i)[p], expected[i].e[p], 1e-9);
    }
  }
}

TEST(MergeToRatio, IndependentOfThreadCount) {
  const auto t = aim::synthesize_tokens(17, 12, 30, 8, 0.5);
  const int saved = omp_get_max_threads();
  omp_set_num_threads(1);
  const auto a = aim::merge_to_ratio(t, {0.3, MergeMode::spatial});
  omp_set_num_threads(4);
  const auto b = aim::merge_to_ratio(t, {0.3, MergeMode::spatial});
  omp_set_num_threads(saved);
  EXPECT_EQ(a.first, b.first);
  EXPECT_EQ(a.second.events, b.second.events);
}

TEST(MergeMode, StringRoundTrip) {
  EXPECT_EQ(aim::merge_mode_from_string(aim::to_string(MergeMode::temporal)), MergeMode::temporal);
  EXPECT_THROW(aim::merge_mode_from_string("diagonal"), aim::InvalidArgument);
}

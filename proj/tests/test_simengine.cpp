// Copyright (C) 2026 The aim Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include "aim/error.hpp"
#include "aim/simengine.hpp"
#include "test_support.hpp"

using aim::MergeConfig;
using aim::MergeMode;
using aim::PruneSchedule;
using aim::ToyModel;
using aim::ToyModelConfig;

namespace {

struct Fixture {
  ToyModel model{ToyModelConfig{6, 16, 4, 32, 77}};
  aim::TokenMatrix visual = aim::synthesize_tokens(1, 4, 12, 16, 0.6);
  aim::TokenMatrix text = aim::synthesize_tokens(2, 1, 5, 16, 0.0);
};

}  // namespace

TEST(ToyModel, SeedDeterminesWeights) {
  const ToyModel a(ToyModelConfig{2, 8, 2, 16, 3});
  const ToyModel b(ToyModelConfig{2, 8, 2, 16, 3});
  const ToyModel c(ToyModelConfig{2, 8, 2, 16, 4});
  EXPECT_EQ(a.layer(2).w_down, b.layer(2).w_down);
  EXPECT_NE(a.layer(1).wq, c.layer(1).wq);
  EXPECT_THROW(a.layer(3), aim::InvalidArgument);
  EXPECT_THROW(ToyModel(ToyModelConfig{2, 10, 4, 16, 0}), aim::InvalidArgument);
}

TEST(ToyModel, EmbedIsIdentityAtMatchingWidth) {
  const ToyModel m(ToyModelConfig{1, 8, 2, 16, 0});
  aim::Rng rng(1);
  const auto x = testing_support::random_matrix(rng, 3, 8);
  EXPECT_EQ(m.embed(x), x);
  EXPECT_EQ(m.embed(testing_support::random_matrix(rng, 3, 5)).cols(), 8u);
}

TEST(DecoderLayer, AttentionSnapshotIsCausalStochastic) {
  Fixture f;
  aim::Rng rng(9);
  const auto h = testing_support::random_matrix(rng, 11, 16);
  const auto out = aim::decoder_layer(h, f.model, 1);
  EXPECT_EQ(out.hidden.rows(), 11u);
  EXPECT_EQ(out.attention.layer_index, 1u);
  EXPECT_NO_THROW(out.attention.validate(1e-12));
  EXPECT_THROW(aim::decoder_layer(testing_support::random_matrix(rng, 3, 7), f.model, 1), aim::ShapeError);
}

TEST(DecoderLayer, CausalPrefixIsUnaffectedBySuffix) {
  Fixture f;
  aim::Rng rng(10);
  const auto h = testing_support::random_matrix(rng, 9, 16);
  const std::vector<std::size_t> prefix{0, 1, 2, 3};
  const auto full = aim::decoder_layer(h, f.model, 2).hidden;
  const auto part = aim::decoder_layer(h.select_rows(prefix), f.model, 2).hidden;
  EXPECT_EQ(full.select_rows(prefix), part);
}

TEST(Prefill, CountsFollowScheduleAndTextSurvives) {
  Fixture f;
  const MergeConfig merge{0.5, MergeMode::spatial};
  const auto r = aim::run_prefill(f.visual, f.text, f.model, merge, PruneSchedule{2, 5, 6, 0});
  EXPECT_EQ(r.input_visual_count, 48u);
  EXPECT_EQ(r.merged_visual_count, 24u);
  EXPECT_EQ(r.visual_counts(), aim::retained_counts({2, 5, 6, 24}));
  for (const auto& l : r.layers) EXPECT_EQ(l.text_ids, f.text.source_ids());
  EXPECT_EQ(r.schedule.base_visual_count, 24u);
  EXPECT_EQ(r.final_hidden.rows(), 5u);
}

TEST(Prefill, NoOpEqualsPlainForward) {
  Fixture f;
  const auto r = aim::run_prefill(f.visual, f.text, f.model, {1.0, MergeMode::spatial},
                                  PruneSchedule::disabled(6, 0));
  const auto flat = aim::concat_sequence(f.visual, f.text).flatten();
  EXPECT_EQ(r.final_hidden, aim::forward(f.model, f.model.embed(flat)));
}

TEST(Prefill, RetainedSetComesFromPreviousLayerAttention) {
  Fixture f;
  aim::PruneOptions opt;
  opt.keep_snapshots = true;
  const auto r = aim::run_prefill(f.visual, f.text, f.model, {1.0, MergeMode::spatial}, PruneSchedule{3, 6, 6, 0}, opt);
  ASSERT_EQ(r.snapshots.size(), 6u);
  for (std::size_t l = 4; l <= 6; ++l) {
    const auto& before = r.layers[l - 2];
    const auto& after = r.layers[l - 1];
    const auto scores = aim::importance_scores(r.snapshots[l - 2], opt.scoring);
    std::vector<double> visual_scores(scores.scores.begin(), scores.scores.begin() + before.visual_count);
    auto top = aim::top_k_indices(visual_scores, after.visual_count);
    std::sort(top.begin(), top.end());
    std::vector<aim::SourceId> expected;
    for (std::size_t i : top) expected.push_back(before.visual_ids[i]);
    EXPECT_EQ(after.visual_ids, expected) << "layer " << l;
  }
}

TEST(Prefill, StepAtFirstLayerDropsAllVisual) {
  Fixture f;
  const auto r = aim::run_prefill(f.visual, f.text, f.model, {0.5, MergeMode::temporal}, PruneSchedule{1, 1, 6, 0});
  for (const auto& l : r.layers) EXPECT_EQ(l.visual_count, 0u);
}

TEST(Prefill, PruneTextKeepsTotalBudget) {
  Fixture f;
  aim::PruneOptions opt;
  opt.prune_text = true;
  const auto r = aim::run_prefill(f.visual, f.text, f.model, {0.5, MergeMode::spatial}, PruneSchedule{2, 5, 6, 0}, opt);
  const auto target = aim::retained_counts({2, 5, 6, 24});
  for (std::size_t l = 0; l < 6; ++l) {
    const auto& rec = r.layers[l];
    EXPECT_LE(rec.visual_count + rec.text_count, target[l] + 5);
    EXPECT_LE(rec.text_count, 5u);
    if (l > 0) EXPECT_LE(rec.visual_count + rec.text_count, r.layers[l - 1].visual_count + r.layers[l - 1].text_count);
  }
  // The first reduction keeps exactly the scheduled visual budget plus the text length.
  EXPECT_EQ(r.layers[2].visual_count + r.layers[2].text_count, target[2] + 5);
}

TEST(Prefill, DeterministicAcrossRuns) {
  Fixture f;
  const auto a = aim::run_prefill(f.visual, f.text, f.model, {0.3, MergeMode::spatial}, PruneSchedule{2, 4, 6, 0});
  const auto b = aim::run_prefill(f.visual, f.text, f.model, {0.3, MergeMode::spatial}, PruneSchedule{2, 4, 6, 0});
  EXPECT_EQ(a.final_hidden, b.final_hidden);
  EXPECT_EQ(a.visual_counts(), b.visual_counts());
}

TEST(Prefill, LayerCountMismatchThrows) {
  Fixture f;
  EXPECT_THROW(aim::run_prefill(f.visual, f.text, f.model, {}, PruneSchedule{2, 4, 5, 0}), aim::InvalidArgument);
}

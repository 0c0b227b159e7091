// Copyright (C) 2026 The aim Authors
// SPDX-License-Identifier: Apache-2.0

// OpenMP kernels against the serial reference.

#include <benchmark/benchmark.h>

#include "aim/numerics.hpp"
#include "aim/random.hpp"
#include "aim/reference.hpp"

namespace {

aim::Matrix random_matrix(std::size_t r, std::size_t c, std::uint64_t seed) {
  aim::Rng rng(seed);
  aim::Matrix m(r, c);
  for (double& v : m.values()) v = rng.normal();
  return m;
}

void BM_Matmul(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto a = random_matrix(n, n, 1), b = random_matrix(n, n, 2);
  for (auto _ : state) benchmark::DoNotOptimize(aim::matmul(a, b));
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(2 * n * n * n));
}

void BM_MatmulReference(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto a = random_matrix(n, n, 1), b = random_matrix(n, n, 2);
  for (auto _ : state) benchmark::DoNotOptimize(aim::reference::matmul(a, b));
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(2 * n * n * n));
}

void BM_Softmax(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto s = random_matrix(n, n, 3);
  const auto mask = aim::Mask::causal(n);
  for (auto _ : state) benchmark::DoNotOptimize(aim::masked_softmax_rows(s, mask));
}

void BM_SoftmaxReference(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto s = random_matrix(n, n, 3);
  const auto mask = aim::Mask::causal(n);
  for (auto _ : state) benchmark::DoNotOptimize(aim::reference::masked_softmax_rows(s, mask));
}

// 196 tokens per frame split into A and B halves.
void BM_Cosine(benchmark::State& state) {
  const auto d = static_cast<std::size_t>(state.range(0));
  const auto a = random_matrix(98, d, 4), b = random_matrix(98, d, 5);
  for (auto _ : state) benchmark::DoNotOptimize(aim::cosine_similarity_matrix(a, b));
}

void BM_CosineReference(benchmark::State& state) {
  const auto d = static_cast<std::size_t>(state.range(0));
  const auto a = random_matrix(98, d, 4), b = random_matrix(98, d, 5);
  for (auto _ : state) benchmark::DoNotOptimize(aim::reference::cosine_similarity_matrix(a, b));
}

}  // namespace

BENCHMARK(BM_Matmul)->Arg(64)->Arg(256)->Arg(512);
BENCHMARK(BM_MatmulReference)->Arg(64)->Arg(256)->Arg(512);
BENCHMARK(BM_Softmax)->Arg(256)->Arg(1024);
BENCHMARK(BM_SoftmaxReference)->Arg(256)->Arg(1024);
BENCHMARK(BM_Cosine)->Arg(64)->Arg(1024);
BENCHMARK(BM_CosineReference)->Arg(64)->Arg(1024);

BENCHMARK_MAIN();

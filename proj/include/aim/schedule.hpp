// Copyright (C) 2026 The aim Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <vector>

namespace aim {

/// Piecewise-linear retention schedule over decoder layers 1..L:
///
///   r(l) = 1                          l < l1
///   r(l) = 1 - (l - l1) / (l2 - l1)   l1 <= l <= l2   (l1 < l2)
///   r(l) = 0                          l > l2
///
/// With l1 == l2 the schedule is a step: 1 before l1, 0 from l1 on, which
/// expresses "drop every visual token at layer k". l1 = L + 1 disables
/// pruning.
///
/// retained_counts()[l - 1] is the number of visual tokens that layer l
/// processes, ceil(N1 * r(l)).
struct PruneSchedule {
  std::size_t l1 = 1;
  std::size_t l2 = 1;
  std::size_t layers = 1;
  std::size_t base_visual_count = 0;

  static PruneSchedule disabled(std::size_t layers, std::size_t base_visual_count);

  bool pruning_enabled() const { return l1 <= layers; }
  void validate() const;
};

double retention_ratio(const PruneSchedule& schedule, std::size_t layer);

// Exact integer ceil(N1 * r(l)) for every layer; non-increasing.
std::vector<std::size_t> retained_counts(const PruneSchedule& schedule);

}  // namespace aim

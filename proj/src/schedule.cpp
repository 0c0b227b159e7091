// Copyright (C) 2026 The aim Authors
// SPDX-License-Identifier: Apache-2.0

#include "aim/schedule.hpp"

#include <string>

#include "aim/error.hpp"

namespace aim {

PruneSchedule PruneSchedule::disabled(std::size_t layers, std::size_t base_visual_count) {
  return PruneSchedule{layers + 1, layers + 1, layers, base_visual_count};
}

void PruneSchedule::validate() const {
  if (layers < 1) throw InvalidArgument("PruneSchedule: layers must be >= 1");
  if (!(1 <= l1 && l1 <= l2 && l2 <= layers + 1)) {
    throw InvalidArgument("PruneSchedule: need 1 <= l1 <= l2 <= L+1, got l1=" + std::to_string(l1) +
                          " l2=" + std::to_string(l2) + " L=" + std::to_string(layers));
  }
}

double retention_ratio(const PruneSchedule& s, std::size_t l) {
  s.validate();
  if (l < 1 || l > s.layers) {
    throw InvalidArgument("retention_ratio: layer " + std::to_string(l) + " outside [1, " +
                          std::to_string(s.layers) + "]");
  }
  if (l < s.l1) return 1.0;
  if (s.l1 == s.l2) return 0.0;
  if (l <= s.l2) {
    return 1.0 - static_cast<double>(l - s.l1) / static_cast<double>(s.l2 - s.l1);
  }
  return 0.0;
}

std::vector<std::size_t> retained_counts(const PruneSchedule& s) {
  s.validate();
  std::vector<std::size_t> counts(s.layers);
  const std::size_t n1 = s.base_visual_count;
  for (std::size_t l = 1; l <= s.layers; ++l) {
    std::size_t c;
    if (l < s.l1) {
      c = n1;
    } else if (s.l1 == s.l2 || l > s.l2) {
      c = 0;
    } else {
      // ceil(n1 * (l2 - l) / (l2 - l1)) in integers.
      const std::size_t span = s.l2 - s.l1;
      c = (n1 * (s.l2 - l) + span - 1) / span;
    }
    counts[l - 1] = c;
  }
  return counts;
}

}  // namespace aim

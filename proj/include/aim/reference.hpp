// Copyright (C) 2026 The aim Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Single-threaded reference versions of the OpenMP kernels in numerics.hpp.
// They follow the same per-element accumulation order, so the parallel
// kernels must match them bit for bit; tests and the benchmark rely on this.

#include <span>
#include <vector>

#include "aim/numerics.hpp"

namespace aim::reference {

Matrix matmul(const Matrix& a, const Matrix& b);
Matrix matmul_transposed(const Matrix& a, const Matrix& b);
Matrix masked_softmax_rows(const Matrix& scores, const Mask& mask);
Matrix cosine_similarity_matrix(const Matrix& a, const Matrix& b);
std::vector<double> matvec(const Matrix& a, std::span<const double> x);
std::vector<double> transposed_matvec(const Matrix& a, std::span<const double> x);

}  // namespace aim::reference

// Copyright (C) 2026 The aim Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace aim {

/// Dense row-major matrix of doubles. Every element is finite; constructors
/// and all exported kernels enforce this.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);

  static Matrix identity(std::size_t n);
  static Matrix from_rows(std::initializer_list<std::initializer_list<double>> rows);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }

  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }
  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }

  std::span<const double> values() const { return data_; }
  std::span<double> values() { return data_; }

  // Keeps the listed rows, in the given order.
  Matrix select_rows(std::span<const std::size_t> indices) const;

  std::string shape_string() const;

  // Throws NonFiniteError if any element is NaN or Inf.
  void check_finite(const char* context) const;

  bool operator==(const Matrix& other) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

/// Boolean matrix; true marks an entry that takes part in the computation.
class Mask {
 public:
  Mask() = default;
  Mask(std::size_t rows, std::size_t cols, bool fill = true);

  static Mask causal(std::size_t n);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  bool operator()(std::size_t r, std::size_t c) const { return bits_[r * cols_ + c] != 0; }
  void set(std::size_t r, std::size_t c, bool v) { bits_[r * cols_ + c] = v ? 1 : 0; }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<std::uint8_t> bits_;
};

// Row-parallel product. Each output element accumulates over k in increasing
// order, so the result is bitwise independent of the thread count.
Matrix matmul(const Matrix& a, const Matrix& b);

// a * b^T without materializing the transpose; same accumulation order rule.
Matrix matmul_transposed(const Matrix& a, const Matrix& b);

// Softmax over the unmasked entries of each row, with max subtraction.
// Masked entries come out as exactly 0. A row with no unmasked entry throws.
Matrix masked_softmax_rows(const Matrix& scores, const Mask& mask);

double dot(std::span<const double> u, std::span<const double> v);
double norm(std::span<const double> u);

// Clamped to [-1, 1]. Throws ZeroNormError if either vector has zero norm.
double cosine_similarity(std::span<const double> u, std::span<const double> v);

// Indices of the k largest values, ordered by descending value and then
// ascending index (lower index wins ties).
std::vector<std::size_t> top_k_indices(std::span<const double> values, std::size_t k);

}  // namespace aim

namespace aim {

// Pairwise cosine similarities between the rows of a and the rows of b.
// Throws ZeroNormError (without a token id) if any row has zero norm.
Matrix cosine_similarity_matrix(const Matrix& a, const Matrix& b);

// y = a x
std::vector<double> matvec(const Matrix& a, std::span<const double> x);

// y = a^T x, i.e. y_i = sum_j a(j, i) x_j, accumulated over j ascending.
std::vector<double> transposed_matvec(const Matrix& a, std::span<const double> x);

}  // namespace aim

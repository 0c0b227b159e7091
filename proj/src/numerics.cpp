// Copyright (C) 2026 The aim Authors
// SPDX-License-Identifier: Apache-2.0

#include "aim/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "aim/error.hpp"

namespace aim {

namespace {

std::string shape_of(std::size_t r, std::size_t c) {
  return "(" + std::to_string(r) + "x" + std::to_string(c) + ")";
}

}  // namespace

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {
  if (!std::isfinite(fill)) {
    throw NonFiniteError("Matrix: fill value must be finite");
  }
}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows * cols) {
    throw ShapeError("Matrix: data length " + std::to_string(data_.size()) +
                     " does not match shape " + shape_of(rows, cols));
  }
  check_finite("Matrix");
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix Matrix::from_rows(std::initializer_list<std::initializer_list<double>> rows) {
  const std::size_t r = rows.size();
  const std::size_t c = r == 0 ? 0 : rows.begin()->size();
  std::vector<double> data;
  data.reserve(r * c);
  for (const auto& row : rows) {
    if (row.size() != c) throw ShapeError("Matrix::from_rows: ragged rows");
    data.insert(data.end(), row.begin(), row.end());
  }
  return Matrix(r, c, std::move(data));
}

Matrix Matrix::select_rows(std::span<const std::size_t> indices) const {
  Matrix out(indices.size(), cols_);
  for (std::size_t i = 0; i < indices.size(); ++i) {
    if (indices[i] >= rows_) {
      throw InvalidArgument("Matrix::select_rows: index " + std::to_string(indices[i]) +
                            " out of range for " + shape_string());
    }
    std::copy_n(data_.begin() + static_cast<std::ptrdiff_t>(indices[i] * cols_), cols_,
                out.data_.begin() + static_cast<std::ptrdiff_t>(i * cols_));
  }
  return out;
}

std::string Matrix::shape_string() const { return shape_of(rows_, cols_); }

void Matrix::check_finite(const char* context) const {
  for (double v : data_) {
    if (!std::isfinite(v)) {
      throw NonFiniteError(std::string(context) + ": non-finite value in matrix " + shape_string());
    }
  }
}

Mask::Mask(std::size_t rows, std::size_t cols, bool fill)
    : rows_(rows), cols_(cols), bits_(rows * cols, fill ? 1 : 0) {}

Mask Mask::causal(std::size_t n) {
  Mask m(n, n, false);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j <= i; ++j) m.set(i, j, true);
  return m;
}

Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) {
    throw ShapeError("matmul: cannot multiply " + a.shape_string() + " by " + b.shape_string());
  }
  const std::size_t n = a.rows(), k = a.cols(), m = b.cols();
  Matrix c(n, m);
  const double* pa = a.values().data();
  const double* pb = b.values().data();
  double* pc = c.values().data();
  // i-p-j order: c(i,j) receives a(i,p)*b(p,j) for p = 0..k-1 in sequence.
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i) {
    double* crow = pc + i * m;
    for (std::size_t p = 0; p < k; ++p) {
      const double av = pa[i * k + p];
      const double* brow = pb + p * m;
      for (std::size_t j = 0; j < m; ++j) crow[j] += av * brow[j];
    }
  }
  c.check_finite("matmul");
  return c;
}

Matrix matmul_transposed(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.cols()) {
    throw ShapeError("matmul_transposed: cannot multiply " + a.shape_string() +
                     " by transpose of " + b.shape_string());
  }
  const std::size_t n = a.rows(), m = b.rows(), k = a.cols();
  Matrix c(n, m);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i) {
    const auto ar = a.row(static_cast<std::size_t>(i));
    for (std::size_t j = 0; j < m; ++j) {
      const auto br = b.row(j);
      double s = 0.0;
      for (std::size_t p = 0; p < k; ++p) s += ar[p] * br[p];
      c(static_cast<std::size_t>(i), j) = s;
    }
  }
  c.check_finite("matmul_transposed");
  return c;
}

Matrix masked_softmax_rows(const Matrix& scores, const Mask& mask) {
  if (scores.rows() != mask.rows() || scores.cols() != mask.cols()) {
    throw ShapeError("masked_softmax_rows: scores " + scores.shape_string() + " vs mask (" +
                     std::to_string(mask.rows()) + "x" + std::to_string(mask.cols()) + ")");
  }
  const std::size_t n = scores.rows(), m = scores.cols();
  for (std::size_t i = 0; i < n; ++i) {
    bool any = false;
    for (std::size_t j = 0; j < m && !any; ++j) any = mask(i, j);
    if (!any) {
      throw InvalidArgument("masked_softmax_rows: row " + std::to_string(i) +
                            " is fully masked; the distribution is undefined");
    }
  }
  Matrix out(n, m);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t si = 0; si < static_cast<std::ptrdiff_t>(n); ++si) {
    const auto i = static_cast<std::size_t>(si);
    double mx = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < m; ++j)
      if (mask(i, j)) mx = std::max(mx, scores(i, j));
    double sum = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      if (mask(i, j)) {
        const double e = std::exp(scores(i, j) - mx);
        out(i, j) = e;
        sum += e;
      }
    }
    for (std::size_t j = 0; j < m; ++j)
      if (mask(i, j)) out(i, j) /= sum;
  }
  return out;
}

double dot(std::span<const double> u, std::span<const double> v) {
  if (u.size() != v.size()) {
    throw ShapeError("dot: length " + std::to_string(u.size()) + " vs " + std::to_string(v.size()));
  }
  double s = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) s += u[i] * v[i];
  return s;
}

double norm(std::span<const double> u) { return std::sqrt(dot(u, u)); }

double cosine_similarity(std::span<const double> u, std::span<const double> v) {
  if (u.size() != v.size()) {
    throw ShapeError("cosine_similarity: length " + std::to_string(u.size()) + " vs " +
                     std::to_string(v.size()));
  }
  double nu = norm(u), nv = norm(v);
  if (nu == 0.0 || nv == 0.0) throw ZeroNormError();
  double c = dot(u, v) / (nu * nv);
  if (!std::isfinite(c)) {
    // Squared norms overflowed; redo the sums on inputs scaled by their max magnitude.
    double su = 0.0, sv = 0.0;
    for (double x : u) su = std::max(su, std::abs(x));
    for (double x : v) sv = std::max(sv, std::abs(x));
    double uv = 0.0, uu = 0.0, vv = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
      const double a = u[i] / su, b = v[i] / sv;
      uv += a * b;
      uu += a * a;
      vv += b * b;
    }
    c = uv / (std::sqrt(uu) * std::sqrt(vv));
  }
  return std::clamp(c, -1.0, 1.0);
}

std::vector<std::size_t> top_k_indices(std::span<const double> values, std::size_t k) {
  if (k > values.size()) {
    throw InvalidArgument("top_k_indices: k=" + std::to_string(k) + " exceeds length " +
                          std::to_string(values.size()));
  }
  for (double v : values) {
    if (!std::isfinite(v)) throw NonFiniteError("top_k_indices: non-finite value");
  }
  std::vector<std::size_t> idx(values.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  const auto before = [&](std::size_t a, std::size_t b) {
    if (values[a] != values[b]) return values[a] > values[b];
    return a < b;
  };
  std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(k), idx.end(), before);
  idx.resize(k);
  return idx;
}

}  // namespace aim

namespace aim {

Matrix cosine_similarity_matrix(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.cols()) {
    throw ShapeError("cosine_similarity_matrix: rows of " + a.shape_string() +
                     " and rows of " + b.shape_string() + " differ in length");
  }
  std::vector<double> na(a.rows()), nb(b.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    na[i] = norm(a.row(i));
    if (na[i] == 0.0) throw ZeroNormError();
  }
  for (std::size_t j = 0; j < b.rows(); ++j) {
    nb[j] = norm(b.row(j));
    if (nb[j] == 0.0) throw ZeroNormError();
  }
  Matrix s(a.rows(), b.rows());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t si = 0; si < static_cast<std::ptrdiff_t>(a.rows()); ++si) {
    const auto i = static_cast<std::size_t>(si);
    const auto ar = a.row(i);
    for (std::size_t j = 0; j < b.rows(); ++j) {
      const auto br = b.row(j);
      double d = 0.0;
      for (std::size_t p = 0; p < ar.size(); ++p) d += ar[p] * br[p];
      s(i, j) = std::clamp(d / (na[i] * nb[j]), -1.0, 1.0);
    }
  }
  return s;
}

std::vector<double> matvec(const Matrix& a, std::span<const double> x) {
  if (a.cols() != x.size()) {
    throw ShapeError("matvec: " + a.shape_string() + " times vector of length " +
                     std::to_string(x.size()));
  }
  std::vector<double> y(a.rows(), 0.0);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t si = 0; si < static_cast<std::ptrdiff_t>(a.rows()); ++si) {
    const auto i = static_cast<std::size_t>(si);
    const auto ar = a.row(i);
    double s = 0.0;
    for (std::size_t j = 0; j < ar.size(); ++j) s += ar[j] * x[j];
    y[i] = s;
  }
  return y;
}

std::vector<double> transposed_matvec(const Matrix& a, std::span<const double> x) {
  if (a.rows() != x.size()) {
    throw ShapeError("transposed_matvec: transpose of " + a.shape_string() +
                     " times vector of length " + std::to_string(x.size()));
  }
  const std::size_t n = a.rows(), m = a.cols();
  std::vector<double> y(m, 0.0);
  const double* pa = a.values().data();
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t si = 0; si < static_cast<std::ptrdiff_t>(m); ++si) {
    const auto i = static_cast<std::size_t>(si);
    double s = 0.0;
    for (std::size_t j = 0; j < n; ++j) s += pa[j * m + i] * x[j];
    y[i] = s;
  }
  return y;
}

}  // namespace aim

// Copyright (C) 2026 The aim Authors
// SPDX-License-Identifier: Apache-2.0

#include "aim/reference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "aim/error.hpp"

namespace aim::reference {

Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) {
    throw ShapeError("matmul: cannot multiply " + a.shape_string() + " by " + b.shape_string());
  }
  Matrix c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < b.cols(); ++j) {
      double s = 0.0;
      for (std::size_t p = 0; p < a.cols(); ++p) s += a(i, p) * b(p, j);
      c(i, j) = s;
    }
  }
  c.check_finite("reference::matmul");
  return c;
}

Matrix matmul_transposed(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.cols()) {
    throw ShapeError("matmul_transposed: " + a.shape_string() + " vs " + b.shape_string());
  }
  Matrix c(a.rows(), b.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < b.rows(); ++j) {
      double s = 0.0;
      for (std::size_t p = 0; p < a.cols(); ++p) s += a(i, p) * b(j, p);
      c(i, j) = s;
    }
  }
  c.check_finite("reference::matmul_transposed");
  return c;
}

Matrix masked_softmax_rows(const Matrix& scores, const Mask& mask) {
  if (scores.rows() != mask.rows() || scores.cols() != mask.cols()) {
    throw ShapeError("masked_softmax_rows: shape mismatch");
  }
  Matrix out(scores.rows(), scores.cols());
  for (std::size_t i = 0; i < scores.rows(); ++i) {
    double mx = -std::numeric_limits<double>::infinity();
    bool any = false;
    for (std::size_t j = 0; j < scores.cols(); ++j) {
      if (!mask(i, j)) continue;
      any = true;
      mx = std::max(mx, scores(i, j));
    }
    if (!any) throw InvalidArgument("masked_softmax_rows: fully masked row");
    double sum = 0.0;
    for (std::size_t j = 0; j < scores.cols(); ++j) {
      if (!mask(i, j)) continue;
      out(i, j) = std::exp(scores(i, j) - mx);
      sum += out(i, j);
    }
    for (std::size_t j = 0; j < scores.cols(); ++j)
      if (mask(i, j)) out(i, j) /= sum;
  }
  return out;
}

Matrix cosine_similarity_matrix(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.cols()) throw ShapeError("cosine_similarity_matrix: width mismatch");
  Matrix s(a.rows(), b.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < b.rows(); ++j) {
      double d = 0.0, uu = 0.0, vv = 0.0;
      for (std::size_t p = 0; p < a.cols(); ++p) {
        d += a(i, p) * b(j, p);
      }
      for (std::size_t p = 0; p < a.cols(); ++p) uu += a(i, p) * a(i, p);
      for (std::size_t p = 0; p < a.cols(); ++p) vv += b(j, p) * b(j, p);
      if (uu == 0.0 || vv == 0.0) throw ZeroNormError();
      s(i, j) = std::clamp(d / (std::sqrt(uu) * std::sqrt(vv)), -1.0, 1.0);
    }
  }
  return s;
}

std::vector<double> matvec(const Matrix& a, std::span<const double> x) {
  if (a.cols() != x.size()) throw ShapeError("matvec: shape mismatch");
  std::vector<double> y(a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < a.cols(); ++j) s += a(i, j) * x[j];
    y[i] = s;
  }
  return y;
}

std::vector<double> transposed_matvec(const Matrix& a, std::span<const double> x) {
  if (a.rows() != x.size()) throw ShapeError("transposed_matvec: shape mismatch");
  std::vector<double> y(a.cols());
  for (std::size_t i = 0; i < a.cols(); ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < a.rows(); ++j) s += a(j, i) * x[j];
    y[i] = s;
  }
  return y;
}

}  // namespace aim::reference

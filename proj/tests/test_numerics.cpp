// Copyright (C) 2026 The aim Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "aim/error.hpp"
#include "aim/numerics.hpp"

using aim::Mask;
using aim::Matrix;

TEST(Matrix, ShapeAndAccess) {
  Matrix m(2, 3, 1.5);
  EXPECT_EQ(m.rows(), 2u);
  EXPECT_EQ(m.cols(), 3u);
  EXPECT_EQ(m(1, 2), 1.5);
  m(0, 1) = 4.0;
  EXPECT_EQ(m.row(0)[1], 4.0);
  EXPECT_EQ(m.shape_string(), "(2x3)");
}

TEST(Matrix, DataSizeMismatchThrows) {
  EXPECT_THROW(Matrix(2, 2, std::vector<double>{1, 2, 3}), aim::ShapeError);
  EXPECT_THROW(Matrix::from_rows({{1, 2}, {3}}), aim::ShapeError);
}

TEST(Matrix, SelectRowsKeepsOrder) {
  const Matrix m = Matrix::from_rows({{1, 1}, {2, 2}, {3, 3}});
  const std::vector<std::size_t> idx{0, 2};
  EXPECT_EQ(m.select_rows(idx), Matrix::from_rows({{1, 1}, {3, 3}}));
}

TEST(Matrix, CheckFiniteNamesContext) {
  Matrix m(1, 2);
  m(0, 1) = std::numeric_limits<double>::quiet_NaN();
  try {
    m.check_finite("probe");
    FAIL() << "expected NonFiniteError";
  } catch (const aim::NonFiniteError& e) {
    EXPECT_NE(std::string(e.what()).find("probe"), std::string::npos);
  }
}

TEST(Matmul, HandExample) {
  const Matrix a = Matrix::from_rows({{1, 2}, {3, 4}});
  const Matrix b = Matrix::from_rows({{5, 6}, {7, 8}});
  EXPECT_EQ(aim::matmul(a, b), Matrix::from_rows({{19, 22}, {43, 50}}));
  EXPECT_EQ(aim::matmul_transposed(a, b), Matrix::from_rows({{17, 23}, {39, 53}}));
}

TEST(Matmul, InnerDimensionMismatchThrows) {
  EXPECT_THROW(aim::matmul(Matrix(2, 3), Matrix(2, 3)), aim::ShapeError);
  EXPECT_THROW(aim::matmul_transposed(Matrix(2, 3), Matrix(2, 2)), aim::ShapeError);
}

TEST(Matmul, IdentityIsNeutral) {
  const Matrix a = Matrix::from_rows({{1.25, -2}, {0.5, 3}, {7, 8}});
  EXPECT_EQ(aim::matmul(a, Matrix::identity(2)), a);
}

TEST(MaskedSoftmax, CausalHandOracle) {
  // Row 0 sees only itself; row 1 sees scores (0, ln 3) -> (1/4, 3/4).
  const Matrix s = Matrix::from_rows({{5, 100}, {0, std::log(3.0)}});
  const Matrix p = aim::masked_softmax_rows(s, Mask::causal(2));
  EXPECT_DOUBLE_EQ(p(0, 0), 1.0);
  EXPECT_EQ(p(0, 1), 0.0);
  EXPECT_NEAR(p(1, 0), 0.25, 1e-15);
  EXPECT_NEAR(p(1, 1), 0.75, 1e-15);
}

TEST(MaskedSoftmax, LargeScoresStayFinite) {
  const Matrix s = Matrix::from_rows({{1000, 1000, 999}});
  const Matrix p = aim::masked_softmax_rows(s, Mask(1, 3));
  const double e = std::exp(-1.0);
  EXPECT_NEAR(p(0, 0), 1.0 / (2.0 + e), 1e-15);
  EXPECT_NEAR(p(0, 2), e / (2.0 + e), 1e-15);
}

TEST(MaskedSoftmax, FullyMaskedRowThrows) {
  Mask m(2, 2);
  m.set(1, 0, false);
  m.set(1, 1, false);
  EXPECT_THROW(aim::masked_softmax_rows(Matrix(2, 2), m), aim::InvalidArgument);
}

TEST(MaskedSoftmax, ShapeMismatchThrows) {
  EXPECT_THROW(aim::masked_softmax_rows(Matrix(2, 2), Mask(2, 3)), aim::ShapeError);
}

TEST(Cosine, KnownValuesAndClamp) {
  const std::vector<double> x{1, 0}, y{0.8, 0.6}, z{-2, 0};
  EXPECT_NEAR(aim::cosine_similarity(x, y), 0.8, 1e-15);
  EXPECT_EQ(aim::cosine_similarity(x, z), -1.0);
  const std::vector<double> big{1e154, 1e154};
  EXPECT_LE(aim::cosine_similarity(big, big), 1.0);
}

TEST(Cosine, ZeroNormThrows) {
  const std::vector<double> x{1, 0}, zero{0, 0};
  EXPECT_THROW(aim::cosine_similarity(x, zero), aim::ZeroNormError);
  EXPECT_THROW(aim::cosine_similarity_matrix(Matrix::from_rows({{1, 0}}), Matrix::from_rows({{0, 0}})),
               aim::ZeroNormError);
}

TEST(TopK, OrdersByValueThenIndex) {
  const std::vector<double> v{0.4, 0.1, 0.4, 0.3};
  EXPECT_EQ(aim::top_k_indices(v, 3), (std::vector<std::size_t>{0, 2, 3}));
  EXPECT_EQ(aim::top_k_indices(v, 0), std::vector<std::size_t>{});
}

TEST(TopK, RejectsBadInput) {
  const std::vector<double> v{1, 2};
  EXPECT_THROW(aim::top_k_indices(v, 3), aim::InvalidArgument);
  const std::vector<double> nan{1, std::numeric_limits<double>::quiet_NaN()};
  EXPECT_THROW(aim::top_k_indices(nan, 1), aim::NonFiniteError);
}

TEST(Matvec, BothOrientations) {
  const Matrix a = Matrix::from_rows({{1, 2}, {3, 4}});
  const std::vector<double> x{1, 10};
  EXPECT_EQ(aim::matvec(a, x), (std::vector<double>{21, 43}));
  EXPECT_EQ(aim::transposed_matvec(a, x), (std::vector<double>{31, 42}));
}

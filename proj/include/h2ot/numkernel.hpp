// Copyright 2026 The H2OT Engine Authors
// SPDX-License-Identifier: Apache-2.0

// Dense row-major kernels shared by every other module. All functions are
// pure and allocate their results.

#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <vector>

#include "h2ot/tensor.hpp"

namespace h2ot {

class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);

  static Matrix from_rows(std::initializer_list<std::initializer_list<double>> rows);
  static Matrix identity(std::size_t n);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return data_.size(); }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

  std::span<double> data() noexcept { return data_; }
  std::span<const double> data() const noexcept { return data_; }

  bool all_finite() const;

  bool operator==(const Matrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

/// xoshiro256** seeded through splitmix64. Equal seeds give equal streams on
/// every platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t next_u64();
  /// Uniform in [0, 1) with 53 bits of resolution.
  double next_double();
  double uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }
  /// Uniform integer in [lo, hi].
  std::size_t uniform_index(std::size_t lo, std::size_t hi);

 private:
  std::uint64_t seed_;
  std::array<std::uint64_t, 4> state_;
};

/// a * b. Throws ShapeError when a.cols() != b.rows().
Matrix matmul(const Matrix& a, const Matrix& b);

/// a * b^T. Throws ShapeError when a.cols() != b.cols().
Matrix matmul_transposed(const Matrix& a, const Matrix& b);

/// Adds `bias` to every row in place.
void add_row_bias(Matrix& m, std::span<const double> bias);

/// Row-wise softmax with row-max subtraction.
Matrix softmax_rows(const Matrix& m);

/// Symmetric N x N matrix of squared Euclidean distances between rows.
Matrix pairwise_sq_dist(const Matrix& m);

/// N x C matrix whose row n is the mean of the J joint tokens of frame n.
Matrix mean_pool_spatial(const PoseTokens& tokens);

inline constexpr double kLayerNormEpsilon = 1e-5;

/// Normalizes `v` to zero mean and unit population variance, then applies
/// `gain` and `bias` elementwise.
std::vector<double> layer_norm(std::span<const double> v, std::span<const double> gain,
                               std::span<const double> bias);

/// layer_norm applied to every row of `m`.
Matrix layer_norm_rows(const Matrix& m, std::span<const double> gain,
                       std::span<const double> bias);

}  // namespace h2ot

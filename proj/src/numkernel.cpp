// Copyright 2026 The H2OT Engine Authors
// SPDX-License-Identifier: Apache-2.0

#include "h2ot/numkernel.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace h2ot {

namespace {

std::string dims(std::size_t r, std::size_t c) {
  return std::to_string(r) + "x" + std::to_string(c);
}

std::uint64_t splitmix64(std::uint64_t& x) {
  std::uint64_t z = (x += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

}  // namespace

PoseTokens PoseTokens::gather(std::span<const std::size_t> indices) const {
  PoseTokens out(indices.size(), joints_, dim_);
  const std::size_t stride = joints_ * dim_;
  for (std::size_t i = 0; i < indices.size(); ++i) {
    if (indices[i] >= frames_) {
      throw ShapeError("gather index " + std::to_string(indices[i]) + " out of range for " +
                       std::to_string(frames_) + " frames");
    }
    std::copy_n(data_.begin() + static_cast<std::ptrdiff_t>(indices[i] * stride), stride,
                out.data_.begin() + static_cast<std::ptrdiff_t>(i * stride));
  }
  return out;
}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows_ * cols_) {
    throw ShapeError("matrix " + dims(rows_, cols_) + " given " + std::to_string(data_.size()) +
                     " values");
  }
}

Matrix Matrix::from_rows(std::initializer_list<std::initializer_list<double>> rows) {
  const std::size_t r = rows.size();
  const std::size_t c = r == 0 ? 0 : rows.begin()->size();
  std::vector<double> data;
  data.reserve(r * c);
  for (const auto& row : rows) {
    if (row.size() != c) throw ShapeError("ragged matrix literal");
    data.insert(data.end(), row.begin(), row.end());
  }
  return Matrix(r, c, std::move(data));
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

bool Matrix::all_finite() const {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

Rng::Rng(std::uint64_t seed) : seed_(seed) {
  std::uint64_t x = seed;
  for (auto& s : state_) s = splitmix64(x);
}

std::uint64_t Rng::next_u64() {
  const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
  const std::uint64_t t = state_[1] << 17;
  state_[2] ^= state_[0];
  state_[3] ^= state_[1];
  state_[1] ^= state_[2];
  state_[0] ^= state_[3];
  state_[2] ^= t;
  state_[3] = rotl(state_[3], 45);
  return result;
}

double Rng::next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

std::size_t Rng::uniform_index(std::size_t lo, std::size_t hi) {
  const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
  if (span == 0) return lo + static_cast<std::size_t>(next_u64());
  // Rejection sampling keeps the draw unbiased.
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % span;
  std::uint64_t v;
  do {
    v = next_u64();
  } while (v >= limit);
  return lo + static_cast<std::size_t>(v % span);
}

Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) {
    throw ShapeError("matmul " + dims(a.rows(), a.cols()) + " * " + dims(b.rows(), b.cols()));
  }
  const std::size_t n = a.rows(), k = a.cols(), m = b.cols();
  Matrix out(n, m);
  const double* pa = a.data().data();
  const double* pb = b.data().data();
  double* po = out.data().data();
  for (std::size_t i = 0; i < n; ++i) {
    double* orow = po + i * m;
    for (std::size_t p = 0; p < k; ++p) {
      const double s = pa[i * k + p];
      const double* brow = pb + p * m;
      for (std::size_t j = 0; j < m; ++j) orow[j] += s * brow[j];
    }
  }
  return out;
}

Matrix matmul_transposed(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.cols()) {
    throw ShapeError("matmul_transposed " + dims(a.rows(), a.cols()) + " * (" +
                     dims(b.rows(), b.cols()) + ")^T");
  }
  const std::size_t n = a.rows(), m = b.rows(), k = a.cols();
  Matrix out(n, m);
  for (std::size_t i = 0; i < n; ++i) {
    const auto ar = a.row(i);
    for (std::size_t j = 0; j < m; ++j) {
      const auto br = b.row(j);
      double s = 0.0;
      for (std::size_t p = 0; p < k; ++p) s += ar[p] * br[p];
      out(i, j) = s;
    }
  }
  return out;
}

void add_row_bias(Matrix& m, std::span<const double> bias) {
  if (bias.size() != m.cols()) {
    throw ShapeError("bias of length " + std::to_string(bias.size()) + " for " +
                     dims(m.rows(), m.cols()) + " matrix");
  }
  for (std::size_t r = 0; r < m.rows(); ++r) {
    auto row = m.row(r);
    for (std::size_t c = 0; c < row.size(); ++c) row[c] += bias[c];
  }
}

Matrix softmax_rows(const Matrix& m) {
  Matrix out(m.rows(), m.cols());
  for (std::size_t r = 0; r < m.rows(); ++r) {
    const auto in = m.row(r);
    auto dst = out.row(r);
    if (in.empty()) continue;
    const double mx = *std::max_element(in.begin(), in.end());
    double sum = 0.0;
    for (std::size_t c = 0; c < in.size(); ++c) {
      dst[c] = std::exp(in[c] - mx);
      sum += dst[c];
    }
    for (double& v : dst) v /= sum;
  }
  return out;
}

Matrix pairwise_sq_dist(const Matrix& m) {
  const std::size_t n = m.rows();
  Matrix out(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto ri = m.row(i);
    for (std::size_t j = i + 1; j < n; ++j) {
      const auto rj = m.row(j);
      double s = 0.0;
      for (std::size_t c = 0; c < ri.size(); ++c) {
        const double d = ri[c] - rj[c];
        s += d * d;
      }
      out(i, j) = s;
      out(j, i) = s;
    }
  }
  return out;
}

Matrix mean_pool_spatial(const PoseTokens& tokens) {
  const std::size_t n = tokens.frames(), joints = tokens.joints(), c = tokens.dim();
  if (n == 0 || joints == 0) throw ShapeError("mean_pool_spatial on empty tokens");
  Matrix out(n, c);
  for (std::size_t f = 0; f < n; ++f) {
    auto dst = out.row(f);
    for (std::size_t j = 0; j < joints; ++j) {
      const auto t = tokens.token(f, j);
      for (std::size_t k = 0; k < c; ++k) dst[k] += t[k];
    }
    for (double& v : dst) v /= static_cast<double>(joints);
  }
  return out;
}

namespace {

void layer_norm_into(std::span<const double> v, std::span<const double> gain,
                     std::span<const double> bias, std::span<double> out) {
  const double n = static_cast<double>(v.size());
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= n;
  double var = 0.0;
  for (double x : v) var += (x - mean) * (x - mean);
  var /= n;
  const double inv = 1.0 / std::sqrt(var + kLayerNormEpsilon);
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = (v[i] - mean) * inv * gain[i] + bias[i];
}

void check_norm_shapes(std::size_t n, std::span<const double> gain, std::span<const double> bias) {
  if (gain.size() != n || bias.size() != n) {
    throw ShapeError("layer_norm over " + std::to_string(n) + " values with gain " +
                     std::to_string(gain.size()) + " and bias " + std::to_string(bias.size()));
  }
}

}  // namespace

std::vector<double> layer_norm(std::span<const double> v, std::span<const double> gain,
                               std::span<const double> bias) {
  check_norm_shapes(v.size(), gain, bias);
  std::vector<double> out(v.size());
  if (!v.empty()) layer_norm_into(v, gain, bias, out);
  return out;
}

Matrix layer_norm_rows(const Matrix& m, std::span<const double> gain,
                       std::span<const double> bias) {
  check_norm_shapes(m.cols(), gain, bias);
  Matrix out(m.rows(), m.cols());
  if (m.cols() == 0) return out;
  for (std::size_t r = 0; r < m.rows(); ++r) layer_norm_into(m.row(r), gain, bias, out.row(r));
  return out;
}

}  // namespace h2ot

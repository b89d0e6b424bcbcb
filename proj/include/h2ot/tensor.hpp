// Copyright 2026 The H2OT Engine Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "h2ot/errors.hpp"

namespace h2ot {

/// Frame-major pose array: `frames` x `joints` x `Dims` coordinates.
///
/// `PoseSequence2D` holds detected keypoints in normalized image units,
/// `Pose3DSequence` holds lifted joints (millimeters when data are metric).
template <std::size_t Dims>
class PoseArray {
 public:
  static constexpr std::size_t kDims = Dims;

  PoseArray() = default;
  PoseArray(std::size_t frames, std::size_t joints)
      : frames_(frames), joints_(joints), data_(frames * joints * Dims, 0.0) {}
  PoseArray(std::size_t frames, std::size_t joints, std::vector<double> data)
      : frames_(frames), joints_(joints), data_(std::move(data)) {
    if (data_.size() != frames_ * joints_ * Dims) {
      throw ShapeError("pose array payload has " + std::to_string(data_.size()) +
                       " values, expected " + std::to_string(frames_ * joints_ * Dims));
    }
  }

  std::size_t frames() const noexcept { return frames_; }
  std::size_t joints() const noexcept { return joints_; }
  static constexpr std::size_t dims() noexcept { return Dims; }

  double& at(std::size_t f, std::size_t j, std::size_t d) {
    return data_[(f * joints_ + j) * Dims + d];
  }
  double at(std::size_t f, std::size_t j, std::size_t d) const {
    return data_[(f * joints_ + j) * Dims + d];
  }

  /// All joints of one frame, flattened to `joints * Dims` values.
  std::span<double> frame(std::size_t f) {
    return {data_.data() + f * joints_ * Dims, joints_ * Dims};
  }
  std::span<const double> frame(std::size_t f) const {
    return {data_.data() + f * joints_ * Dims, joints_ * Dims};
  }

  std::span<double> data() noexcept { return data_; }
  std::span<const double> data() const noexcept { return data_; }

  bool all_finite() const {
    for (double v : data_) {
      if (!std::isfinite(v)) return false;
    }
    return true;
  }

  bool operator==(const PoseArray&) const = default;

 private:
  std::size_t frames_ = 0;
  std::size_t joints_ = 0;
  std::vector<double> data_;
};

using PoseSequence2D = PoseArray<2>;
using Pose3DSequence = PoseArray<3>;

/// Embedded token tensor of shape N x J x C, one token per (frame, joint).
class PoseTokens {
 public:
  PoseTokens() = default;
  PoseTokens(std::size_t frames, std::size_t joints, std::size_t dim)
      : frames_(frames), joints_(joints), dim_(dim), data_(frames * joints * dim, 0.0) {}

  std::size_t frames() const noexcept { return frames_; }
  std::size_t joints() const noexcept { return joints_; }
  std::size_t dim() const noexcept { return dim_; }

  std::span<double> token(std::size_t n, std::size_t j) {
    return {data_.data() + (n * joints_ + j) * dim_, dim_};
  }
  std::span<const double> token(std::size_t n, std::size_t j) const {
    return {data_.data() + (n * joints_ + j) * dim_, dim_};
  }

  double& at(std::size_t n, std::size_t j, std::size_t c) {
    return data_[(n * joints_ + j) * dim_ + c];
  }
  double at(std::size_t n, std::size_t j, std::size_t c) const {
    return data_[(n * joints_ + j) * dim_ + c];
  }

  std::span<double> data() noexcept { return data_; }
  std::span<const double> data() const noexcept { return data_; }

  /// Keeps only the frames listed in `indices`, in the given order.
  PoseTokens gather(std::span<const std::size_t> indices) const;

  bool all_finite() const {
    for (double v : data_) {
      if (!std::isfinite(v)) return false;
    }
    return true;
  }

  bool operator==(const PoseTokens&) const = default;

 private:
  std::size_t frames_ = 0;
  std::size_t joints_ = 0;
  std::size_t dim_ = 0;
  std::vector<double> data_;
};

}  // namespace h2ot

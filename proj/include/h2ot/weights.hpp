// Copyright 2026 The H2OT Engine Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "h2ot/numkernel.hpp"

namespace h2ot {

/// Architecture hyperparameters of the generic video pose transformer.
struct ModelConfig {
  std::size_t frames = 1;     // F
  std::size_t joints = 17;    // J
  std::size_t blocks = 1;     // L
  std::size_t dim = 64;       // C
  std::size_t heads = 8;      // H
  std::size_t ffn_ratio = 2;
  std::size_t knn_k = 2;      // neighbors for cluster pruning

  /// Throws ConfigError naming the first violated invariant.
  void validate() const;
  std::size_t head_dim() const { return dim / heads; }

  bool operator==(const ModelConfig&) const = default;
};

/// y = x * weight + bias, with weight stored in x out layout.
struct Linear {
  Matrix weight;
  std::vector<double> bias;

  Linear() = default;
  Linear(std::size_t in, std::size_t out) : weight(in, out), bias(out, 0.0) {}

  Matrix apply(const Matrix& x) const;
  std::size_t in_features() const { return weight.rows(); }
  std::size_t out_features() const { return weight.cols(); }
};

struct LayerNormParams {
  std::vector<double> gain;
  std::vector<double> bias;

  LayerNormParams() = default;
  explicit LayerNormParams(std::size_t n) : gain(n, 1.0), bias(n, 0.0) {}

  Matrix apply(const Matrix& x) const { return layer_norm_rows(x, gain, bias); }
};

struct AttentionWeights {
  Linear query;
  Linear key;
  Linear value;
  Linear output;

  AttentionWeights() = default;
  explicit AttentionWeights(std::size_t dim)
      : query(dim, dim), key(dim, dim), value(dim, dim), output(dim, dim) {}
};

/// Pre-norm attention sub-layer followed by a pre-norm feed-forward sub-layer.
struct TransformerUnit {
  LayerNormParams norm_attn;
  AttentionWeights attn;
  LayerNormParams norm_ffn;
  Linear fc1;
  Linear fc2;

  TransformerUnit() = default;
  TransformerUnit(std::size_t dim, std::size_t ffn_ratio)
      : norm_attn(dim),
        attn(dim),
        norm_ffn(dim),
        fc1(dim, dim * ffn_ratio),
        fc2(dim * ffn_ratio, dim) {}
};

/// One spatio-temporal block: spatial unit (over joints) then temporal unit
/// (over frames).
struct BlockWeights {
  TransformerUnit spatial;
  TransformerUnit temporal;
};

/// Cross-attention recovery: F x C learnable queries plus one attention layer.
struct TraWeights {
  Matrix queries;
  AttentionWeights attn;

  TraWeights() = default;
  TraWeights(std::size_t frames, std::size_t dim) : queries(frames, dim), attn(dim) {}
};

/// Mutable view of one named parameter tensor.
struct TensorRef {
  std::string name;
  std::vector<std::size_t> dims;
  std::span<double> values;
};

/// Read-only view of one named parameter tensor.
struct ConstTensorRef {
  std::string name;
  std::vector<std::size_t> dims;
  std::span<const double> values;
};

/// Reserved name prefix of the recovery-attention tensors in weight files.
inline constexpr std::string_view kTraPrefix = "tra.";

struct ModelWeights {
  ModelConfig config;
  Linear embed;           // 2 -> C
  Matrix spatial_pos;     // J x C, added per joint
  Matrix temporal_pos;    // F x C, added per original frame index
  std::vector<BlockWeights> blocks;
  Linear head;            // C -> 3
  std::optional<TraWeights> tra;

  ModelWeights() = default;
  /// Zero-filled weights shaped by `cfg`; layer-norm gains are one.
  explicit ModelWeights(const ModelConfig& cfg, bool with_tra = false);

  /// Every parameter tensor in a fixed canonical order.
  std::vector<TensorRef> tensors();
  std::vector<ConstTensorRef> tensors() const;

  /// Parameter count obtained by enumerating tensors.
  std::size_t parameter_count() const;

  bool operator==(const ModelWeights& other) const;
};

/// Closed-form parameter count of the backbone (embedding, position tables,
/// blocks, head), excluding recovery attention.
std::size_t analytic_parameter_count(const ModelConfig& cfg);

/// Closed-form parameter count added by recovery attention: F*C + 4*(C^2 + C).
std::size_t analytic_tra_parameter_count(const ModelConfig& cfg);

/// Contribution of the temporal position table (F*C) to the backbone count.
inline std::size_t temporal_position_parameter_count(const ModelConfig& cfg) {
  return cfg.frames * cfg.dim;
}

}  // namespace h2ot

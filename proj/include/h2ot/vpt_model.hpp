// Copyright 2026 The H2OT Engine Authors
// SPDX-License-Identifier: Apache-2.0

// Generic video pose transformer: pose embedding, spatio-temporal blocks and a
// per-token regression head.
//
// Block layout (pre-norm, residual):
//   spatial unit   for every frame, attention over the J joint tokens, then FFN
//   temporal unit  for every joint, attention over the N frame tokens, then FFN
// FFN is Linear(C, ffn_ratio*C) -> GELU -> Linear(ffn_ratio*C, C).

#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "h2ot/numkernel.hpp"
#include "h2ot/tensor.hpp"
#include "h2ot/weights.hpp"

namespace h2ot {

/// Multi-head scaled dot-product attention of `queries_in` over `kv_in`.
/// When `mean_probs` is non-null the head-averaged attention matrix
/// (queries x keys) is added to it.
Matrix multi_head_attention(const AttentionWeights& w, const Matrix& queries_in,
                            const Matrix& kv_in, std::size_t heads,
                            Matrix* mean_probs = nullptr);

/// Per-head pre-softmax logits QK^T / sqrt(d).
std::vector<Matrix> attention_logits(const AttentionWeights& w, const Matrix& queries_in,
                                     const Matrix& kv_in, std::size_t heads);

PoseTokens embed_poses(const PoseSequence2D& poses, const ModelWeights& w);

struct BlockOutput {
  PoseTokens tokens;
  /// N x N temporal attention averaged over heads and joints.
  Matrix temporal_attention;
};

/// Runs block `index` of `w`. Throws NumericError carrying `index` when any
/// output value is non-finite.
BlockOutput transformer_block(const PoseTokens& x, const ModelWeights& w, std::size_t index);

/// Temporal-attention logits of block `index` evaluated on its input tokens,
/// one matrix per (joint, head), joint-major.
std::vector<Matrix> temporal_attention_logits(const PoseTokens& x, const ModelWeights& w,
                                              std::size_t index);

/// Softmax of every logit matrix after adding `shift`, averaged.
Matrix average_attention(const std::vector<Matrix>& logits, double shift = 0.0);

Pose3DSequence regression_head(const PoseTokens& x, const ModelWeights& w);

/// Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) for projection matrices,
/// Uniform(-0.1, 0.1) for position tables, zero biases, unit norm gains.
/// Recovery queries stay exactly zero.
ModelWeights init_weights(const ModelConfig& cfg, Rng& rng, bool with_tra = false);

/// Writes the portable weight container (see docs/formats.md).
void save_weights(const ModelWeights& w, std::ostream& out);
void save_weights(const ModelWeights& w, const std::string& path);
ModelWeights load_weights(std::istream& in);
ModelWeights load_weights(const std::string& path);

}  // namespace h2ot

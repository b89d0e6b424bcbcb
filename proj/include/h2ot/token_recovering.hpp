// Copyright 2026 The H2OT Engine Authors
// SPDX-License-Identifier: Apache-2.0

// Restoring full temporal length after pruning: cross-attention over the kept
// tokens (token level) or linear interpolation of the regressed poses.

#pragma once

#include <cstddef>
#include <span>

#include "h2ot/tensor.hpp"
#include "h2ot/weights.hpp"

namespace h2ot {

/// For every joint j: out^j = Q + MCA(Q, last^j, last^j), with Q the F x C
/// learnable queries. Output has `w.queries.rows()` frames.
PoseTokens tra_recover(const PoseTokens& last, const TraWeights& w, std::size_t heads);

/// Piecewise-linear reconstruction of `frames` poses from the poses at
/// `kept`. Kept frames are copied bit for bit. Throws RecoveryError unless
/// `kept` is strictly ascending and covers frame 0 and frame `frames`-1.
Pose3DSequence tri_recover(const Pose3DSequence& poses, std::span<const std::size_t> kept,
                           std::size_t frames);

}  // namespace h2ot

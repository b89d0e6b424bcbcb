// Copyright 2026 The H2OT Engine Authors
// SPDX-License-Identifier: Apache-2.0

// Slow, literal reference evaluations used to check the engine. Nothing here
// calls into the code paths it is meant to check.

#pragma once

#include <cstddef>
#include <vector>

#include "h2ot/tensor.hpp"
#include "h2ot/weights.hpp"

namespace h2ot::oracle {

using Points = std::vector<std::vector<double>>;

/// Spatial mean of every frame, computed joint by joint.
Points pool_frames(const PoseTokens& tokens);

struct DensityPeaksRef {
  std::vector<double> density;
  std::vector<double> distance;
  std::vector<double> score;
};

/// Quadratic evaluation of kNN density and separation distance, straight from
/// the definitions, with "denser" meaning greater (rho, -index).
DensityPeaksRef density_peaks(const Points& points, std::size_t k);

/// Repeated arg-max with lower-index ties, then sorted ascending.
std::vector<std::size_t> select_top(const std::vector<double>& scores, std::size_t r);

/// Cluster selection on raw tokens using the two functions above.
std::vector<std::size_t> cluster_select(const PoseTokens& tokens, std::size_t r, std::size_t k);

/// Uniform sampling evaluated in floating point: floor(j*(n-1)/(r-1) + 1/2).
std::vector<std::size_t> uniform_sample(std::size_t n, std::size_t r);

/// Value of frame t interpolated between kept samples, searched linearly.
double interpolate(const std::vector<std::size_t>& kept, const std::vector<double>& values,
                   std::size_t t);

/// Closed-form per-block cost 2*(4+2r)*J*N*D^2 + 2*J*N^2*D + 2*N*J^2*D summed
/// over a token-count profile.
double total_block_flops(const std::vector<std::size_t>& counts, std::size_t dim,
                         std::size_t joints, std::size_t ffn_ratio);

/// Token counts entering each block, by replaying the schedule block by block.
std::vector<std::size_t> replay_counts(std::size_t frames, std::size_t blocks,
                                       const std::vector<std::size_t>& keep,
                                       const std::vector<std::size_t>& at_block);

/// Recovery output for all-zero queries: every frame of joint j equals
/// O(mean_n(V(x_n^j))) + b_O, i.e. uniform attention over the kept tokens.
std::vector<std::vector<double>> tra_uniform_frame(const PoseTokens& last, const TraWeights& w);

/// Parameter count by summing the products of all tensor shapes that a model
/// (and optionally the recovery layer) declares.
std::size_t enumerate_parameters(const ModelWeights& w);

}  // namespace h2ot::oracle

// Copyright 2026 The H2OT Engine Authors
// SPDX-License-Identifier: Apache-2.0

// Temporal token pruning: four selection strategies and the hierarchical
// scheduler that applies them between transformer blocks.
//
// Every selector returns indices sorted ascending. Score ties are broken
// toward the lower index.

#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "h2ot/numkernel.hpp"
#include "h2ot/tensor.hpp"
#include "h2ot/weights.hpp"

namespace h2ot {

enum class PruneStrategy { kCluster, kAttention, kMotion, kSampler };

std::string_view to_string(PruneStrategy s);
/// Accepts "cluster", "attention", "motion", "sampler" and the short names
/// "tpc", "tpa", "tpmo", "tps". Throws ConfigError otherwise.
PruneStrategy parse_strategy(std::string_view name);

/// Stage m keeps `keep[m]` tokens, pruning right before block `at_block[m]`.
struct PruneSchedule {
  std::vector<std::size_t> keep;
  std::vector<std::size_t> at_block;
  PruneStrategy strategy = PruneStrategy::kSampler;

  std::size_t stages() const { return keep.size(); }
  /// Throws ScheduleError naming the first violated invariant.
  void validate(const ModelConfig& cfg) const;

  bool operator==(const PruneSchedule&) const = default;
};

struct StageTrace {
  std::size_t block = 0;
  /// Kept positions into the previous stage's token set, ascending.
  std::vector<std::size_t> local;
  /// Original frame indices of the surviving tokens, ascending.
  std::vector<std::size_t> frames;
  /// Per-token criterion of the previous token set; empty for the sampler.
  std::vector<double> scores;
  /// The pinned frame was re-inserted after selection.
  bool pinned_inserted = false;

  bool operator==(const StageTrace&) const = default;
};

struct SelectionTrace {
  std::size_t input_frames = 0;
  std::vector<StageTrace> stages;
  /// Token count entering each block.
  std::vector<std::size_t> block_tokens;

  /// Original frame indices that reach the last block.
  std::vector<std::size_t> final_frames() const;

  bool operator==(const SelectionTrace&) const = default;
};

/// Token count entering each block under `sched`, without running the model.
std::vector<std::size_t> token_count_profile(const ModelConfig& cfg, const PruneSchedule& sched);

/// Uniform temporal sampling: i_j = round_half_up(j*(n-1)/(r-1)).
std::vector<std::size_t> tps_select(std::size_t n, std::size_t r);

struct DensityPeaks {
  std::vector<double> density;   // rho, exp(-mean squared kNN distance)
  std::vector<double> distance;  // delta, distance to nearest denser token
  std::vector<double> score;     // rho * delta
};

/// Density-peaks scores with k-nearest-neighbor density over the rows of
/// `pooled`. "Denser" orders by (rho, -index). The densest token takes its
/// maximum distance to any token.
DensityPeaks dpc_knn_scores(const Matrix& pooled, std::size_t k);

/// Top-r indices by descending score, ties toward lower index, sorted ascending.
std::vector<std::size_t> top_r_ascending(std::span<const double> scores, std::size_t r);

std::vector<std::size_t> tpc_select(const PoseTokens& tokens, std::size_t r, std::size_t k);

/// Attention received: column sums of the n x n attention matrix.
std::vector<double> attention_received(const Matrix& alpha);
std::vector<std::size_t> tpa_select(const Matrix& alpha, std::size_t r);

/// Frame-to-frame differences of the flattened 2D pose rows; row 0 is zero.
struct MotionMatrix {
  Matrix values;
};

/// Rows of `poses` at `frames`, each flattened to J*2 values.
Matrix flatten_frames(const PoseSequence2D& poses, std::span<const std::size_t> frames);
MotionMatrix compute_motion(const Matrix& sequence);
/// Absolute row sums of the motion matrix.
std::vector<double> motion_scores(const MotionMatrix& m);
std::vector<std::size_t> tpmo_select(const MotionMatrix& m, std::size_t r);

struct ScheduleContext {
  const ModelWeights& weights;
  /// Needed by the motion strategy.
  const PoseSequence2D* poses = nullptr;
  /// Original frame that must survive every stage (seq2frame center).
  std::optional<std::size_t> pinned_frame;
};

struct ScheduleResult {
  PoseTokens tokens;
  SelectionTrace trace;
};

/// Runs all blocks of the model, pruning with `sched` before each scheduled
/// block. `x` must hold all F frames.
ScheduleResult run_schedule(PoseTokens x, const PruneSchedule& sched, const ScheduleContext& ctx);

}  // namespace h2ot

// Copyright 2026 The H2OT Engine Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <string_view>

#include "h2ot/numkernel.hpp"
#include "h2ot/tensor.hpp"
#include "h2ot/token_pruning.hpp"
#include "h2ot/weights.hpp"

namespace h2ot {

enum class PipelineMode { kSeq2Seq, kSeq2Frame };
enum class Recovery { kAttention, kInterpolation, kNone };

std::string_view to_string(PipelineMode m);
std::string_view to_string(Recovery r);
PipelineMode parse_mode(std::string_view name);
/// Accepts "tra"/"attention", "tri"/"interpolation" and "none".
Recovery parse_recovery(std::string_view name);

struct PipelineConfig {
  PipelineMode mode = PipelineMode::kSeq2Seq;
  Recovery recovery = Recovery::kInterpolation;
  PruneSchedule schedule;
  ModelConfig model;

  /// Throws ConfigError (or ScheduleError for the schedule itself).
  void validate() const;

  bool operator==(const PipelineConfig&) const = default;
};

struct SequenceOutput {
  Pose3DSequence poses;
  SelectionTrace trace;
};

struct FrameOutput {
  Pose3DSequence pose;  // one frame
  std::size_t center = 0;
  SelectionTrace trace;
};

inline std::size_t center_frame(std::size_t frames) { return frames / 2; }

/// Embed, prune across blocks, recover, regress: F output frames.
SequenceOutput seq2seq_forward(const PoseSequence2D& poses, const PipelineConfig& cfg,
                               const ModelWeights& w);

/// Embed, prune across blocks with the center frame pinned, regress, return
/// the center pose.
FrameOutput seq2frame_forward(const PoseSequence2D& poses, const PipelineConfig& cfg,
                              const ModelWeights& w);

/// Seeded weights for `cfg`; recovery attention is added only for tra.
ModelWeights init_pipeline_weights(const PipelineConfig& cfg, Rng& rng);

/// Closed-form parameter count of the weights `cfg` needs.
std::size_t pipeline_parameter_count(const PipelineConfig& cfg);

/// The backbone without pruning: F output frames.
Pose3DSequence unpruned_forward(const PoseSequence2D& poses, const ModelWeights& w);

}  // namespace h2ot

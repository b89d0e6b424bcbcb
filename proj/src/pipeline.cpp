// Copyright 2026 The H2OT Engine Authors
// SPDX-License-Identifier: Apache-2.0

#include "h2ot/pipeline.hpp"

#include <algorithm>
#include <string>

#include "h2ot/token_recovering.hpp"
#include "h2ot/vpt_model.hpp"

namespace h2ot {

std::string_view to_string(PipelineMode m) {
  return m == PipelineMode::kSeq2Seq ? "seq2seq" : "seq2frame";
}

std::string_view to_string(Recovery r) {
  switch (r) {
    case Recovery::kAttention: return "tra";
    case Recovery::kInterpolation: return "tri";
    case Recovery::kNone: return "none";
  }
  return "unknown";
}

PipelineMode parse_mode(std::string_view name) {
  if (name == "seq2seq") return PipelineMode::kSeq2Seq;
  if (name == "seq2frame") return PipelineMode::kSeq2Frame;
  throw ConfigError("unknown pipeline mode '" + std::string(name) + "'");
}

Recovery parse_recovery(std::string_view name) {
  if (name == "tra" || name == "attention") return Recovery::kAttention;
  if (name == "tri" || name == "interpolation") return Recovery::kInterpolation;
  if (name == "none") return Recovery::kNone;
  throw ConfigError("unknown recovery '" + std::string(name) + "'");
}

void PipelineConfig::validate() const {
  model.validate();
  schedule.validate(model);
  if (mode == PipelineMode::kSeq2Seq && recovery == Recovery::kNone) {
    throw ConfigError("seq2seq needs a recovery module (tra or tri)");
  }
  if (mode == PipelineMode::kSeq2Frame && recovery != Recovery::kNone) {
    throw ConfigError("seq2frame takes no recovery module, got " +
                      std::string(to_string(recovery)));
  }
  if (recovery == Recovery::kInterpolation && schedule.strategy != PruneStrategy::kSampler) {
    throw ConfigError("tri recovery requires the sampler strategy, got " +
                      std::string(to_string(schedule.strategy)));
  }
  if (recovery == Recovery::kInterpolation && schedule.keep.back() < 2) {
    throw ConfigError("tri recovery needs at least 2 frames in the last stage");
  }
}

namespace {

void check_weights(const PipelineConfig& cfg, const ModelWeights& w) {
  if (!(w.config == cfg.model)) throw ConfigError("weights were built for a different model config");
  if (cfg.recovery == Recovery::kAttention && !w.tra) {
    throw ConfigError("tra recovery requires weights with recovery-attention tensors");
  }
}

}  // namespace

SequenceOutput seq2seq_forward(const PoseSequence2D& poses, const PipelineConfig& cfg,
                               const ModelWeights& w) {
  cfg.validate();
  if (cfg.mode != PipelineMode::kSeq2Seq) throw ConfigError("seq2seq_forward on a seq2frame config");
  check_weights(cfg, w);

  ScheduleResult pruned = run_schedule(embed_poses(poses, w), cfg.schedule, {w, &poses, {}});
  SequenceOutput out;
  if (cfg.recovery == Recovery::kAttention) {
    out.poses = regression_head(tra_recover(pruned.tokens, *w.tra, cfg.model.heads), w);
  } else {
    out.poses = tri_recover(regression_head(pruned.tokens, w), pruned.trace.final_frames(),
                            cfg.model.frames);
  }
  out.trace = std::move(pruned.trace);
  return out;
}

FrameOutput seq2frame_forward(const PoseSequence2D& poses, const PipelineConfig& cfg,
                              const ModelWeights& w) {
  cfg.validate();
  if (cfg.mode != PipelineMode::kSeq2Frame) throw ConfigError("seq2frame_forward on a seq2seq config");
  check_weights(cfg, w);

  const std::size_t center = center_frame(cfg.model.frames);
  ScheduleResult pruned =
      run_schedule(embed_poses(poses, w), cfg.schedule, {w, &poses, center});
  const std::vector<std::size_t> kept = pruned.trace.final_frames();
  const auto it = std::lower_bound(kept.begin(), kept.end(), center);
  if (it == kept.end() || *it != center) throw Error("center frame lost during pruning");
  const auto pos = static_cast<std::size_t>(it - kept.begin());

  const PoseTokens center_token = pruned.tokens.gather(std::span<const std::size_t>(&pos, 1));
  return {regression_head(center_token, w), center, std::move(pruned.trace)};
}

ModelWeights init_pipeline_weights(const PipelineConfig& cfg, Rng& rng) {
  cfg.validate();
  return init_weights(cfg.model, rng, cfg.recovery == Recovery::kAttention);
}

std::size_t pipeline_parameter_count(const PipelineConfig& cfg) {
  const std::size_t backbone = analytic_parameter_count(cfg.model);
  return cfg.recovery == Recovery::kAttention ? backbone + analytic_tra_parameter_count(cfg.model)
                                              : backbone;
}

Pose3DSequence unpruned_forward(const PoseSequence2D& poses, const ModelWeights& w) {
  PoseTokens x = embed_poses(poses, w);
  for (std::size_t l = 0; l < w.config.blocks; ++l) x = transformer_block(x, w, l).tokens;
  return regression_head(x, w);
}

}  // namespace h2ot

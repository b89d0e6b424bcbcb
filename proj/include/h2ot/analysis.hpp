// Copyright 2026 The H2OT Engine Authors
// SPDX-License-Identifier: Apache-2.0

// Cost accounting, throughput measurement and evaluation metrics.
//
// FLOPs convention: one multiply-accumulate is 2 FLOPs. Per token stream of
// length N and width D an attention + FFN unit costs (4 + 2*ffn_ratio)*N*D^2
// for the projections and 2*N^2*D for the logit and value products. Softmax,
// norms and activations are not counted.

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "h2ot/pipeline.hpp"
#include "h2ot/tensor.hpp"
#include "h2ot/token_pruning.hpp"
#include "h2ot/weights.hpp"

namespace h2ot {

struct BlockFlops {
  double temporal = 0.0;  // J streams of N frame tokens
  double spatial = 0.0;   // N streams of J joint tokens
};

BlockFlops block_flops(std::size_t tokens, std::size_t dim, std::size_t joints,
                       std::size_t ffn_ratio = 2);

struct BlockCost {
  std::size_t block = 0;
  std::size_t tokens = 0;
  double temporal = 0.0;
  double spatial = 0.0;

  double total() const { return temporal + spatial; }
  bool operator==(const BlockCost&) const = default;
};

struct FlopsReport {
  std::vector<BlockCost> per_block;
  std::vector<BlockCost> baseline_per_block;
  double total = 0.0;
  double baseline_total = 0.0;
  double reduction_ratio = 0.0;
  /// Reported for reference; not part of total or the ratio.
  double embed_flops = 0.0;
  double head_flops = 0.0;

  bool operator==(const FlopsReport&) const = default;
};

/// Cost of the blocks under `sched`; without a schedule the report is the
/// baseline with reduction 0.
FlopsReport schedule_flops(const ModelConfig& cfg, const std::optional<PruneSchedule>& sched);

/// CSV with header `section,block,tokens,temporal_flops,spatial_flops`, one
/// row per block for sections "pruned" and "baseline", then "embed" and "head".
std::string to_csv(const FlopsReport& r);
FlopsReport flops_report_from_csv(std::string_view csv);
std::string to_text(const FlopsReport& r);

/// Mean per-joint Euclidean distance.
double mpjpe(const Pose3DSequence& pred, const Pose3DSequence& gt);

/// Mean per-joint 2D distance between detections and ground truth, restricted
/// to the `kept` frames.
double frame_noise(const PoseSequence2D& detected, const PoseSequence2D& truth,
                   std::span<const std::size_t> kept);

struct BenchOptions {
  std::size_t sequences = 4;
  std::size_t warmup = 1;
  std::size_t repetitions = 3;
  std::size_t threads = 1;
  std::uint64_t seed = 0;
};

struct BenchResult {
  std::size_t frames_per_repetition = 0;
  std::vector<double> fps;  // one entry per repetition
  double mean_fps = 0.0;
  double stddev_fps = 0.0;
  double mean_seconds = 0.0;
  /// FNV-1a digest over the bit patterns of every output pose.
  std::uint64_t output_digest = 0;
};

/// Times forward passes over `opts.sequences` random inputs. With no pipeline
/// config the unpruned backbone is timed. Throws ParameterError for zero
/// sequences or fewer than one repetition.
BenchResult bench_throughput(const ModelWeights& w, const std::optional<PipelineConfig>& cfg,
                             const BenchOptions& opts);

inline constexpr std::string_view kBenchCsvHeader =
    "config,mode,strategy,recovery,frames,dim,sequences,threads,repetitions,mean_fps,stddev_fps,"
    "mean_seconds,flops";

std::string bench_csv_row(std::string_view name, const ModelConfig& model,
                          const std::optional<PipelineConfig>& cfg, const BenchOptions& opts,
                          const BenchResult& r, double flops);

struct SelectionStats {
  std::size_t frames = 0;
  std::size_t samples = 0;
  std::vector<std::size_t> counts;  // per original frame index

  bool operator==(const SelectionStats&) const = default;
};

/// Histogram of the final-stage original frame indices over all traces.
SelectionStats selection_stats(std::span<const SelectionTrace> traces, std::size_t frames);

/// CSV with header `frame,count,samples`.
std::string to_csv(const SelectionStats& s);
SelectionStats selection_stats_from_csv(std::string_view csv);

}  // namespace h2ot

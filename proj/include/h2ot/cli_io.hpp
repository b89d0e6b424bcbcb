// Copyright 2026 The H2OT Engine Authors
// SPDX-License-Identifier: Apache-2.0

// Run configuration files, pose sequence files and trace export. Byte layouts
// are documented in docs/formats.md.

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "h2ot/pipeline.hpp"
#include "h2ot/tensor.hpp"
#include "h2ot/token_pruning.hpp"

namespace h2ot {

/// Environment variable that overrides the seed of a run configuration.
inline constexpr const char* kSeedEnvVar = "H2OT_SEED";

struct RunConfig {
  PipelineConfig pipeline;
  std::uint64_t seed = 0;
  std::string input;
  std::string output;
  std::string weights;
  std::string trace;

  bool operator==(const RunConfig&) const = default;
};

/// Parses `key = value` lines. Lists are written `[121, 81]`. Lines starting
/// with '#' are comments. The result is validated; invalid combinations throw
/// ConfigError/ScheduleError, syntax problems throw ParseError with the line.
RunConfig parse_run_config(std::string_view text, std::string_view source = "<config>");
RunConfig load_run_config(const std::string& path);
std::string format_run_config(const RunConfig& cfg);

/// Built-in presets: "mhformer", "mixste", "motionbert", "motionagformer".
RunConfig preset(std::string_view name);
std::vector<std::string> preset_names();

/// Replaces cfg.seed with $H2OT_SEED when set.
void apply_seed_override(RunConfig& cfg);

using AnySequence = std::variant<PoseSequence2D, Pose3DSequence>;

/// Text form: optional header `# h2ot-sequence frames=F joints=J dims=D`,
/// then one comma-separated frame per line. Without a header, `joints_hint`
/// fixes J (dims then follows from the row width); otherwise dims is 2.
AnySequence parse_sequence_text(std::string_view text, std::optional<std::size_t> joints_hint = {},
                                std::string_view source = "<text>");
std::string format_sequence_text(const PoseSequence2D& s);
std::string format_sequence_text(const Pose3DSequence& s);

/// Binary form: "H2OTSEQ1", u32 frames, u32 joints, u32 dims, f64 payload.
AnySequence parse_sequence_binary(std::string_view bytes, std::string_view source = "<binary>");
std::string format_sequence_binary(const PoseSequence2D& s);
std::string format_sequence_binary(const Pose3DSequence& s);

/// Dispatches on extension: .pseq/.bin binary, .txt/.csv text.
AnySequence load_sequence(const std::string& path, std::optional<std::size_t> joints_hint = {});
PoseSequence2D load_sequence_2d(const std::string& path,
                                std::optional<std::size_t> joints_hint = {});
Pose3DSequence load_sequence_3d(const std::string& path,
                                std::optional<std::size_t> joints_hint = {});
void save_sequence(const PoseSequence2D& s, const std::string& path);
void save_sequence(const Pose3DSequence& s, const std::string& path);

/// CSV `stage,block,pinned_inserted,local,frames,scores` preceded by a
/// `# input_frames=F block_tokens=...` line. Lists are space-separated and
/// stages are numbered from 1.
std::string to_csv(const SelectionTrace& t);
SelectionTrace selection_trace_from_csv(std::string_view csv);

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view contents);

}  // namespace h2ot

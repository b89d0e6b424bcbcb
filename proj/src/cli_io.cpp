// Copyright 2026 The H2OT Engine Authors
// SPDX-License-Identifier: Apache-2.0

#include "h2ot/cli_io.hpp"

#include <bit>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>

#include "h2ot/text.hpp"

namespace h2ot {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, std::string_view contents) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open " + path + " for writing");
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!out) throw Error("failed writing " + path);
}

// ---------------------------------------------------------------------------
// Run configuration

namespace {

std::vector<std::size_t> parse_list(std::string_view v, const std::string& where) {
  v = text::trim(v);
  if (v.size() >= 2 && v.front() == '[' && v.back() == ']') v = v.substr(1, v.size() - 2);
  std::vector<std::size_t> out;
  if (text::trim(v).empty()) return out;
  for (auto item : text::split(v, ',')) out.push_back(text::parse_size(item, where));
  return out;
}

std::string format_list(const std::vector<std::size_t>& v) {
  std::string s = "[";
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + std::to_string(v[i]);
  return s + "]";
}

}  // namespace

RunConfig parse_run_config(std::string_view src_text, std::string_view source) {
  RunConfig cfg;
  ModelConfig& m = cfg.pipeline.model;
  PruneSchedule& s = cfg.pipeline.schedule;
  std::map<std::string, std::size_t, std::less<>> seen;

  const auto ls = text::lines(src_text);
  for (std::size_t i = 0; i < ls.size(); ++i) {
    const auto line = text::trim(ls[i]);
    if (line.empty() || line.front() == '#') continue;
    const std::string where = std::string(source) + ":" + std::to_string(i + 1);
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ParseError(where + ": expected 'key = value'");
    const std::string key(text::trim(line.substr(0, eq)));
    const auto value = text::trim(line.substr(eq + 1));
    if (!seen.emplace(key, i + 1).second) throw ParseError(where + ": duplicate key '" + key + "'");

    if (key == "frames") m.frames = text::parse_size(value, where);
    else if (key == "joints") m.joints = text::parse_size(value, where);
    else if (key == "blocks") m.blocks = text::parse_size(value, where);
    else if (key == "dim") m.dim = text::parse_size(value, where);
    else if (key == "heads") m.heads = text::parse_size(value, where);
    else if (key == "ffn_ratio") m.ffn_ratio = text::parse_size(value, where);
    else if (key == "knn_k") m.knn_k = text::parse_size(value, where);
    else if (key == "mode") cfg.pipeline.mode = parse_mode(value);
    else if (key == "recovery") cfg.pipeline.recovery = parse_recovery(value);
    else if (key == "strategy") s.strategy = parse_strategy(value);
    else if (key == "r") s.keep = parse_list(value, where);
    else if (key == "b") s.at_block = parse_list(value, where);
    else if (key == "seed") cfg.seed = text::parse_size(value, where);
    else if (key == "input") cfg.input = std::string(value);
    else if (key == "output") cfg.output = std::string(value);
    else if (key == "weights") cfg.weights = std::string(value);
    else if (key == "trace") cfg.trace = std::string(value);
    else throw ParseError(where + ": unknown key '" + key + "'");
  }
  for (const char* required : {"frames", "blocks", "dim", "r", "b"}) {
    if (!seen.contains(std::string_view(required))) {
      throw ParseError(std::string(source) + ": missing required key '" + required + "'");
    }
  }
  cfg.pipeline.validate();
  return cfg;
}

RunConfig load_run_config(const std::string& path) {
  return parse_run_config(read_file(path), path);
}

std::string format_run_config(const RunConfig& cfg) {
  const ModelConfig& m = cfg.pipeline.model;
  const PruneSchedule& s = cfg.pipeline.schedule;
  std::ostringstream out;
  out << "frames = " << m.frames << "\njoints = " << m.joints << "\nblocks = " << m.blocks
      << "\ndim = " << m.dim << "\nheads = " << m.heads << "\nffn_ratio = " << m.ffn_ratio
      << "\nknn_k = " << m.knn_k << "\nmode = " << to_string(cfg.pipeline.mode)
      << "\nrecovery = " << to_string(cfg.pipeline.recovery)
      << "\nstrategy = " << to_string(s.strategy) << "\nr = " << format_list(s.keep)
      << "\nb = " << format_list(s.at_block) << "\nseed = " << cfg.seed << '\n';
  if (!cfg.input.empty()) out << "input = " << cfg.input << '\n';
  if (!cfg.output.empty()) out << "output = " << cfg.output << '\n';
  if (!cfg.weights.empty()) out << "weights = " << cfg.weights << '\n';
  if (!cfg.trace.empty()) out << "trace = " << cfg.trace << '\n';
  return out.str();
}

namespace {

struct PresetRow {
  const char* name;
  std::size_t frames, blocks, dim;
  std::vector<std::size_t> keep, at_block;
  PipelineMode mode;
};

const std::vector<PresetRow>& preset_table() {
  // (F, L, C, r, b) per backbone; everything else is the generic VPT.
  static const std::vector<PresetRow> rows = {
      {"mhformer", 351, 3, 512, {175, 117}, {0, 1}, PipelineMode::kSeq2Frame},
      {"mixste", 243, 8, 512, {121, 81}, {0, 3}, PipelineMode::kSeq2Seq},
      {"motionbert", 243, 5, 256, {121, 81}, {0, 1}, PipelineMode::kSeq2Seq},
      {"motionagformer", 243, 16, 128, {121, 81}, {0, 7}, PipelineMode::kSeq2Seq},
  };
  return rows;
}

}  // namespace

RunConfig preset(std::string_view name) {
  for (const auto& row : preset_table()) {
    if (name != row.name) continue;
    RunConfig cfg;
    ModelConfig& m = cfg.pipeline.model;
    m.frames = row.frames;
    m.joints = 17;
    m.blocks = row.blocks;
    m.dim = row.dim;
    m.heads = 8;
    m.ffn_ratio = 2;
    m.knn_k = 2;
    cfg.pipeline.mode = row.mode;
    cfg.pipeline.recovery =
        row.mode == PipelineMode::kSeq2Seq ? Recovery::kInterpolation : Recovery::kNone;
    cfg.pipeline.schedule = {row.keep, row.at_block, PruneStrategy::kSampler};
    cfg.pipeline.validate();
    return cfg;
  }
  throw ConfigError("unknown preset '" + std::string(name) + "'");
}

std::vector<std::string> preset_names() {
  std::vector<std::string> out;
  for (const auto& row : preset_table()) out.emplace_back(row.name);
  return out;
}

void apply_seed_override(RunConfig& cfg) {
  const char* env = std::getenv(kSeedEnvVar);
  if (env && *env) cfg.seed = text::parse_size(env, kSeedEnvVar);
}

// ---------------------------------------------------------------------------
// Sequence files

namespace {

static_assert(std::endian::native == std::endian::little,
              "binary formats assume a little-endian host");

constexpr char kSeqMagic[8] = {'H', '2', 'O', 'T', 'S', 'E', 'Q', '1'};
constexpr std::string_view kSeqHeader = "# h2ot-sequence";

AnySequence make_sequence(std::size_t frames, std::size_t joints, std::size_t dims,
                          std::vector<double> values, const std::string& where) {
  if (dims == 2) return PoseSequence2D(frames, joints, std::move(values));
  if (dims == 3) return Pose3DSequence(frames, joints, std::move(values));
  throw ParseError(where + ": dims must be 2 or 3, got " + std::to_string(dims));
}

template <typename Seq>
std::string format_text(const Seq& s) {
  std::ostringstream out;
  out << kSeqHeader << " frames=" << s.frames() << " joints=" << s.joints()
      << " dims=" << Seq::dims() << '\n';
  for (std::size_t f = 0; f < s.frames(); ++f) {
    const auto row = s.frame(f);
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out << ',';
      out << text::format_double(row[i]);
    }
    out << '\n';
  }
  return out.str();
}

template <typename Seq>
std::string format_binary(const Seq& s) {
  std::string out(kSeqMagic, sizeof(kSeqMagic));
  auto put32 = [&](std::uint32_t v) { out.append(reinterpret_cast<const char*>(&v), 4); };
  put32(static_cast<std::uint32_t>(s.frames()));
  put32(static_cast<std::uint32_t>(s.joints()));
  put32(static_cast<std::uint32_t>(Seq::dims()));
  const auto data = s.data();
  out.append(reinterpret_cast<const char*>(data.data()), data.size() * sizeof(double));
  return out;
}

bool is_binary_path(const std::string& path) {
  auto ends = [&](std::string_view ext) { return path.ends_with(ext); };
  if (ends(".pseq") || ends(".bin")) return true;
  if (ends(".txt") || ends(".csv")) return false;
  throw ParseError(path + ": unknown sequence extension (use .pseq, .bin, .txt or .csv)");
}

}  // namespace

AnySequence parse_sequence_text(std::string_view src_text, std::optional<std::size_t> joints_hint,
                                std::string_view source) {
  std::optional<std::size_t> h_frames, h_joints, h_dims;
  std::vector<double> values;
  std::size_t row_width = 0;
  std::size_t rows = 0;
  const auto ls = text::lines(src_text);
  for (std::size_t i = 0; i < ls.size(); ++i) {
    const std::string where = std::string(source) + ":" + std::to_string(i + 1);
    const auto line = text::trim(ls[i]);
    if (line.empty()) continue;
    if (line.starts_with(kSeqHeader)) {
      if (rows != 0) throw ParseError(where + ": header after data");
      for (auto tok : text::split(text::trim(line.substr(kSeqHeader.size())), ' ')) {
        tok = text::trim(tok);
        if (tok.empty()) continue;
        const auto eq = tok.find('=');
        if (eq == std::string_view::npos) throw ParseError(where + ": malformed header field");
        const auto key = tok.substr(0, eq);
        const std::size_t v = text::parse_size(tok.substr(eq + 1), where);
        if (key == "frames") h_frames = v;
        else if (key == "joints") h_joints = v;
        else if (key == "dims") h_dims = v;
        else throw ParseError(where + ": unknown header field '" + std::string(key) + "'");
      }
      continue;
    }
    if (line.front() == '#') continue;
    const auto fields = text::split(line, ',');
    if (rows == 0) {
      row_width = fields.size();
    } else if (fields.size() != row_width) {
      throw ParseError(where + ": expected " + std::to_string(row_width) + " values, got " +
                       std::to_string(fields.size()));
    }
    for (auto f : fields) values.push_back(text::parse_double(f, where));
    ++rows;
  }

  const std::string where(source);
  std::size_t joints = 0, dims = 0;
  if (h_joints && h_dims) {
    joints = *h_joints;
    dims = *h_dims;
  } else if (joints_hint && *joints_hint > 0) {
    joints = *joints_hint;
    if (rows > 0 && row_width % joints != 0) {
      throw ParseError(where + ": row width " + std::to_string(row_width) +
                       " is not a multiple of " + std::to_string(joints) + " joints");
    }
    dims = rows > 0 ? row_width / joints : 2;
  } else {
    dims = h_dims.value_or(2);
    if (rows > 0 && row_width % dims != 0) {
      throw ParseError(where + ": row width " + std::to_string(row_width) +
                       " is not a multiple of dims " + std::to_string(dims));
    }
    joints = rows > 0 ? row_width / dims : 0;
  }
  if (rows > 0 && row_width != joints * dims) {
    throw ParseError(where + ": rows have " + std::to_string(row_width) + " values, expected " +
                     std::to_string(joints * dims));
  }
  if (h_frames && *h_frames != rows) {
    throw ParseError(where + ": header declares " + std::to_string(*h_frames) +
                     " frames, found " + std::to_string(rows));
  }
  return make_sequence(rows, joints, dims, std::move(values), where);
}

std::string format_sequence_text(const PoseSequence2D& s) { return format_text(s); }
std::string format_sequence_text(const Pose3DSequence& s) { return format_text(s); }

AnySequence parse_sequence_binary(std::string_view bytes, std::string_view source) {
  const std::string where(source);
  constexpr std::size_t kHeader = sizeof(kSeqMagic) + 3 * sizeof(std::uint32_t);
  if (bytes.size() < kHeader) {
    throw ParseError(where + ": header truncated at byte " + std::to_string(bytes.size()) +
                     " (need " + std::to_string(kHeader) + ")");
  }
  if (std::memcmp(bytes.data(), kSeqMagic, sizeof(kSeqMagic)) != 0) {
    throw ParseError(where + ": bad magic at byte 0");
  }
  std::uint32_t hdr[3];
  std::memcpy(hdr, bytes.data() + sizeof(kSeqMagic), sizeof(hdr));
  const std::size_t frames = hdr[0], joints = hdr[1], dims = hdr[2];
  if (dims != 2 && dims != 3) {
    throw ParseError(where + ": dims field at byte 16 is " + std::to_string(dims));
  }
  const std::size_t expected = frames * joints * dims * sizeof(double);
  const std::size_t actual = bytes.size() - kHeader;
  if (actual != expected) {
    throw ParseError(where + ": payload at byte " + std::to_string(kHeader) + " has " +
                     std::to_string(actual) + " bytes, expected " + std::to_string(expected));
  }
  std::vector<double> values(frames * joints * dims);
  std::memcpy(values.data(), bytes.data() + kHeader, expected);
  return make_sequence(frames, joints, dims, std::move(values), where);
}

std::string format_sequence_binary(const PoseSequence2D& s) { return format_binary(s); }
std::string format_sequence_binary(const Pose3DSequence& s) { return format_binary(s); }

AnySequence load_sequence(const std::string& path, std::optional<std::size_t> joints_hint) {
  const bool binary = is_binary_path(path);
  const std::string bytes = read_file(path);
  return binary ? parse_sequence_binary(bytes, path)
                : parse_sequence_text(bytes, joints_hint, path);
}

PoseSequence2D load_sequence_2d(const std::string& path, std::optional<std::size_t> joints_hint) {
  AnySequence s = load_sequence(path, joints_hint);
  if (auto* p = std::get_if<PoseSequence2D>(&s)) return std::move(*p);
  throw ParseError(path + ": expected a 2D sequence");
}

Pose3DSequence load_sequence_3d(const std::string& path, std::optional<std::size_t> joints_hint) {
  AnySequence s = load_sequence(path, joints_hint);
  if (auto* p = std::get_if<Pose3DSequence>(&s)) return std::move(*p);
  throw ParseError(path + ": expected a 3D sequence");
}

void save_sequence(const PoseSequence2D& s, const std::string& path) {
  write_file(path, is_binary_path(path) ? format_binary(s) : format_text(s));
}

void save_sequence(const Pose3DSequence& s, const std::string& path) {
  write_file(path, is_binary_path(path) ? format_binary(s) : format_text(s));
}

// ---------------------------------------------------------------------------
// Selection traces

namespace {

constexpr std::string_view kTraceHeader = "stage,block,pinned_inserted,local,frames,scores";

template <typename T>
std::string join(const std::vector<T>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ' ';
    if constexpr (std::is_floating_point_v<T>) s += text::format_double(v[i]);
    else s += std::to_string(v[i]);
  }
  return s;
}

std::vector<std::size_t> split_sizes(std::string_view s, const std::string& where) {
  std::vector<std::size_t> out;
  for (auto tok : text::split(text::trim(s), ' ')) {
    if (!text::trim(tok).empty()) out.push_back(text::parse_size(tok, where));
  }
  return out;
}

std::vector<double> split_doubles(std::string_view s, const std::string& where) {
  std::vector<double> out;
  for (auto tok : text::split(text::trim(s), ' ')) {
    if (!text::trim(tok).empty()) out.push_back(text::parse_double(tok, where));
  }
  return out;
}

}  // namespace

std::string to_csv(const SelectionTrace& t) {
  std::ostringstream out;
  out << "# input_frames=" << t.input_frames << " block_tokens=" << join(t.block_tokens) << '\n';
  out << kTraceHeader << '\n';
  for (std::size_t m = 0; m < t.stages.size(); ++m) {
    const StageTrace& s = t.stages[m];
    out << (m + 1) << ',' << s.block << ',' << (s.pinned_inserted ? 1 : 0) << ','
        << join(s.local) << ',' << join(s.frames) << ',' << join(s.scores) << '\n';
  }
  return out.str();
}

SelectionTrace selection_trace_from_csv(std::string_view csv) {
  const auto ls = text::lines(csv);
  if (ls.size() < 2 || !ls[0].starts_with("# input_frames=") ||
      text::trim(ls[1]) != kTraceHeader) {
    throw ParseError("trace csv: missing header");
  }
  SelectionTrace t;
  const auto meta = ls[0].substr(std::string_view("# input_frames=").size());
  const auto sp = meta.find(" block_tokens=");
  if (sp == std::string_view::npos) throw ParseError("trace csv: malformed metadata line");
  t.input_frames = text::parse_size(meta.substr(0, sp), "trace input_frames");
  t.block_tokens =
      split_sizes(meta.substr(sp + std::string_view(" block_tokens=").size()), "trace block_tokens");
  for (std::size_t i = 2; i < ls.size(); ++i) {
    const std::string where = "trace csv line " + std::to_string(i + 1);
    const auto f = text::split(ls[i], ',');
    if (f.size() != 6) throw ParseError(where + ": expected 6 fields");
    if (text::parse_size(f[0], where) != t.stages.size() + 1) {
      throw ParseError(where + ": stages out of order");
    }
    StageTrace s;
    s.block = text::parse_size(f[1], where);
    s.pinned_inserted = text::parse_size(f[2], where) != 0;
    s.local = split_sizes(f[3], where);
    s.frames = split_sizes(f[4], where);
    s.scores = split_doubles(f[5], where);
    t.stages.push_back(std::move(s));
  }
  return t;
}

}  // namespace h2ot

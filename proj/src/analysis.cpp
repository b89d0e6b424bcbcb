// Copyright 2026 The H2OT Engine Authors
// SPDX-License-Identifier: Apache-2.0

#include "h2ot/analysis.hpp"

#include <chrono>
#include <cmath>
#include <cstring>
#include <sstream>
#include <thread>

#include "h2ot/numkernel.hpp"
#include "h2ot/text.hpp"

namespace h2ot {

BlockFlops block_flops(std::size_t tokens, std::size_t dim, std::size_t joints,
                       std::size_t ffn_ratio) {
  const double n = static_cast<double>(tokens);
  const double d = static_cast<double>(dim);
  const double j = static_cast<double>(joints);
  const double proj = 4.0 + 2.0 * static_cast<double>(ffn_ratio);
  return {j * (proj * n * d * d + 2.0 * n * n * d), n * (proj * j * d * d + 2.0 * j * j * d)};
}

namespace {

std::vector<BlockCost> costs(const ModelConfig& cfg, const std::vector<std::size_t>& counts) {
  std::vector<BlockCost> out;
  out.reserve(counts.size());
  for (std::size_t l = 0; l < counts.size(); ++l) {
    const BlockFlops f = block_flops(counts[l], cfg.dim, cfg.joints, cfg.ffn_ratio);
    out.push_back({l, counts[l], f.temporal, f.spatial});
  }
  return out;
}

double sum(const std::vector<BlockCost>& v) {
  double s = 0.0;
  for (const auto& c : v) s += c.total();
  return s;
}

void finish(FlopsReport& r) {
  r.total = sum(r.per_block);
  r.baseline_total = sum(r.baseline_per_block);
  r.reduction_ratio = r.baseline_total > 0.0 ? 1.0 - r.total / r.baseline_total : 0.0;
}

}  // namespace

FlopsReport schedule_flops(const ModelConfig& cfg, const std::optional<PruneSchedule>& sched) {
  cfg.validate();
  FlopsReport r;
  const std::vector<std::size_t> full(cfg.blocks, cfg.frames);
  r.baseline_per_block = costs(cfg, full);
  r.per_block = sched ? costs(cfg, token_count_profile(cfg, *sched)) : r.baseline_per_block;
  const double fjc = static_cast<double>(cfg.frames * cfg.joints * cfg.dim);
  r.embed_flops = 2.0 * 2.0 * fjc;
  r.head_flops = 2.0 * 3.0 * fjc;
  finish(r);
  return r;
}

std::string to_csv(const FlopsReport& r) {
  std::ostringstream out;
  out << "section,block,tokens,temporal_flops,spatial_flops\n";
  auto rows = [&](const char* section, const std::vector<BlockCost>& v) {
    for (const auto& c : v) {
      out << section << ',' << c.block << ',' << c.tokens << ','
          << text::format_double(c.temporal) << ',' << text::format_double(c.spatial) << '\n';
    }
  };
  rows("pruned", r.per_block);
  rows("baseline", r.baseline_per_block);
  out << "embed,,," << text::format_double(r.embed_flops) << ",0\n";
  out << "head,,," << text::format_double(r.head_flops) << ",0\n";
  return out.str();
}

FlopsReport flops_report_from_csv(std::string_view csv) {
  const auto ls = text::lines(csv);
  if (ls.empty() || text::trim(ls[0]) != "section,block,tokens,temporal_flops,spatial_flops") {
    throw ParseError("flops csv: missing header");
  }
  FlopsReport r;
  for (std::size_t i = 1; i < ls.size(); ++i) {
    const auto f = text::split(ls[i], ',');
    const std::string where = "flops csv line " + std::to_string(i + 1);
    if (f.size() != 5) throw ParseError(where + ": expected 5 fields");
    const auto section = text::trim(f[0]);
    if (section == "pruned" || section == "baseline") {
      BlockCost c{text::parse_size(f[1], where), text::parse_size(f[2], where),
                  text::parse_double(f[3], where), text::parse_double(f[4], where)};
      (section == "pruned" ? r.per_block : r.baseline_per_block).push_back(c);
    } else if (section == "embed") {
      r.embed_flops = text::parse_double(f[3], where);
    } else if (section == "head") {
      r.head_flops = text::parse_double(f[3], where);
    } else {
      throw ParseError(where + ": unknown section '" + std::string(section) + "'");
    }
  }
  finish(r);
  return r;
}

std::string to_text(const FlopsReport& r) {
  std::ostringstream out;
  out << "block  tokens  pruned GFLOPs  baseline GFLOPs\n";
  for (std::size_t i = 0; i < r.per_block.size(); ++i) {
    char line[128];
    std::snprintf(line, sizeof(line), "%5zu  %6zu  %13.3f  %15.3f\n", r.per_block[i].block,
                  r.per_block[i].tokens, r.per_block[i].total() / 1e9,
                  r.baseline_per_block[i].total() / 1e9);
    out << line;
  }
  char tail[256];
  std::snprintf(tail, sizeof(tail),
                "baseline total: %.3f GFLOPs\npruned total:   %.3f GFLOPs\n"
                "reduction:      %.1f%% (ratio %.4f)\nembed/head:     %.3f / %.3f GFLOPs "
                "(excluded)\n",
                r.baseline_total / 1e9, r.total / 1e9, 100.0 * r.reduction_ratio,
                r.reduction_ratio, r.embed_flops / 1e9, r.head_flops / 1e9);
  out << tail;
  return out.str();
}

double mpjpe(const Pose3DSequence& pred, const Pose3DSequence& gt) {
  if (pred.frames() != gt.frames() || pred.joints() != gt.joints()) {
    throw ShapeError("mpjpe: prediction and ground truth differ in shape");
  }
  if (pred.frames() == 0 || pred.joints() == 0) throw ShapeError("mpjpe on an empty sequence");
  double total = 0.0;
  for (std::size_t f = 0; f < pred.frames(); ++f) {
    for (std::size_t j = 0; j < pred.joints(); ++j) {
      double s = 0.0;
      for (std::size_t d = 0; d < 3; ++d) {
        const double e = pred.at(f, j, d) - gt.at(f, j, d);
        s += e * e;
      }
      total += std::sqrt(s);
    }
  }
  return total / static_cast<double>(pred.frames() * pred.joints());
}

double frame_noise(const PoseSequence2D& detected, const PoseSequence2D& truth,
                   std::span<const std::size_t> kept) {
  if (detected.frames() != truth.frames() || detected.joints() != truth.joints()) {
    throw ShapeError("frame_noise: detections and ground truth differ in shape");
  }
  if (kept.empty() || detected.joints() == 0) throw ShapeError("frame_noise over no frames");
  double total = 0.0;
  for (std::size_t f : kept) {
    if (f >= detected.frames()) {
      throw ShapeError("frame_noise: frame index " + std::to_string(f) + " out of range");
    }
    for (std::size_t j = 0; j < detected.joints(); ++j) {
      const double dx = detected.at(f, j, 0) - truth.at(f, j, 0);
      const double dy = detected.at(f, j, 1) - truth.at(f, j, 1);
      total += std::sqrt(dx * dx + dy * dy);
    }
  }
  return total / static_cast<double>(kept.size() * detected.joints());
}

namespace {

std::uint64_t fnv1a(std::uint64_t h, std::span<const double> values) {
  for (double v : values) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, sizeof(bits));
    for (int b = 0; b < 8; ++b) {
      h ^= (bits >> (8 * b)) & 0xffu;
      h *= 0x100000001b3ULL;
    }
  }
  return h;
}

}  // namespace

BenchResult bench_throughput(const ModelWeights& w, const std::optional<PipelineConfig>& cfg,
                             const BenchOptions& opts) {
  if (opts.sequences == 0) throw ParameterError("bench_throughput needs at least one sequence");
  if (opts.repetitions == 0) throw ParameterError("bench_throughput needs at least one repetition");
  if (cfg) cfg->validate();
  const ModelConfig& mc = w.config;

  Rng rng(opts.seed);
  std::vector<PoseSequence2D> inputs;
  inputs.reserve(opts.sequences);
  for (std::size_t s = 0; s < opts.sequences; ++s) {
    PoseSequence2D p(mc.frames, mc.joints);
    for (double& v : p.data()) v = rng.uniform(-1.0, 1.0);
    inputs.push_back(std::move(p));
  }

  std::vector<Pose3DSequence> outputs(opts.sequences);
  auto run_one = [&](std::size_t s) {
    if (!cfg) {
      outputs[s] = unpruned_forward(inputs[s], w);
    } else if (cfg->mode == PipelineMode::kSeq2Seq) {
      outputs[s] = seq2seq_forward(inputs[s], *cfg, w).poses;
    } else {
      outputs[s] = seq2frame_forward(inputs[s], *cfg, w).pose;
    }
  };
  auto run_all = [&] {
    const std::size_t threads = std::max<std::size_t>(1, std::min(opts.threads, opts.sequences));
    if (threads == 1) {
      for (std::size_t s = 0; s < opts.sequences; ++s) run_one(s);
      return;
    }
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(threads);
    for (std::size_t t = 0; t < threads; ++t) {
      pool.emplace_back([&, t] {
        try {
          for (std::size_t s = t; s < opts.sequences; s += threads) run_one(s);
        } catch (...) {
          errors[t] = std::current_exception();
        }
      });
    }
    for (auto& th : pool) th.join();
    for (auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  };

  for (std::size_t i = 0; i < opts.warmup; ++i) run_all();

  BenchResult r;
  const std::size_t out_frames = cfg && cfg->mode == PipelineMode::kSeq2Frame ? 1 : mc.frames;
  r.frames_per_repetition = opts.sequences * out_frames;
  double total_seconds = 0.0;
  for (std::size_t rep = 0; rep < opts.repetitions; ++rep) {
    const auto start = std::chrono::steady_clock::now();
    run_all();
    const auto stop = std::chrono::steady_clock::now();
    const double secs = std::chrono::duration<double>(stop - start).count();
    total_seconds += secs;
    r.fps.push_back(static_cast<double>(r.frames_per_repetition) / std::max(secs, 1e-12));
  }

  const double n = static_cast<double>(r.fps.size());
  for (double f : r.fps) r.mean_fps += f;
  r.mean_fps /= n;
  double var = 0.0;
  for (double f : r.fps) var += (f - r.mean_fps) * (f - r.mean_fps);
  r.stddev_fps = r.fps.size() > 1 ? std::sqrt(var / (n - 1.0)) : 0.0;
  r.mean_seconds = total_seconds / n;

  r.output_digest = 0xcbf29ce484222325ULL;
  for (const auto& o : outputs) r.output_digest = fnv1a(r.output_digest, o.data());
  return r;
}

std::string bench_csv_row(std::string_view name, const ModelConfig& model,
                          const std::optional<PipelineConfig>& cfg, const BenchOptions& opts,
                          const BenchResult& r, double flops) {
  std::ostringstream out;
  out << name << ',' << (cfg ? to_string(cfg->mode) : "unpruned") << ','
      << (cfg ? to_string(cfg->schedule.strategy) : "none") << ','
      << (cfg ? to_string(cfg->recovery) : "none") << ',' << model.frames << ',' << model.dim
      << ',' << opts.sequences << ',' << opts.threads << ',' << opts.repetitions << ','
      << text::format_double(r.mean_fps) << ',' << text::format_double(r.stddev_fps) << ','
      << text::format_double(r.mean_seconds) << ',' << text::format_double(flops);
  return out.str();
}

SelectionStats selection_stats(std::span<const SelectionTrace> traces, std::size_t frames) {
  SelectionStats s{frames, traces.size(), std::vector<std::size_t>(frames, 0)};
  for (const SelectionTrace& t : traces) {
    if (t.input_frames != frames) {
      throw ShapeError("selection_stats: trace over " + std::to_string(t.input_frames) +
                       " frames, expected " + std::to_string(frames));
    }
    for (std::size_t f : t.final_frames()) ++s.counts.at(f);
  }
  return s;
}

std::string to_csv(const SelectionStats& s) {
  std::ostringstream out;
  out << "frame,count,samples\n";
  for (std::size_t f = 0; f < s.counts.size(); ++f) {
    out << f << ',' << s.counts[f] << ',' << s.samples << '\n';
  }
  return out.str();
}

SelectionStats selection_stats_from_csv(std::string_view csv) {
  const auto ls = text::lines(csv);
  if (ls.empty() || text::trim(ls[0]) != "frame,count,samples") {
    throw ParseError("selection csv: missing header");
  }
  SelectionStats s;
  for (std::size_t i = 1; i < ls.size(); ++i) {
    const auto f = text::split(ls[i], ',');
    const std::string where = "selection csv line " + std::to_string(i + 1);
    if (f.size() != 3) throw ParseError(where + ": expected 3 fields");
    if (text::parse_size(f[0], where) != s.counts.size()) {
      throw ParseError(where + ": frames must be listed in order");
    }
    s.counts.push_back(text::parse_size(f[1], where));
    s.samples = text::parse_size(f[2], where);
  }
  s.frames = s.counts.size();
  return s;
}

}  // namespace h2ot

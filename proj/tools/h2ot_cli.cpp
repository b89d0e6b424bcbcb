// Copyright 2026 The H2OT Engine Authors
// SPDX-License-Identifier: Apache-2.0

// h2ot: run, measure and inspect pruned pose-lifting pipelines.
//
// Exit status: 0 on success, 1 on runtime or configuration errors, 2 on
// command-line usage errors.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "h2ot/acceptance.hpp"
#include "h2ot/analysis.hpp"
#include "h2ot/cli_io.hpp"
#include "h2ot/errors.hpp"
#include "h2ot/pipeline.hpp"
#include "h2ot/vpt_model.hpp"

namespace fs = std::filesystem;
using namespace h2ot;

namespace {

constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

struct ConfigSource {
  std::string preset_name;
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> dim;
  std::optional<std::size_t> heads;

  void add_to(CLI::App* cmd) {
    auto* p = cmd->add_option("--preset", preset_name, "Built-in preset")
                  ->check(CLI::IsMember(preset_names()));
    auto* c = cmd->add_option("--config", config_path, "Run configuration file")
                  ->check(CLI::ExistingFile);
    p->excludes(c);
    cmd->add_option("--seed", seed, "Seed (overrides the config and $H2OT_SEED)");
    cmd->add_option("--dim", dim, "Override the embedding width")->check(CLI::PositiveNumber);
    cmd->add_option("--heads", heads, "Override the attention head count")
        ->check(CLI::PositiveNumber);
  }

  RunConfig resolve() const {
    if (preset_name.empty() && config_path.empty()) {
      throw ConfigError("one of --preset or --config is required");
    }
    RunConfig cfg = config_path.empty() ? preset(preset_name) : load_run_config(config_path);
    apply_seed_override(cfg);
    if (seed) cfg.seed = *seed;
    if (dim) cfg.pipeline.model.dim = *dim;
    if (heads) cfg.pipeline.model.heads = *heads;
    cfg.pipeline.validate();
    return cfg;
  }

  std::string label() const {
    return preset_name.empty() ? fs::path(config_path).stem().string() : preset_name;
  }
};

ModelWeights obtain_weights(const RunConfig& cfg, const std::string& override_path) {
  const std::string& path = override_path.empty() ? cfg.weights : override_path;
  if (path.empty()) {
    Rng rng(cfg.seed);
    return init_pipeline_weights(cfg.pipeline, rng);
  }
  ModelWeights w = load_weights(path);
  if (!(w.config == cfg.pipeline.model)) {
    throw ConfigError("weights in " + path + " do not match the configured model");
  }
  return w;
}

// Window of F frames centred on `t`, edges replicated.
PoseSequence2D window_at(const PoseSequence2D& seq, std::size_t t, std::size_t frames) {
  PoseSequence2D out(frames, seq.joints());
  const auto half = static_cast<std::ptrdiff_t>(frames / 2);
  const auto last = static_cast<std::ptrdiff_t>(seq.frames()) - 1;
  for (std::size_t f = 0; f < frames; ++f) {
    const std::ptrdiff_t src =
        std::clamp(static_cast<std::ptrdiff_t>(t) - half + static_cast<std::ptrdiff_t>(f),
                   std::ptrdiff_t{0}, last);
    const auto from = seq.frame(static_cast<std::size_t>(src));
    std::copy(from.begin(), from.end(), out.frame(f).begin());
  }
  return out;
}

struct ForwardRun {
  Pose3DSequence poses;
  std::vector<SelectionTrace> traces;
};

ForwardRun run_forward(const PoseSequence2D& seq, const RunConfig& cfg, const ModelWeights& w,
                       bool windowed) {
  const auto& model = cfg.pipeline.model;
  if (seq.joints() != model.joints) {
    throw ConfigError("input has " + std::to_string(seq.joints()) + " joints, config expects " +
                      std::to_string(model.joints));
  }
  ForwardRun run;
  if (windowed) {
    if (cfg.pipeline.mode != PipelineMode::kSeq2Frame) {
      throw ConfigError("--windowed requires a seq2frame configuration");
    }
    run.poses = Pose3DSequence(seq.frames(), seq.joints());
    for (std::size_t t = 0; t < seq.frames(); ++t) {
      FrameOutput out = seq2frame_forward(window_at(seq, t, model.frames), cfg.pipeline, w);
      const auto src = out.pose.frame(0);
      std::copy(src.begin(), src.end(), run.poses.frame(t).begin());
      run.traces.push_back(std::move(out.trace));
    }
    return run;
  }
  if (seq.frames() != model.frames) {
    throw ConfigError("input has " + std::to_string(seq.frames()) + " frames, config expects " +
                      std::to_string(model.frames));
  }
  if (cfg.pipeline.mode == PipelineMode::kSeq2Seq) {
    SequenceOutput out = seq2seq_forward(seq, cfg.pipeline, w);
    run.poses = std::move(out.poses);
    run.traces.push_back(std::move(out.trace));
  } else {
    FrameOutput out = seq2frame_forward(seq, cfg.pipeline, w);
    run.poses = std::move(out.pose);
    run.traces.push_back(std::move(out.trace));
  }
  return run;
}

void print_output(const std::string& path, const std::string& contents) {
  if (path.empty() || path == "-") {
    std::cout << contents;
  } else {
    write_file(path, contents);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Token pruning and recovery for video pose transformers"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "h2ot 0.1.0");

  // forward
  auto* forward = app.add_subcommand("forward", "Run a pipeline on a 2D pose sequence");
  ConfigSource fwd_src;
  fwd_src.add_to(forward);
  std::string fwd_input, fwd_output, fwd_trace, fwd_weights;
  bool fwd_windowed = false;
  forward->add_option("-i,--input", fwd_input, "2D sequence (.txt/.csv or .pseq/.bin)");
  forward->add_option("-o,--output", fwd_output, "3D output sequence file");
  forward->add_option("--trace", fwd_trace, "Selection trace CSV");
  forward->add_option("--weights", fwd_weights, "Weight file (default: seeded init)");
  forward->add_flag("--windowed", fwd_windowed, "Slide a seq2frame window over every frame");

  // flops
  auto* flops = app.add_subcommand("flops", "Analytic FLOPs of a schedule against the baseline");
  ConfigSource flops_src;
  flops_src.add_to(flops);
  bool flops_csv = false;
  flops->add_flag("--csv", flops_csv, "CSV output");

  // bench
  auto* bench = app.add_subcommand("bench", "Wall-clock throughput, pruned against unpruned");
  ConfigSource bench_src;
  bench_src.add_to(bench);
  BenchOptions bench_opts;
  bool bench_csv = false;
  bench->add_option("--sequences", bench_opts.sequences, "Random sequences per repetition")
      ->check(CLI::PositiveNumber);
  bench->add_option("--warmup", bench_opts.warmup, "Untimed repetitions");
  bench->add_option("--repetitions", bench_opts.repetitions, "Timed repetitions")
      ->check(CLI::PositiveNumber);
  bench->add_option("--threads", bench_opts.threads, "Worker threads")->check(CLI::PositiveNumber);
  bench->add_flag("--csv", bench_csv, "CSV output");

  // prune-stats
  auto* stats = app.add_subcommand("prune-stats", "Selected-frame histogram over a directory");
  ConfigSource stats_src;
  stats_src.add_to(stats);
  std::string stats_dir, stats_output, stats_weights;
  bool stats_csv = false;
  stats->add_option("--dir", stats_dir, "Directory of 2D sequences")
      ->required()
      ->check(CLI::ExistingDirectory);
  stats->add_option("-o,--output", stats_output, "Write the CSV here instead of stdout");
  stats->add_option("--weights", stats_weights, "Weight file (default: seeded init)");
  stats->add_flag("--csv", stats_csv, "CSV output");

  // selftest
  auto* selftest = app.add_subcommand("selftest", "Run the built-in oracle and acceptance checks");
  acceptance::Options st_opts;
  bool st_bench = false;
  selftest->add_flag("--with-bench", st_bench, "Include the throughput comparison");
  selftest->add_option("--seed", st_opts.seed, "Seed for the randomized checks");

  // init-weights
  auto* init = app.add_subcommand("init-weights", "Write a seeded weight file");
  ConfigSource init_src;
  init_src.add_to(init);
  std::string init_output;
  init->add_option("-o,--output", init_output, "Weight file path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (*forward) {
      const RunConfig cfg = fwd_src.resolve();
      const std::string input = fwd_input.empty() ? cfg.input : fwd_input;
      const std::string output = fwd_output.empty() ? cfg.output : fwd_output;
      const std::string trace = fwd_trace.empty() ? cfg.trace : fwd_trace;
      if (input.empty()) throw ConfigError("no input sequence (use --input or `input =`)");
      const PoseSequence2D seq = load_sequence_2d(input, cfg.pipeline.model.joints);
      const ModelWeights w = obtain_weights(cfg, fwd_weights);
      const ForwardRun run = run_forward(seq, cfg, w, fwd_windowed);
      if (output.empty()) {
        std::cout << format_sequence_text(run.poses);
      } else {
        save_sequence(run.poses, output);
      }
      if (!trace.empty()) {
        std::string csv;
        for (const auto& t : run.traces) csv += to_csv(t);
        write_file(trace, csv);
      }
      if (!output.empty()) {
        std::cerr << "wrote " << run.poses.frames() << " frames to " << output << '\n';
      }
    } else if (*flops) {
      const RunConfig cfg = flops_src.resolve();
      const FlopsReport r = schedule_flops(cfg.pipeline.model, cfg.pipeline.schedule);
      std::cout << (flops_csv ? to_csv(r) : to_text(r));
    } else if (*bench) {
      const RunConfig cfg = bench_src.resolve();
      bench_opts.seed = cfg.seed;
      const ModelWeights w = obtain_weights(cfg, "");
      const FlopsReport fr = schedule_flops(cfg.pipeline.model, cfg.pipeline.schedule);
      const BenchResult base = bench_throughput(w, std::nullopt, bench_opts);
      const BenchResult pruned = bench_throughput(w, cfg.pipeline, bench_opts);
      const std::string name = bench_src.label();
      if (bench_csv) {
        std::cout << kBenchCsvHeader << '\n'
                  << bench_csv_row(name + "-baseline", cfg.pipeline.model, std::nullopt,
                                   bench_opts, base, fr.baseline_total)
                  << '\n'
                  << bench_csv_row(name, cfg.pipeline.model, cfg.pipeline, bench_opts, pruned,
                                   fr.total)
                  << '\n';
      } else {
        std::printf("%-12s %12s %10s %10s\n", "run", "fps", "stddev", "GFLOPs");
        std::printf("%-12s %12.2f %10.2f %10.3f\n", "baseline", base.mean_fps, base.stddev_fps,
                    fr.baseline_total / 1e9);
        std::printf("%-12s %12.2f %10.2f %10.3f\n", "pruned", pruned.mean_fps, pruned.stddev_fps,
                    fr.total / 1e9);
        std::printf("speedup %.2fx over %zu repetitions\n", pruned.mean_fps / base.mean_fps,
                    bench_opts.repetitions);
      }
    } else if (*stats) {
      const RunConfig cfg = stats_src.resolve();
      const ModelWeights w = obtain_weights(cfg, stats_weights);
      std::vector<fs::path> files;
      for (const auto& entry : fs::directory_iterator(stats_dir)) {
        const auto ext = entry.path().extension();
        if (entry.is_regular_file() &&
            (ext == ".txt" || ext == ".csv" || ext == ".pseq" || ext == ".bin")) {
          files.push_back(entry.path());
        }
      }
      std::sort(files.begin(), files.end());
      if (files.empty()) throw ConfigError("no sequence files in " + stats_dir);
      std::vector<SelectionTrace> traces;
      for (const auto& f : files) {
        const PoseSequence2D seq = load_sequence_2d(f.string(), cfg.pipeline.model.joints);
        ForwardRun run = run_forward(seq, cfg, w, false);
        traces.push_back(std::move(run.traces.front()));
      }
      const SelectionStats s = selection_stats(traces, cfg.pipeline.model.frames);
      if (stats_csv || !stats_output.empty()) {
        print_output(stats_output, to_csv(s));
      } else {
        std::printf("%zu sequences, %zu frames\n", s.samples, s.frames);
        for (std::size_t f = 0; f < s.frames; ++f) {
          if (s.counts[f] > 0) std::printf("frame %4zu  %zu\n", f, s.counts[f]);
        }
      }
    } else if (*selftest) {
      st_opts.include_throughput = st_bench;
      std::size_t failed = 0;
      acceptance::run_all(st_opts, [&](const acceptance::CriterionResult& r) {
        std::cout << acceptance::format(r) << std::endl;
        if (!r.passed) ++failed;
      });
      std::cout << (failed == 0 ? "all checks passed" : std::to_string(failed) + " check(s) failed")
                << '\n';
      return failed == 0 ? 0 : kExitRuntime;
    } else if (*init) {
      const RunConfig cfg = init_src.resolve();
      const ModelWeights w = obtain_weights(cfg, "");
      save_weights(w, init_output);
      std::cerr << "wrote " << w.parameter_count() << " parameters to " << init_output << '\n';
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return 0;
}

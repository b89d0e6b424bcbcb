// Copyright 2026 The H2OT Engine Authors
// SPDX-License-Identifier: Apache-2.0

#include "h2ot/acceptance.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <sstream>

#include "h2ot/analysis.hpp"
#include "h2ot/cli_io.hpp"
#include "h2ot/oracle.hpp"
#include "h2ot/pipeline.hpp"
#include "h2ot/token_pruning.hpp"
#include "h2ot/token_recovering.hpp"
#include "h2ot/vpt_model.hpp"

namespace h2ot::acceptance {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

template <typename Body>
CriterionResult run_criterion(int id, std::string name, Body&& body) {
  CriterionResult r;
  r.id = id;
  r.name = std::move(name);
  const auto t0 = Clock::now();
  try {
    body(r);
  } catch (const std::exception& e) {
    r.passed = false;
    r.detail = std::string("exception: ") + e.what();
  }
  r.seconds = seconds_since(t0);
  return r;
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof(buf), f, args...);
  return buf;
}

std::string join(const std::vector<std::size_t>& v) {
  std::string s = "[";
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
  return s + "]";
}

PoseTokens random_tokens(Rng& rng, std::size_t n, std::size_t joints, std::size_t dim) {
  PoseTokens t(n, joints, dim);
  for (double& v : t.data()) v = rng.uniform(-1.0, 1.0);
  return t;
}

PoseSequence2D random_poses(Rng& rng, std::size_t frames, std::size_t joints) {
  PoseSequence2D p(frames, joints);
  for (double& v : p.data()) v = rng.uniform(-1.0, 1.0);
  return p;
}

template <typename Seq>
bool bitwise_equal(const Seq& a, const Seq& b) {
  return a.frames() == b.frames() && a.joints() == b.joints() &&
         std::memcmp(a.data().data(), b.data().data(), a.data().size() * sizeof(double)) == 0;
}

bool strictly_decreasing_stages(const std::vector<std::size_t>& counts, std::size_t frames) {
  std::size_t prev = frames;
  bool dropped = false;
  for (std::size_t c : counts) {
    if (c > prev) return false;
    if (c < prev) dropped = true;
    prev = c;
  }
  return dropped;
}

/// Random valid schedule for (frames, blocks); strictly decreasing r, strictly
/// increasing b.
PruneSchedule random_schedule(Rng& rng, std::size_t frames, std::size_t blocks,
                              PruneStrategy strategy) {
  const std::size_t max_stages = std::min<std::size_t>({blocks, frames - 1, 3});
  const std::size_t stages = rng.uniform_index(1, max_stages);
  PruneSchedule s;
  s.strategy = strategy;
  std::size_t upper = frames - 1;
  for (std::size_t m = 0; m < stages; ++m) {
    const std::size_t remaining = stages - m - 1;
    const std::size_t r = rng.uniform_index(1 + remaining, upper);
    s.keep.push_back(r);
    upper = r - 1;
  }
  std::vector<std::size_t> all(blocks);
  for (std::size_t i = 0; i < blocks; ++i) all[i] = i;
  for (std::size_t i = 0; i < stages; ++i) std::swap(all[i], all[rng.uniform_index(i, blocks - 1)]);
  s.at_block.assign(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(stages));
  std::sort(s.at_block.begin(), s.at_block.end());
  return s;
}

PipelineConfig mixste_desk(std::size_t dim) {
  PipelineConfig cfg = preset("mixste").pipeline;
  cfg.model.dim = dim;
  return cfg;
}

}  // namespace

CriterionResult flops_reduction_ratio(const Options&) {
  return run_criterion(1, "flops-reduction-ratio", [](CriterionResult& r) {
    const auto t0 = Clock::now();
    const PipelineConfig cfg = preset("mixste").pipeline;
    const FlopsReport rep = schedule_flops(cfg.model, cfg.schedule);
    const double secs = seconds_since(t0);

    const auto& m = cfg.model;
    const auto& s = cfg.schedule;
    const double pruned = oracle::total_block_flops(
        oracle::replay_counts(m.frames, m.blocks, s.keep, s.at_block), m.dim, m.joints, m.ffn_ratio);
    const double base = oracle::total_block_flops(std::vector<std::size_t>(m.blocks, m.frames),
                                                  m.dim, m.joints, m.ffn_ratio);
    const double oracle_ratio = 1.0 - pruned / base;
    const bool in_band = rep.reduction_ratio >= 0.52 && rep.reduction_ratio <= 0.66;
    const bool agrees = std::abs(rep.reduction_ratio - oracle_ratio) <= 1e-12;
    r.passed = in_band && agrees && secs < 1.0 && rep.total < rep.baseline_total;
    r.detail = fmt("ratio=%.4f (oracle %.4f) band=[0.52,0.66] pruned=%.2fG baseline=%.2fG t=%.4fs",
                   rep.reduction_ratio, oracle_ratio, rep.total / 1e9, rep.baseline_total / 1e9,
                   secs);
  });
}

CriterionResult schedule_token_counts(const Options& opts) {
  return run_criterion(2, "schedule-token-counts", [&](CriterionResult& r) {
    const auto t0 = Clock::now();
    const std::vector<std::size_t> expected = {121, 121, 121, 81, 81, 81, 81, 81};
    const PipelineConfig mix = preset("mixste").pipeline;
    const auto profile = token_count_profile(mix.model, mix.schedule);
    bool ok = profile == expected;

    // Execute Algorithm 1 for real at a narrow width and compare counts.
    PipelineConfig narrow = mix;
    narrow.model.dim = 8;
    narrow.model.heads = 2;
    Rng rng(opts.seed);
    const ModelWeights w = init_weights(narrow.model, rng);
    const PoseSequence2D p = random_poses(rng, narrow.model.frames, narrow.model.joints);
    const auto run = run_schedule(embed_poses(p, w), narrow.schedule, {w, &p, {}});
    ok = ok && run.trace.block_tokens == expected && run.tokens.frames() == 81;

    std::string presets;
    for (const auto& name : preset_names()) {
      const PipelineConfig cfg = preset(name).pipeline;
      cfg.validate();
      const auto counts = token_count_profile(cfg.model, cfg.schedule);
      ok = ok && strictly_decreasing_stages(counts, cfg.model.frames) &&
           counts.back() == cfg.schedule.keep.back() &&
           counts == oracle::replay_counts(cfg.model.frames, cfg.model.blocks, cfg.schedule.keep,
                                           cfg.schedule.at_block);
      presets += " " + name + "=" + join(counts);
    }
    const double secs = seconds_since(t0);
    r.passed = ok && secs < 1.0;
    r.detail = "mixste=" + join(profile) + " executed=" + join(run.trace.block_tokens) + presets +
               fmt(" t=%.3fs", secs);
  });
}

CriterionResult cluster_oracle_equivalence(const Options& opts) {
  return run_criterion(3, "dpc-knn-oracle-equivalence", [&](CriterionResult& r) {
    const auto t0 = Clock::now();
    Rng rng(opts.seed + 3);
    std::size_t agree = 0, with_ties = 0;
    const std::size_t trials = 1000;
    for (std::size_t t = 0; t < trials; ++t) {
      const std::size_t k = rng.uniform_index(1, 3);
      const std::size_t n = rng.uniform_index(k + 1, 12);
      const std::size_t joints = rng.uniform_index(1, 3);
      const std::size_t dim = rng.uniform_index(1, 4);
      const std::size_t keep = rng.uniform_index(1, n);
      PoseTokens x = random_tokens(rng, n, joints, dim);
      if (rng.next_double() < 0.25) {
        // Duplicate frames create exact density ties.
        const std::size_t src = rng.uniform_index(0, n - 1);
        const std::size_t dst = rng.uniform_index(0, n - 1);
        for (std::size_t j = 0; j < joints; ++j) {
          const auto from = x.token(src, j);
          std::copy(from.begin(), from.end(), x.token(dst, j).begin());
        }
        ++with_ties;
      }
      if (tpc_select(x, keep, k) == oracle::cluster_select(x, keep, k)) ++agree;
    }
    const double secs = seconds_since(t0);
    r.passed = agree == trials && secs < 10.0;
    r.detail = fmt("%zu/%zu instances agree (%zu with duplicated frames) t=%.3fs", agree, trials,
                   with_ties, secs);
  });
}

CriterionResult interpolation_exactness(const Options& opts) {
  return run_criterion(4, "tri-exactness", [&](CriterionResult& r) {
    Rng rng(opts.seed + 4);
    double worst = 0.0;
    bool kept_exact = true, sampling_ok = true;
    const std::size_t trials = 1000;
    for (std::size_t t = 0; t < trials; ++t) {
      const std::size_t frames = rng.uniform_index(9, 351);
      const std::size_t keep = rng.uniform_index(9, frames);
      const std::size_t joints = rng.uniform_index(1, 17);
      std::vector<double> offset(joints * 3), slope(joints * 3);
      for (auto& v : offset) v = rng.uniform(-1000.0, 1000.0);
      for (auto& v : slope) v = rng.uniform(-10.0, 10.0);

      const auto kept = tps_select(frames, keep);
      sampling_ok = sampling_ok && kept == oracle::uniform_sample(frames, keep);
      Pose3DSequence sparse(kept.size(), joints);
      for (std::size_t i = 0; i < kept.size(); ++i) {
        auto row = sparse.frame(i);
        for (std::size_t c = 0; c < row.size(); ++c) {
          row[c] = offset[c] + slope[c] * static_cast<double>(kept[i]);
        }
      }
      const Pose3DSequence full = tri_recover(sparse, kept, frames);
      for (std::size_t f = 0; f < frames; ++f) {
        const auto row = full.frame(f);
        for (std::size_t c = 0; c < row.size(); ++c) {
          const double truth = offset[c] + slope[c] * static_cast<double>(f);
          worst = std::max(worst, std::abs(row[c] - truth));
        }
      }
      for (std::size_t i = 0; i < kept.size(); ++i) {
        kept_exact = kept_exact && std::memcmp(full.frame(kept[i]).data(), sparse.frame(i).data(),
                                               joints * 3 * sizeof(double)) == 0;
      }
    }
    r.passed = worst <= 1e-9 && kept_exact && sampling_ok;
    r.detail = fmt("max |error|=%.3e (tol 1e-9) kept frames bitwise=%s sampling matches oracle=%s",
                   worst, kept_exact ? "yes" : "no", sampling_ok ? "yes" : "no");
  });
}

CriterionResult tra_zero_init(const Options& opts) {
  return run_criterion(5, "tra-zero-init-uniform", [&](CriterionResult& r) {
    Rng rng(opts.seed + 5);
    double spread = 0.0, vs_oracle = 0.0;
    bool zero_queries = true;
    const std::size_t draws = 100;
    for (std::size_t d = 0; d < draws; ++d) {
      ModelConfig cfg;
      cfg.frames = rng.uniform_index(2, 81);
      cfg.joints = rng.uniform_index(1, 4);
      cfg.blocks = 1;
      cfg.heads = std::size_t{1} << rng.uniform_index(0, 2);
      cfg.dim = cfg.heads * rng.uniform_index(1, 4);
      Rng wrng(rng.next_u64());
      ModelWeights w = init_weights(cfg, wrng, true);
      TraWeights& tra = *w.tra;
      for (double v : tra.queries.data()) zero_queries = zero_queries && v == 0.0;
      for (Linear* l : {&tra.attn.key, &tra.attn.value, &tra.attn.output}) {
        for (double& b : l->bias) b = wrng.uniform(-0.5, 0.5);
      }
      const PoseTokens last = random_tokens(rng, rng.uniform_index(1, cfg.frames), cfg.joints,
                                            cfg.dim);
      const PoseTokens out = tra_recover(last, tra, cfg.heads);
      const auto expected = oracle::tra_uniform_frame(last, tra);
      for (std::size_t j = 0; j < cfg.joints; ++j) {
        for (std::size_t f = 0; f < cfg.frames; ++f) {
          for (std::size_t c = 0; c < cfg.dim; ++c) {
            spread = std::max(spread, std::abs(out.at(f, j, c) - out.at(0, j, c)));
            vs_oracle = std::max(vs_oracle, std::abs(out.at(f, j, c) - expected[j][c]));
          }
        }
      }
    }
    r.passed = zero_queries && spread <= 1e-9 && vs_oracle <= 1e-9;
    r.detail = fmt("%zu draws: queries zero=%s, max frame spread=%.3e, max |out-uniform oracle|=%.3e",
                   draws, zero_queries ? "yes" : "no", spread, vs_oracle);
  });
}

CriterionResult attention_invariants(const Options& opts) {
  return run_criterion(6, "attention-invariants", [&](CriterionResult& r) {
    Rng rng(opts.seed + 6);
    double worst_row = 0.0;
    bool nonnegative = true;
    std::size_t blocks_checked = 0;
    for (std::size_t t = 0; t < 20; ++t) {
      ModelConfig cfg;
      cfg.frames = rng.uniform_index(1, 40);
      cfg.joints = rng.uniform_index(1, 4);
      cfg.blocks = rng.uniform_index(1, 3);
      cfg.heads = std::size_t{1} << rng.uniform_index(0, 2);
      cfg.dim = cfg.heads * rng.uniform_index(1, 3);
      Rng wrng(rng.next_u64());
      const ModelWeights w = init_weights(cfg, wrng);
      PoseTokens x = embed_poses(random_poses(rng, cfg.frames, cfg.joints), w);
      for (std::size_t l = 0; l < cfg.blocks; ++l) {
        BlockOutput out = transformer_block(x, w, l);
        for (std::size_t q = 0; q < out.temporal_attention.rows(); ++q) {
          double s = 0.0;
          for (double v : out.temporal_attention.row(q)) {
            s += v;
            nonnegative = nonnegative && v >= 0.0;
          }
          worst_row = std::max(worst_row, std::abs(s - 1.0));
        }
        x = std::move(out.tokens);
        ++blocks_checked;
      }
    }

    std::size_t invariant = 0;
    const std::size_t trials = 100;
    for (std::size_t t = 0; t < trials; ++t) {
      ModelConfig cfg;
      cfg.frames = rng.uniform_index(2, 60);
      cfg.joints = rng.uniform_index(1, 4);
      cfg.blocks = 1;
      cfg.heads = 2;
      cfg.dim = 8;
      Rng wrng(rng.next_u64());
      const ModelWeights w = init_weights(cfg, wrng);
      const PoseTokens x = random_tokens(rng, cfg.frames, cfg.joints, cfg.dim);
      const auto logits = temporal_attention_logits(x, w, 0);
      const double shift = rng.uniform(-100.0, 100.0);
      const std::size_t keep = rng.uniform_index(1, cfg.frames);
      if (tpa_select(average_attention(logits), keep) ==
          tpa_select(average_attention(logits, shift), keep)) {
        ++invariant;
      }
    }
    r.passed = worst_row <= 1e-6 && nonnegative && invariant == trials;
    r.detail = fmt("%zu blocks: max |row sum - 1|=%.3e, nonnegative=%s; shift invariance %zu/%zu",
                   blocks_checked, worst_row, nonnegative ? "yes" : "no", invariant, trials);
  });
}

CriterionResult seq2frame_center(const Options& opts) {
  return run_criterion(7, "seq2frame-center-token", [&](CriterionResult& r) {
    Rng rng(opts.seed + 7);
    std::size_t ok = 0, inserted = 0;
    const std::size_t trials = 500;
    const PruneStrategy strategies[] = {PruneStrategy::kCluster, PruneStrategy::kAttention,
                                        PruneStrategy::kMotion, PruneStrategy::kSampler};
    std::string first_failure;
    for (std::size_t t = 0; t < trials; ++t) {
      PipelineConfig cfg;
      cfg.mode = PipelineMode::kSeq2Frame;
      cfg.recovery = Recovery::kNone;
      cfg.model.frames = rng.uniform_index(2, 61);
      cfg.model.joints = rng.uniform_index(1, 3);
      cfg.model.blocks = rng.uniform_index(1, 4);
      cfg.model.heads = 2;
      cfg.model.dim = 4;
      cfg.model.knn_k = rng.uniform_index(1, std::min<std::size_t>(2, cfg.model.frames - 1));
      const PruneStrategy strategy = strategies[rng.uniform_index(0, 3)];
      do {
        cfg.schedule = random_schedule(rng, cfg.model.frames, cfg.model.blocks, strategy);
        try {
          cfg.validate();
          break;
        } catch (const ScheduleError&) {
        }
      } while (true);

      Rng wrng(rng.next_u64());
      const ModelWeights w = init_pipeline_weights(cfg, wrng);
      const PoseSequence2D p = random_poses(rng, cfg.model.frames, cfg.model.joints);
      const FrameOutput out = seq2frame_forward(p, cfg, w);
      const std::size_t center = center_frame(cfg.model.frames);
      bool good = out.pose.frames() == 1 && out.pose.joints() == cfg.model.joints &&
                  out.pose.all_finite() && out.center == center;
      for (const StageTrace& st : out.trace.stages) {
        good = good && std::binary_search(st.frames.begin(), st.frames.end(), center);
        if (st.pinned_inserted) ++inserted;
      }
      const auto final_frames = out.trace.final_frames();
      good = good && std::binary_search(final_frames.begin(), final_frames.end(), center);
      if (good) {
        ++ok;
      } else if (first_failure.empty()) {
        first_failure = " first failure: F=" + std::to_string(cfg.model.frames) + " strategy=" +
                        std::string(to_string(strategy));
      }
    }
    r.passed = ok == trials;
    r.detail = fmt("%zu/%zu configs keep the center frame (%zu stages re-inserted it)", ok, trials,
                   inserted) + first_failure;
  });
}

CriterionResult parameter_accounting(const Options& opts) {
  return run_criterion(8, "parameter-accounting", [&](CriterionResult& r) {
    bool ok = true;
    std::string detail;
    for (const auto& name : preset_names()) {
      PipelineConfig cfg = preset(name).pipeline;
      cfg.model.dim = 64;
      cfg.mode = PipelineMode::kSeq2Seq;
      cfg.recovery = Recovery::kInterpolation;
      cfg.schedule.strategy = PruneStrategy::kSampler;
      Rng rng_a(opts.seed), rng_b(opts.seed);
      const ModelWeights tps_tri = init_pipeline_weights(cfg, rng_a);
      const ModelWeights unpruned = init_weights(cfg.model, rng_b);
      const std::size_t n_tri = oracle::enumerate_parameters(tps_tri);
      const std::size_t n_base = oracle::enumerate_parameters(unpruned);

      PipelineConfig tra_cfg = cfg;
      tra_cfg.recovery = Recovery::kAttention;
      Rng rng_c(opts.seed);
      const ModelWeights with_tra = init_pipeline_weights(tra_cfg, rng_c);
      const std::size_t n_tra = oracle::enumerate_parameters(with_tra);
      const std::size_t c = cfg.model.dim;
      const std::size_t tra_formula = cfg.model.frames * c + 4 * (c * c + c);

      ok = ok && n_tri == n_base && n_base == analytic_parameter_count(cfg.model) &&
           n_base == tps_tri.parameter_count() && n_tra - n_base == tra_formula &&
           pipeline_parameter_count(tra_cfg) == n_tra && pipeline_parameter_count(cfg) == n_tri;
      detail += fmt(" %s(C=64): base=%zu tps+tri=%zu tra+%zu;", name.c_str(), n_base, n_tri,
                    n_tra - n_base);
    }
    const ModelConfig full = preset("mixste").pipeline.model;
    detail += fmt(" mixste full-width analytic=%.2fM", analytic_parameter_count(full) / 1e6);
    r.passed = ok;
    r.detail = detail.substr(1);
  });
}

CriterionResult throughput_direction(const Options& opts) {
  return run_criterion(9, "throughput-direction", [&](CriterionResult& r) {
    PipelineConfig cfg = mixste_desk(opts.bench_dim);
    Rng rng(opts.seed + 9);
    const ModelWeights w = init_pipeline_weights(cfg, rng);
    BenchOptions bo;
    bo.sequences = opts.bench_sequences;
    bo.warmup = 1;
    bo.repetitions = opts.bench_repetitions;
    bo.seed = opts.seed;
    const BenchResult base = bench_throughput(w, std::nullopt, bo);
    const BenchResult pruned = bench_throughput(w, cfg, bo);
    double slowest = 0.0;
    for (const BenchResult* b : {&base, &pruned}) {
      for (double fps : b->fps) {
        slowest = std::max(slowest, static_cast<double>(b->frames_per_repetition) / fps);
      }
    }
    const double speedup = pruned.mean_fps / base.mean_fps;
    r.passed = speedup >= 1.3 && slowest < 60.0 && bo.repetitions >= 3;
    r.detail = fmt("C=%zu: baseline %.1f±%.1f fps, pruned %.1f±%.1f fps, speedup %.2fx (need 1.3x), "
                   "slowest repetition %.2fs",
                   opts.bench_dim, base.mean_fps, base.stddev_fps, pruned.mean_fps,
                   pruned.stddev_fps, speedup, slowest);
  });
}

CriterionResult determinism(const Options& opts) {
  return run_criterion(10, "determinism", [&](CriterionResult& r) {
    struct Variant {
      PipelineMode mode;
      PruneStrategy strategy;
      Recovery recovery;
    };
    const Variant variants[] = {
        {PipelineMode::kSeq2Seq, PruneStrategy::kSampler, Recovery::kInterpolation},
        {PipelineMode::kSeq2Seq, PruneStrategy::kCluster, Recovery::kAttention},
        {PipelineMode::kSeq2Seq, PruneStrategy::kAttention, Recovery::kAttention},
        {PipelineMode::kSeq2Seq, PruneStrategy::kMotion, Recovery::kAttention},
        {PipelineMode::kSeq2Frame, PruneStrategy::kCluster, Recovery::kNone},
    };
    std::size_t ok = 0;
    for (const Variant& v : variants) {
      PipelineConfig cfg;
      cfg.mode = v.mode;
      cfg.recovery = v.recovery;
      cfg.model = {27, 5, 4, 16, 4, 2, 2};
      cfg.schedule = {{13, 9}, {0, 2}, v.strategy};
      auto run = [&] {
        Rng rng(opts.seed + 10);
        const ModelWeights w = init_pipeline_weights(cfg, rng);
        const PoseSequence2D p = random_poses(rng, cfg.model.frames, cfg.model.joints);
        if (cfg.mode == PipelineMode::kSeq2Seq) return seq2seq_forward(p, cfg, w);
        FrameOutput f = seq2frame_forward(p, cfg, w);
        return SequenceOutput{std::move(f.pose), std::move(f.trace)};
      };
      const SequenceOutput a = run();
      const SequenceOutput b = run();
      if (bitwise_equal(a.poses, b.poses) && a.trace == b.trace) ++ok;
    }
    r.passed = ok == std::size(variants);
    r.detail = fmt("%zu/%zu pipeline variants bitwise identical across runs", ok,
                   std::size(variants));
  });
}

std::vector<CriterionResult> run_all(const Options& opts,
                                     const std::function<void(const CriterionResult&)>& on_result) {
  using Fn = CriterionResult (*)(const Options&);
  std::vector<Fn> fns = {flops_reduction_ratio, schedule_token_counts, cluster_oracle_equivalence,
                         interpolation_exactness, tra_zero_init,       attention_invariants,
                         seq2frame_center,        parameter_accounting};
  if (opts.include_throughput) fns.push_back(throughput_direction);
  fns.push_back(determinism);
  std::vector<CriterionResult> out;
  for (Fn fn : fns) {
    out.push_back(fn(opts));
    if (on_result) on_result(out.back());
  }
  return out;
}

std::string format(const CriterionResult& r) {
  return fmt("[%s] AC%02d %s: ", r.passed ? "PASS" : "FAIL", r.id, r.name.c_str()) + r.detail +
         fmt(" (%.3f s)", r.seconds);
}

}  // namespace h2ot::acceptance

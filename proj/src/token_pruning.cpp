// Copyright 2026 The H2OT Engine Authors
// SPDX-License-Identifier: Apache-2.0

#include "h2ot/token_pruning.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "h2ot/vpt_model.hpp"

namespace h2ot {

namespace {

std::string list(std::span<const std::size_t> v) {
  std::string s = "[";
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + std::to_string(v[i]);
  return s + "]";
}

void check_keep(std::size_t n, std::size_t r, const char* who) {
  if (r < 1 || r > n) {
    throw ScheduleError(std::string(who) + ": cannot keep " + std::to_string(r) + " of " +
                        std::to_string(n) + " tokens");
  }
}

}  // namespace

std::string_view to_string(PruneStrategy s) {
  switch (s) {
    case PruneStrategy::kCluster: return "cluster";
    case PruneStrategy::kAttention: return "attention";
    case PruneStrategy::kMotion: return "motion";
    case PruneStrategy::kSampler: return "sampler";
  }
  return "unknown";
}

PruneStrategy parse_strategy(std::string_view name) {
  if (name == "cluster" || name == "tpc") return PruneStrategy::kCluster;
  if (name == "attention" || name == "tpa") return PruneStrategy::kAttention;
  if (name == "motion" || name == "tpmo") return PruneStrategy::kMotion;
  if (name == "sampler" || name == "tps") return PruneStrategy::kSampler;
  throw ConfigError("unknown pruning strategy '" + std::string(name) + "'");
}

void PruneSchedule::validate(const ModelConfig& cfg) const {
  auto fail = [](const std::string& msg) { throw ScheduleError("schedule: " + msg); };
  if (keep.empty()) fail("at least one stage is required");
  if (keep.size() != at_block.size()) {
    fail("r " + list(keep) + " and b " + list(at_block) + " differ in length");
  }
  if (keep.front() >= cfg.frames) {
    fail("r1 = " + std::to_string(keep.front()) + " must be below F = " +
         std::to_string(cfg.frames));
  }
  for (std::size_t m = 0; m < keep.size(); ++m) {
    if (keep[m] < 1) fail("every r must be >= 1");
    if (m > 0 && keep[m] >= keep[m - 1]) fail("r " + list(keep) + " is not strictly decreasing");
    if (m > 0 && at_block[m] <= at_block[m - 1]) {
      fail("b " + list(at_block) + " is not strictly increasing");
    }
  }
  if (at_block.back() >= cfg.blocks) {
    fail("b " + list(at_block) + " exceeds the last block index " +
         std::to_string(cfg.blocks - 1));
  }
  if (strategy == PruneStrategy::kCluster) {
    for (std::size_t m = 0; m < keep.size(); ++m) {
      const std::size_t n = m == 0 ? cfg.frames : keep[m - 1];
      if (cfg.knn_k >= n) {
        fail("knn_k = " + std::to_string(cfg.knn_k) + " needs more than " + std::to_string(n) +
             " tokens at stage " + std::to_string(m + 1));
      }
    }
  }
}

std::vector<std::size_t> SelectionTrace::final_frames() const {
  if (!stages.empty()) return stages.back().frames;
  std::vector<std::size_t> all(input_frames);
  std::iota(all.begin(), all.end(), std::size_t{0});
  return all;
}

std::vector<std::size_t> token_count_profile(const ModelConfig& cfg, const PruneSchedule& sched) {
  sched.validate(cfg);
  std::vector<std::size_t> counts(cfg.blocks);
  std::size_t n = cfg.frames;
  std::size_t m = 0;
  for (std::size_t l = 0; l < cfg.blocks; ++l) {
    if (m < sched.stages() && sched.at_block[m] == l) n = sched.keep[m++];
    counts[l] = n;
  }
  return counts;
}

std::vector<std::size_t> tps_select(std::size_t n, std::size_t r) {
  check_keep(n, r, "tps_select");
  if (r == 1) return {0};
  std::vector<std::size_t> out(r);
  const std::size_t den = 2 * (r - 1);
  for (std::size_t j = 0; j < r; ++j) out[j] = (2 * j * (n - 1) + (r - 1)) / den;
  return out;
}

DensityPeaks dpc_knn_scores(const Matrix& pooled, std::size_t k) {
  const std::size_t n = pooled.rows();
  if (n < 2) throw ParameterError("dpc_knn_scores needs at least 2 tokens");
  if (k < 1 || k >= n) {
    throw ParameterError("dpc_knn_scores: k = " + std::to_string(k) + " must be in [1, " +
                         std::to_string(n - 1) + "]");
  }
  const Matrix sq = pairwise_sq_dist(pooled);
  DensityPeaks out{std::vector<double>(n), std::vector<double>(n), std::vector<double>(n)};

  std::vector<double> others;
  others.reserve(n - 1);
  for (std::size_t i = 0; i < n; ++i) {
    others.clear();
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i) others.push_back(sq(i, j));
    }
    std::partial_sort(others.begin(), others.begin() + static_cast<std::ptrdiff_t>(k),
                      others.end());
    double sum = 0.0;
    for (std::size_t t = 0; t < k; ++t) sum += others[t];
    out.density[i] = std::exp(-sum / static_cast<double>(k));
  }

  const auto& rho = out.density;
  for (std::size_t i = 0; i < n; ++i) {
    double nearest = std::numeric_limits<double>::infinity();
    double farthest = 0.0;
    bool has_denser = false;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      farthest = std::max(farthest, sq(i, j));
      const bool denser = rho[j] > rho[i] || (rho[j] == rho[i] && j < i);
      if (denser) {
        has_denser = true;
        nearest = std::min(nearest, sq(i, j));
      }
    }
    out.distance[i] = std::sqrt(has_denser ? nearest : farthest);
    out.score[i] = rho[i] * out.distance[i];
  }
  return out;
}

std::vector<std::size_t> top_r_ascending(std::span<const double> scores, std::size_t r) {
  check_keep(scores.size(), r, "top_r");
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  order.resize(r);
  std::sort(order.begin(), order.end());
  return order;
}

std::vector<std::size_t> tpc_select(const PoseTokens& tokens, std::size_t r, std::size_t k) {
  check_keep(tokens.frames(), r, "tpc_select");
  const DensityPeaks dp = dpc_knn_scores(mean_pool_spatial(tokens), k);
  return top_r_ascending(dp.score, r);
}

std::vector<double> attention_received(const Matrix& alpha) {
  if (alpha.rows() != alpha.cols()) {
    throw ShapeError("attention matrix must be square, got " + std::to_string(alpha.rows()) +
                     "x" + std::to_string(alpha.cols()));
  }
  std::vector<double> received(alpha.cols(), 0.0);
  for (std::size_t q = 0; q < alpha.rows(); ++q) {
    const auto row = alpha.row(q);
    for (std::size_t t = 0; t < row.size(); ++t) received[t] += row[t];
  }
  return received;
}

std::vector<std::size_t> tpa_select(const Matrix& alpha, std::size_t r) {
  return top_r_ascending(attention_received(alpha), r);
}

Matrix flatten_frames(const PoseSequence2D& poses, std::span<const std::size_t> frames) {
  Matrix out(frames.size(), poses.joints() * 2);
  for (std::size_t i = 0; i < frames.size(); ++i) {
    if (frames[i] >= poses.frames()) throw ShapeError("frame index out of range");
    const auto src = poses.frame(frames[i]);
    std::copy(src.begin(), src.end(), out.row(i).begin());
  }
  return out;
}

MotionMatrix compute_motion(const Matrix& sequence) {
  if (sequence.rows() < 1) throw ShapeError("compute_motion needs at least one frame");
  MotionMatrix m{Matrix(sequence.rows(), sequence.cols())};
  for (std::size_t t = 1; t < sequence.rows(); ++t) {
    const auto cur = sequence.row(t);
    const auto prev = sequence.row(t - 1);
    auto dst = m.values.row(t);
    for (std::size_t c = 0; c < cur.size(); ++c) dst[c] = cur[c] - prev[c];
  }
  return m;
}

std::vector<double> motion_scores(const MotionMatrix& m) {
  std::vector<double> s(m.values.rows(), 0.0);
  for (std::size_t t = 0; t < m.values.rows(); ++t) {
    for (double v : m.values.row(t)) s[t] += std::abs(v);
  }
  return s;
}

std::vector<std::size_t> tpmo_select(const MotionMatrix& m, std::size_t r) {
  return top_r_ascending(motion_scores(m), r);
}

ScheduleResult run_schedule(PoseTokens x, const PruneSchedule& sched, const ScheduleContext& ctx) {
  const ModelWeights& w = ctx.weights;
  const ModelConfig& cfg = w.config;
  sched.validate(cfg);
  if (x.frames() != cfg.frames) {
    throw ShapeError("run_schedule expects " + std::to_string(cfg.frames) + " frames, got " +
                     std::to_string(x.frames()));
  }
  if (sched.strategy == PruneStrategy::kMotion) {
    if (!ctx.poses) throw ScheduleError("motion strategy requires the 2D input sequence");
    if (ctx.poses->frames() != cfg.frames) {
      throw ShapeError("motion input frame count does not match the model");
    }
  }
  if (ctx.pinned_frame && *ctx.pinned_frame >= cfg.frames) {
    throw ScheduleError("pinned frame " + std::to_string(*ctx.pinned_frame) + " out of range");
  }

  ScheduleResult result;
  SelectionTrace& trace = result.trace;
  trace.input_frames = cfg.frames;
  std::vector<std::size_t> frames(cfg.frames);
  std::iota(frames.begin(), frames.end(), std::size_t{0});

  std::size_t stage = 0;
  for (std::size_t l = 0; l < cfg.blocks; ++l) {
    if (stage < sched.stages() && sched.at_block[stage] == l) {
      const std::size_t n = x.frames();
      const std::size_t r = sched.keep[stage];
      StageTrace st;
      st.block = l;
      switch (sched.strategy) {
        case PruneStrategy::kSampler:
          st.local = tps_select(n, r);
          break;
        case PruneStrategy::kCluster: {
          const DensityPeaks dp = dpc_knn_scores(mean_pool_spatial(x), cfg.knn_k);
          st.scores = dp.score;
          st.local = top_r_ascending(st.scores, r);
          break;
        }
        case PruneStrategy::kAttention:
          st.scores = attention_received(average_attention(temporal_attention_logits(x, w, l)));
          st.local = top_r_ascending(st.scores, r);
          break;
        case PruneStrategy::kMotion:
          st.scores = motion_scores(compute_motion(flatten_frames(*ctx.poses, frames)));
          st.local = top_r_ascending(st.scores, r);
          break;
      }
      if (ctx.pinned_frame) {
        const auto pos = std::lower_bound(frames.begin(), frames.end(), *ctx.pinned_frame);
        const auto local = static_cast<std::size_t>(pos - frames.begin());
        const auto at = std::lower_bound(st.local.begin(), st.local.end(), local);
        if (at == st.local.end() || *at != local) {
          st.local.insert(at, local);
          st.pinned_inserted = true;
        }
      }
      st.frames.reserve(st.local.size());
      for (std::size_t i : st.local) st.frames.push_back(frames[i]);
      x = x.gather(st.local);
      frames = st.frames;
      trace.stages.push_back(std::move(st));
      ++stage;
    }
    trace.block_tokens.push_back(x.frames());
    x = transformer_block(x, w, l).tokens;
  }
  result.tokens = std::move(x);
  return result;
}

}  // namespace h2ot

// Copyright 2026 The H2OT Engine Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "h2ot/errors.hpp"
#include "h2ot/oracle.hpp"
#include "h2ot/token_pruning.hpp"
#include "h2ot/vpt_model.hpp"

namespace h2ot {
namespace {

using Idx = std::vector<std::size_t>;

Matrix column(std::initializer_list<double> values) {
  Matrix m(values.size(), 1);
  std::size_t i = 0;
  for (double v : values) m(i++, 0) = v;
  return m;
}

Idx iota(std::size_t n) {
  Idx v(n);
  std::iota(v.begin(), v.end(), 0);
  return v;
}

TEST(TpsSelect, SmallCases) {
  EXPECT_EQ(tps_select(9, 3), (Idx{0, 4, 8}));
  EXPECT_EQ(tps_select(5, 5), iota(5));
  EXPECT_EQ(tps_select(7, 1), (Idx{0}));
}

TEST(TpsSelect, MixsteFirstStage) {
  const Idx s = tps_select(243, 121);
  ASSERT_EQ(s.size(), 121u);
  EXPECT_EQ(s[0], 0u);
  EXPECT_EQ(s[1], 2u);
  EXPECT_EQ(s[2], 4u);
  EXPECT_EQ(s[30], 61u);
  EXPECT_EQ(s.back(), 242u);
  EXPECT_EQ(s, oracle::uniform_sample(243, 121));
}

TEST(TpsSelect, MatchesFloatingOracle) {
  for (std::size_t n = 1; n <= 400; n += 7) {
    for (std::size_t r = 1; r <= n; r += 3) {
      ASSERT_EQ(tps_select(n, r), oracle::uniform_sample(n, r)) << n << " " << r;
    }
  }
}

TEST(TpsSelect, TooManyThrows) { EXPECT_THROW(tps_select(4, 5), ScheduleError); }

TEST(DpcKnn, HandExample) {
  const DensityPeaks dp = dpc_knn_scores(column({0, 1, 10, 11.5}), 1);
  const double e1 = std::exp(-1.0), e225 = std::exp(-2.25);
  const double rho[] = {e1, e1, e225, e225};
  const double delta[] = {11.5, 1.0, 9.0, 1.5};
  const double score[] = {4.231, 0.368, 0.949, 0.158};
  for (std::size_t i = 0; i < 4; ++i) {
    EXPECT_DOUBLE_EQ(dp.density[i], rho[i]);
    EXPECT_DOUBLE_EQ(dp.distance[i], delta[i]);
    EXPECT_NEAR(dp.score[i], score[i], 1e-3);
  }
}

TEST(DpcKnn, IdenticalTokensScoreZero) {
  Matrix m(5, 3, std::vector<double>(15, 0.7));
  const DensityPeaks dp = dpc_knn_scores(m, 2);
  for (std::size_t i = 0; i < 5; ++i) {
    EXPECT_EQ(dp.density[i], 1.0);
    EXPECT_EQ(dp.distance[i], 0.0);
    EXPECT_EQ(dp.score[i], 0.0);
  }
}

TEST(DpcKnn, RangesHold) {
  Rng rng(1);
  for (int t = 0; t < 50; ++t) {
    Matrix m(10, 4);
    for (double& v : m.data()) v = rng.uniform(-3, 3);
    const DensityPeaks dp = dpc_knn_scores(m, 3);
    for (std::size_t i = 0; i < 10; ++i) {
      EXPECT_GT(dp.density[i], 0.0);
      EXPECT_LE(dp.density[i], 1.0);
      EXPECT_GE(dp.distance[i], 0.0);
    }
  }
}

TEST(DpcKnn, TooManyNeighborsThrows) {
  EXPECT_THROW(dpc_knn_scores(column({0, 1, 2}), 3), ParameterError);
  EXPECT_THROW(dpc_knn_scores(column({0, 1, 2}), 0), ParameterError);
}

TEST(DpcKnn, MatchesQuadraticOracle) {
  Rng rng(2);
  for (int t = 0; t < 200; ++t) {
    const std::size_t n = rng.uniform_index(2, 15);
    const std::size_t k = rng.uniform_index(1, n - 1);
    Matrix m(n, 3);
    for (double& v : m.data()) v = rng.uniform(-1, 1);
    oracle::Points pts(n);
    for (std::size_t i = 0; i < n; ++i) pts[i].assign(m.row(i).begin(), m.row(i).end());
    const DensityPeaks dp = dpc_knn_scores(m, k);
    const auto ref = oracle::density_peaks(pts, k);
    for (std::size_t i = 0; i < n; ++i) {
      EXPECT_NEAR(dp.density[i], ref.density[i], 1e-12);
      EXPECT_NEAR(dp.distance[i], ref.distance[i], 1e-12);
    }
  }
}

PoseTokens tokens_from_column(std::initializer_list<double> values) {
  PoseTokens t(values.size(), 1, 1);
  std::size_t i = 0;
  for (double v : values) t.at(i++, 0, 0) = v;
  return t;
}

TEST(TpcSelect, HandExample) {
  EXPECT_EQ(tpc_select(tokens_from_column({0, 1, 10, 11.5}), 2, 1), (Idx{0, 2}));
}

TEST(TpcSelect, KeepAll) {
  EXPECT_EQ(tpc_select(tokens_from_column({3, 1, 4, 1, 5}), 5, 2), iota(5));
}

TEST(TpcSelect, OnePerSeparatedCluster) {
  Rng rng(3);
  for (int t = 0; t < 50; ++t) {
    PoseTokens x(8, 2, 2);
    for (std::size_t n = 0; n < 8; ++n) {
      const double centre = n < 4 ? 0.0 : 100.0;
      for (double& v : x.token(n, 0)) v = centre + rng.uniform(-0.01, 0.01);
      for (double& v : x.token(n, 1)) v = centre + rng.uniform(-0.01, 0.01);
    }
    const Idx s = tpc_select(x, 2, 2);
    ASSERT_EQ(s.size(), 2u);
    EXPECT_LT(s[0], 4u);
    EXPECT_GE(s[1], 4u);
    EXPECT_EQ(s, oracle::cluster_select(x, 2, 2));
  }
}

TEST(TopR, TiesGoToLowerIndex) {
  const std::vector<double> s = {1, 3, 3, 0, 3};
  EXPECT_EQ(top_r_ascending(s, 2), (Idx{1, 2}));
  EXPECT_EQ(top_r_ascending(s, 4), (Idx{0, 1, 2, 4}));
}

TEST(TpaSelect, ColumnSums) {
  const Matrix a = Matrix::from_rows({{.5, .3, .2}, {.2, .6, .2}, {.1, .3, .6}});
  const auto sums = attention_received(a);
  EXPECT_NEAR(sums[0], 0.8, 1e-12);
  EXPECT_NEAR(sums[1], 1.2, 1e-12);
  EXPECT_NEAR(sums[2], 1.0, 1e-12);
  EXPECT_EQ(tpa_select(a, 2), (Idx{1, 2}));
}

TEST(TpaSelect, UniformAttentionTakesFirstIndices) {
  Matrix a(6, 6, std::vector<double>(36, 1.0 / 6.0));
  EXPECT_EQ(tpa_select(a, 3), (Idx{0, 1, 2}));
  EXPECT_EQ(tpa_select(a, 6), iota(6));
}

TEST(TpaSelect, NonSquareThrows) { EXPECT_THROW(tpa_select(Matrix(2, 3), 1), ShapeError); }

TEST(Motion, ConstantSequenceHasNoMotion) {
  const MotionMatrix m = compute_motion(Matrix(4, 6, std::vector<double>(24, 2.5)));
  for (double v : m.values.data()) EXPECT_EQ(v, 0.0);
}

TEST(Motion, Differences) {
  const MotionMatrix m = compute_motion(column({0, 0, 5, 5}));
  EXPECT_EQ(m.values, column({0, 0, 5, 0}));
}

TEST(Motion, SingleFrame) {
  const MotionMatrix m = compute_motion(Matrix(1, 4, {1, 2, 3, 4}));
  EXPECT_EQ(m.values, Matrix(1, 4));
}

TEST(TpmoSelect, HandExample) {
  const MotionMatrix m{column({0, 0, 5, 0})};
  EXPECT_EQ(motion_scores(m), (std::vector<double>{0, 0, 5, 0}));
  EXPECT_EQ(tpmo_select(m, 2), (Idx{0, 2}));
  EXPECT_EQ(tpmo_select(m, 4), iota(4));
}

TEST(TpmoSelect, IncreasingMotionKeepsTail) {
  const MotionMatrix m{column({0, 1, 2, 3, 4})};
  EXPECT_EQ(tpmo_select(m, 2), (Idx{3, 4}));
}

TEST(TpmoSelect, AbsoluteValues) {
  const MotionMatrix m{Matrix::from_rows({{0, 0}, {-3, 1}, {2, 1}})};
  const auto s = motion_scores(m);
  EXPECT_EQ(s[1], 4.0);
  EXPECT_EQ(s[2], 3.0);
}

ModelConfig mixste_like(std::size_t dim = 8) {
  ModelConfig cfg;
  cfg.frames = 243;
  cfg.joints = 17;
  cfg.blocks = 8;
  cfg.dim = dim;
  cfg.heads = 2;
  return cfg;
}

TEST(Schedule, MixsteTokenProfile) {
  const PruneSchedule s{{121, 81}, {0, 3}, PruneStrategy::kSampler};
  EXPECT_EQ(token_count_profile(mixste_like(), s), (Idx{121, 121, 121, 81, 81, 81, 81, 81}));
}

TEST(Schedule, ValidationRejectsBadPlans) {
  const ModelConfig cfg = mixste_like();
  const auto bad = [&](PruneSchedule s) { EXPECT_THROW(s.validate(cfg), ScheduleError); };
  bad({{243}, {0}, PruneStrategy::kSampler});           // r1 must be < F
  bad({{121, 121}, {0, 3}, PruneStrategy::kSampler});   // strictly decreasing
  bad({{121, 81}, {3, 3}, PruneStrategy::kSampler});    // strictly increasing blocks
  bad({{121, 81}, {0, 8}, PruneStrategy::kSampler});    // block out of range
  bad({{121}, {0, 3}, PruneStrategy::kSampler});        // length mismatch
  bad({{0}, {0}, PruneStrategy::kSampler});             // empty stage
  bad({{}, {}, PruneStrategy::kSampler});               // no stages
  PruneSchedule ok{{242}, {0}, PruneStrategy::kSampler};
  EXPECT_NO_THROW(ok.validate(cfg));
}

TEST(Schedule, ClusterNeedsMoreTokensThanNeighbors) {
  ModelConfig cfg = mixste_like();
  cfg.knn_k = 2;
  PruneSchedule s{{100, 2, 1}, {0, 1, 2}, PruneStrategy::kCluster};
  EXPECT_THROW(s.validate(cfg), ScheduleError);
  s.keep = {100, 3, 1};
  EXPECT_NO_THROW(s.validate(cfg));
}

TEST(Schedule, SamplerComposesUniformSampling) {
  const ModelConfig cfg = mixste_like();
  Rng rng(4);
  const ModelWeights w = init_weights(cfg, rng);
  PoseSequence2D p(cfg.frames, cfg.joints);
  for (double& v : p.data()) v = rng.uniform(-1, 1);
  const PruneSchedule s{{121, 81}, {0, 3}, PruneStrategy::kSampler};
  const ScheduleResult r = run_schedule(embed_poses(p, w), s, {w, &p, {}});
  const Idx first = tps_select(243, 121);
  Idx second;
  for (std::size_t i : tps_select(121, 81)) second.push_back(first[i]);
  ASSERT_EQ(r.trace.stages.size(), 2u);
  EXPECT_EQ(r.trace.stages[0].frames, first);
  EXPECT_EQ(r.trace.stages[1].frames, second);
  EXPECT_EQ(r.trace.final_frames(), second);
  EXPECT_EQ(r.trace.block_tokens, (Idx{121, 121, 121, 81, 81, 81, 81, 81}));
  EXPECT_EQ(r.tokens.frames(), 81u);
}

TEST(Schedule, InvalidScheduleFailsBeforeCompute) {
  const ModelConfig cfg = mixste_like();
  Rng rng(5);
  const ModelWeights w = init_weights(cfg, rng);
  const PruneSchedule s{{81, 121}, {0, 3}, PruneStrategy::kSampler};
  EXPECT_THROW(run_schedule(PoseTokens(243, 17, cfg.dim), s, {w, nullptr, {}}), ScheduleError);
}

TEST(Schedule, MotionNeedsPoses) {
  ModelConfig cfg = mixste_like();
  cfg.frames = 9;
  cfg.blocks = 2;
  Rng rng(6);
  const ModelWeights w = init_weights(cfg, rng);
  const PruneSchedule s{{4}, {1}, PruneStrategy::kMotion};
  EXPECT_THROW(run_schedule(PoseTokens(9, 17, cfg.dim), s, {w, nullptr, {}}), Error);
}

TEST(Schedule, EveryStrategyKeepsAscendingFrames) {
  ModelConfig cfg = mixste_like();
  cfg.frames = 31;
  cfg.joints = 4;
  cfg.blocks = 4;
  Rng rng(7);
  const ModelWeights w = init_weights(cfg, rng);
  PoseSequence2D p(cfg.frames, cfg.joints);
  for (double& v : p.data()) v = rng.uniform(-1, 1);
  for (PruneStrategy st : {PruneStrategy::kCluster, PruneStrategy::kAttention,
                           PruneStrategy::kMotion, PruneStrategy::kSampler}) {
    const PruneSchedule s{{20, 9, 4}, {0, 2, 3}, st};
    const ScheduleResult r = run_schedule(embed_poses(p, w), s, {w, &p, {}});
    ASSERT_EQ(r.trace.stages.size(), 3u) << to_string(st);
    std::size_t expected = 20;
    for (const StageTrace& stage : r.trace.stages) {
      EXPECT_EQ(stage.frames.size(), expected);
      EXPECT_TRUE(std::is_sorted(stage.frames.begin(), stage.frames.end()));
      EXPECT_EQ(std::adjacent_find(stage.frames.begin(), stage.frames.end()), stage.frames.end());
      expected = expected == 20 ? 9 : 4;
    }
    EXPECT_EQ(r.tokens.frames(), 4u);
  }
}

TEST(Schedule, PinnedFrameIsReinserted) {
  ModelConfig cfg = mixste_like();
  cfg.frames = 10;
  cfg.joints = 2;
  cfg.blocks = 1;
  Rng rng(8);
  const ModelWeights w = init_weights(cfg, rng);
  // tps_select(10, 3) = {0, 5, 9}; pin 4, which the sampler skips.
  const PruneSchedule s{{3}, {0}, PruneStrategy::kSampler};
  const ScheduleResult r = run_schedule(PoseTokens(10, 2, cfg.dim), s, {w, nullptr, 4});
  EXPECT_EQ(r.trace.stages[0].frames, (Idx{0, 4, 5, 9}));
  EXPECT_TRUE(r.trace.stages[0].pinned_inserted);
  EXPECT_EQ(r.tokens.frames(), 4u);
  const ScheduleResult q = run_schedule(PoseTokens(10, 2, cfg.dim), s, {w, nullptr, 5});
  EXPECT_EQ(q.trace.stages[0].frames, (Idx{0, 5, 9}));
  EXPECT_FALSE(q.trace.stages[0].pinned_inserted);
}

TEST(Strategy, ParseNames) {
  EXPECT_EQ(parse_strategy("cluster"), PruneStrategy::kCluster);
  EXPECT_EQ(parse_strategy("tpa"), PruneStrategy::kAttention);
  EXPECT_EQ(parse_strategy("tpmo"), PruneStrategy::kMotion);
  EXPECT_EQ(parse_strategy(to_string(PruneStrategy::kSampler)), PruneStrategy::kSampler);
  EXPECT_THROW(parse_strategy("random"), ConfigError);
}

}  // namespace
}  // namespace h2ot

// Copyright 2026 The H2OT Engine Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <sstream>

#include "h2ot/errors.hpp"
#include "h2ot/oracle.hpp"
#include "h2ot/vpt_model.hpp"

namespace h2ot {
namespace {

ModelConfig small_config(std::size_t frames = 5, std::size_t joints = 3) {
  ModelConfig cfg;
  cfg.frames = frames;
  cfg.joints = joints;
  cfg.blocks = 2;
  cfg.dim = 8;
  cfg.heads = 2;
  return cfg;
}

PoseSequence2D random_poses(Rng& rng, std::size_t frames, std::size_t joints) {
  PoseSequence2D p(frames, joints);
  for (double& v : p.data()) v = rng.uniform(-1, 1);
  return p;
}

void zero_block(BlockWeights& b) {
  for (TransformerUnit* u : {&b.spatial, &b.temporal}) {
    for (Linear* l : {&u->attn.query, &u->attn.key, &u->attn.value, &u->attn.output, &u->fc1,
                      &u->fc2}) {
      for (double& v : l->weight.data()) v = 0.0;
      for (double& v : l->bias) v = 0.0;
    }
  }
}

TEST(EmbedPoses, ZeroInputGivesBias) {
  ModelConfig cfg = small_config();
  ModelWeights w(cfg);
  for (std::size_t c = 0; c < cfg.dim; ++c) w.embed.bias[c] = 0.1 * static_cast<double>(c);
  const PoseTokens t = embed_poses(PoseSequence2D(cfg.frames, cfg.joints), w);
  for (std::size_t n = 0; n < cfg.frames; ++n) {
    for (std::size_t j = 0; j < cfg.joints; ++j) {
      for (std::size_t c = 0; c < cfg.dim; ++c) EXPECT_EQ(t.at(n, j, c), w.embed.bias[c]);
    }
  }
}

TEST(EmbedPoses, HandLinearMap) {
  ModelConfig cfg;
  cfg.frames = 1;
  cfg.joints = 1;
  cfg.dim = 1;
  cfg.heads = 1;
  ModelWeights w(cfg);
  w.embed.weight(0, 0) = 1.0;
  w.embed.weight(1, 0) = 0.0;
  PoseSequence2D p(1, 1, {5.0, 7.0});
  EXPECT_EQ(embed_poses(p, w).at(0, 0, 0), 5.0);
}

TEST(EmbedPoses, FramePermutationEquivariantWithoutTemporalTable) {
  Rng rng(2);
  const ModelConfig cfg = small_config(6, 2);
  ModelWeights w = init_weights(cfg, rng);
  for (double& v : w.temporal_pos.data()) v = 0.0;
  const PoseSequence2D p = random_poses(rng, cfg.frames, cfg.joints);
  const std::size_t perm[] = {3, 0, 5, 1, 4, 2};
  PoseSequence2D q(cfg.frames, cfg.joints);
  for (std::size_t f = 0; f < cfg.frames; ++f) {
    const auto src = p.frame(perm[f]);
    std::copy(src.begin(), src.end(), q.frame(f).begin());
  }
  const PoseTokens a = embed_poses(p, w);
  const PoseTokens b = embed_poses(q, w);
  for (std::size_t f = 0; f < cfg.frames; ++f) {
    for (std::size_t j = 0; j < cfg.joints; ++j) {
      for (std::size_t c = 0; c < cfg.dim; ++c) EXPECT_EQ(b.at(f, j, c), a.at(perm[f], j, c));
    }
  }
}

TEST(EmbedPoses, ShapeMismatchThrows) {
  Rng rng(1);
  const ModelConfig cfg = small_config();
  const ModelWeights w = init_weights(cfg, rng);
  EXPECT_THROW(embed_poses(PoseSequence2D(cfg.frames, cfg.joints + 1), w), ShapeError);
  EXPECT_THROW(embed_poses(PoseSequence2D(cfg.frames + 1, cfg.joints), w), ShapeError);
}

TEST(TransformerBlock, SingletonAttentionIsOne) {
  Rng rng(4);
  const ModelConfig cfg = small_config(1, 1);
  const ModelWeights w = init_weights(cfg, rng);
  const BlockOutput out = transformer_block(embed_poses(random_poses(rng, 1, 1), w), w, 0);
  ASSERT_EQ(out.temporal_attention.rows(), 1u);
  ASSERT_EQ(out.temporal_attention.cols(), 1u);
  EXPECT_DOUBLE_EQ(out.temporal_attention(0, 0), 1.0);
}

TEST(TransformerBlock, ZeroWeightsPassInputThrough) {
  Rng rng(5);
  const ModelConfig cfg = small_config();
  ModelWeights w = init_weights(cfg, rng);
  zero_block(w.blocks[0]);
  const PoseTokens x = embed_poses(random_poses(rng, cfg.frames, cfg.joints), w);
  EXPECT_EQ(transformer_block(x, w, 0).tokens, x);
}

TEST(TransformerBlock, AttentionRowsSumToOne) {
  Rng rng(6);
  const ModelConfig cfg = small_config(3, 4);
  const ModelWeights w = init_weights(cfg, rng);
  const BlockOutput out = transformer_block(embed_poses(random_poses(rng, 3, 4), w), w, 1);
  ASSERT_EQ(out.temporal_attention.rows(), 3u);
  for (std::size_t r = 0; r < 3; ++r) {
    double s = 0.0;
    for (double v : out.temporal_attention.row(r)) s += v;
    EXPECT_NEAR(s, 1.0, 1e-6);
  }
}

TEST(TransformerBlock, NonFiniteReportsBlockIndex) {
  Rng rng(7);
  const ModelConfig cfg = small_config();
  ModelWeights w = init_weights(cfg, rng);
  w.blocks[1].temporal.fc2.bias[0] = std::numeric_limits<double>::infinity();
  PoseTokens x = embed_poses(random_poses(rng, cfg.frames, cfg.joints), w);
  x = transformer_block(x, w, 0).tokens;
  try {
    transformer_block(x, w, 1);
    FAIL() << "expected NumericError";
  } catch (const NumericError& e) {
    EXPECT_EQ(e.block(), 1);
  }
}

TEST(TransformerBlock, ProbeMatchesAttentionBehindIdentitySpatialUnit) {
  Rng rng(8);
  const ModelConfig cfg = small_config(7, 3);
  ModelWeights w = init_weights(cfg, rng);
  for (Linear* l : {&w.blocks[0].spatial.attn.output, &w.blocks[0].spatial.fc2}) {
    for (double& v : l->weight.data()) v = 0.0;
  }
  const PoseTokens x = embed_poses(random_poses(rng, 7, 3), w);
  const Matrix from_logits = average_attention(temporal_attention_logits(x, w, 0));
  const Matrix from_block = transformer_block(x, w, 0).temporal_attention;
  ASSERT_EQ(from_logits.rows(), from_block.rows());
  for (std::size_t i = 0; i < from_block.size(); ++i) {
    EXPECT_NEAR(from_logits.data()[i], from_block.data()[i], 1e-12);
  }
}

TEST(MultiHeadAttention, ShiftedLogitsGiveSameAverage) {
  Rng rng(9);
  const ModelConfig cfg = small_config(9, 2);
  const ModelWeights w = init_weights(cfg, rng);
  const PoseTokens x = embed_poses(random_poses(rng, 9, 2), w);
  const auto logits = temporal_attention_logits(x, w, 0);
  const Matrix a = average_attention(logits);
  const Matrix b = average_attention(logits, 37.5);
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(a.data()[i], b.data()[i], 1e-12);
}

TEST(RegressionHead, ZeroTokensGiveBias) {
  const ModelConfig cfg = small_config();
  ModelWeights w(cfg);
  w.head.bias = {1.0, -2.0, 0.5};
  const Pose3DSequence out = regression_head(PoseTokens(4, cfg.joints, cfg.dim), w);
  for (std::size_t f = 0; f < 4; ++f) {
    for (std::size_t j = 0; j < cfg.joints; ++j) {
      EXPECT_EQ(out.at(f, j, 0), 1.0);
      EXPECT_EQ(out.at(f, j, 1), -2.0);
      EXPECT_EQ(out.at(f, j, 2), 0.5);
    }
  }
}

TEST(RegressionHead, HandMap) {
  ModelConfig cfg;
  cfg.frames = 1;
  cfg.joints = 1;
  cfg.dim = 1;
  cfg.heads = 1;
  ModelWeights w(cfg);
  for (std::size_t k = 0; k < 3; ++k) w.head.weight(0, k) = 1.0;
  PoseTokens t(1, 1, 1);
  t.at(0, 0, 0) = 2.0;
  const Pose3DSequence out = regression_head(t, w);
  EXPECT_EQ(out.at(0, 0, 0), 2.0);
  EXPECT_EQ(out.at(0, 0, 1), 2.0);
  EXPECT_EQ(out.at(0, 0, 2), 2.0);
}

TEST(RegressionHead, PreservesFrameCount) {
  Rng rng(10);
  ModelConfig cfg = small_config(243, 17);
  const ModelWeights w = init_weights(cfg, rng);
  EXPECT_EQ(regression_head(PoseTokens(81, 17, cfg.dim), w).frames(), 81u);
}

TEST(RegressionHead, ShapeMismatchThrows) {
  const ModelConfig cfg = small_config();
  const ModelWeights w(cfg);
  EXPECT_THROW(regression_head(PoseTokens(2, cfg.joints, cfg.dim + 1), w), ShapeError);
}

TEST(InitWeights, SameSeedIsBitIdentical) {
  const ModelConfig cfg = small_config();
  Rng a(123), b(123), c(124);
  const ModelWeights wa = init_weights(cfg, a, true);
  EXPECT_TRUE(wa == init_weights(cfg, b, true));
  EXPECT_FALSE(wa == init_weights(cfg, c, true));
}

TEST(InitWeights, RecoveryQueriesAreZero) {
  Rng rng(1);
  const ModelWeights w = init_weights(small_config(), rng, true);
  ASSERT_TRUE(w.tra.has_value());
  for (double v : w.tra->queries.data()) EXPECT_EQ(v, 0.0);
}

TEST(InitWeights, RangesFollowFanIn) {
  Rng rng(2);
  const ModelConfig cfg = small_config();
  const ModelWeights w = init_weights(cfg, rng);
  const double bound = 1.0 / std::sqrt(static_cast<double>(cfg.dim));
  for (double v : w.blocks[0].spatial.attn.query.weight.data()) EXPECT_LE(std::abs(v), bound);
  for (double v : w.blocks[0].spatial.attn.query.bias) EXPECT_EQ(v, 0.0);
  for (double v : w.blocks[0].spatial.norm_attn.gain) EXPECT_EQ(v, 1.0);
  for (double v : w.temporal_pos.data()) EXPECT_LE(std::abs(v), 0.1);
}

TEST(InitWeights, FullWidthCountMatchesFormula) {
  ModelConfig cfg;
  cfg.frames = 243;
  cfg.blocks = 8;
  cfg.dim = 512;
  Rng rng(0);
  const ModelWeights w = init_weights(cfg, rng);
  const std::size_t c = 512, r = 2;
  const std::size_t unit = (4 + 2 * r) * c * c + (9 + r) * c;
  const std::size_t formula = 3 * c + 17 * c + 243 * c + 8 * 2 * unit + 3 * c + 3;
  EXPECT_EQ(oracle::enumerate_parameters(w), formula);
  EXPECT_EQ(analytic_parameter_count(cfg), formula);
  EXPECT_EQ(w.parameter_count(), formula);
}

TEST(WeightFile, RoundTripIsExact) {
  Rng rng(77);
  const ModelWeights w = init_weights(small_config(), rng, true);
  std::stringstream buf;
  save_weights(w, buf);
  EXPECT_TRUE(load_weights(buf) == w);
}

TEST(WeightFile, TruncatedFileIsParseError) {
  Rng rng(78);
  const ModelWeights w = init_weights(small_config(), rng);
  std::stringstream buf;
  save_weights(w, buf);
  std::string bytes = buf.str();
  bytes.resize(bytes.size() - 9);
  std::stringstream cut(bytes);
  EXPECT_THROW(load_weights(cut), ParseError);
}

TEST(WeightFile, BadMagicIsParseError) {
  std::stringstream buf("NOTAWEIGHTFILE");
  EXPECT_THROW(load_weights(buf), ParseError);
}

}  // namespace
}  // namespace h2ot

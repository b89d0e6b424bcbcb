// Copyright 2026 The H2OT Engine Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <limits>

#include "h2ot/cli_io.hpp"
#include "h2ot/errors.hpp"
#include "h2ot/numkernel.hpp"

namespace h2ot {
namespace {

namespace fs = std::filesystem;
using Idx = std::vector<std::size_t>;

constexpr const char* kConfig = R"(# desk-scale mixste
frames = 243
joints = 17
blocks = 8
dim = 64
heads = 8
mode = seq2seq
recovery = tri
strategy = tps
r = [121, 81]
b = [0, 3]
seed = 7
input = clip.txt
)";

TEST(RunConfig, ParsesKeyValueLines) {
  const RunConfig cfg = parse_run_config(kConfig);
  EXPECT_EQ(cfg.pipeline.model.frames, 243u);
  EXPECT_EQ(cfg.pipeline.model.dim, 64u);
  EXPECT_EQ(cfg.pipeline.schedule.keep, (Idx{121, 81}));
  EXPECT_EQ(cfg.pipeline.schedule.at_block, (Idx{0, 3}));
  EXPECT_EQ(cfg.pipeline.schedule.strategy, PruneStrategy::kSampler);
  EXPECT_EQ(cfg.pipeline.recovery, Recovery::kInterpolation);
  EXPECT_EQ(cfg.seed, 7u);
  EXPECT_EQ(cfg.input, "clip.txt");
}

TEST(RunConfig, FormatRoundTrips) {
  const RunConfig cfg = parse_run_config(kConfig);
  EXPECT_EQ(parse_run_config(format_run_config(cfg)), cfg);
  for (const auto& name : preset_names()) {
    const RunConfig p = preset(name);
    EXPECT_EQ(parse_run_config(format_run_config(p)), p) << name;
  }
}

TEST(RunConfig, SyntaxErrorsNameTheLine) {
  try {
    parse_run_config("frames = 9\nblocks 3\n");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find(":2"), std::string::npos) << e.what();
  }
  EXPECT_THROW(parse_run_config("frames = 9\nframes = 9\nblocks=1\ndim=8\nr=[4]\nb=[0]\n"),
               ParseError);
  EXPECT_THROW(parse_run_config("frames = 9\ncolour = red\n"), ParseError);
  EXPECT_THROW(parse_run_config("frames = 9\nblocks=1\ndim=8\nr=[4\nb=[0]\n"), ParseError);
  EXPECT_THROW(parse_run_config("frames = nine\n"), ParseError);
  EXPECT_THROW(parse_run_config("frames = 9\nblocks = 1\ndim = 8\nr = [4]\n"), ParseError);
}

TEST(RunConfig, InvalidCombinationsRejectedAtLoad) {
  const std::string base = "frames = 9\nblocks = 2\ndim = 8\nheads = 2\n";
  EXPECT_THROW(parse_run_config(base + "r = [9]\nb = [0]\n"), ScheduleError);
  EXPECT_THROW(parse_run_config(base + "r = [5, 6]\nb = [0, 1]\n"), ScheduleError);
  EXPECT_THROW(parse_run_config(base + "r = [5]\nb = [0]\nstrategy = tpc\n"), ConfigError);
  EXPECT_THROW(parse_run_config(base + "r = [5]\nb = [0]\nrecovery = none\n"), ConfigError);
  EXPECT_THROW(parse_run_config(base + "r = [5]\nb = [0]\nmode = seq2frame\n"), ConfigError);
  EXPECT_THROW(parse_run_config("frames = 9\nblocks = 2\ndim = 8\nheads = 3\nr = [5]\nb = [0]\n"),
               ConfigError);
  EXPECT_NO_THROW(
      parse_run_config(base + "r = [5]\nb = [0]\nmode = seq2frame\nrecovery = none\n"));
}

TEST(Presets, MatchPublishedSettings) {
  const auto mix = preset("mixste").pipeline;
  EXPECT_EQ(mix.model.frames, 243u);
  EXPECT_EQ(mix.model.blocks, 8u);
  EXPECT_EQ(mix.model.dim, 512u);
  EXPECT_EQ(mix.schedule.keep, (Idx{121, 81}));
  EXPECT_EQ(mix.schedule.at_block, (Idx{0, 3}));
  const auto mh = preset("mhformer").pipeline;
  EXPECT_EQ(mh.model.frames, 351u);
  EXPECT_EQ(mh.mode, PipelineMode::kSeq2Frame);
  EXPECT_EQ(mh.schedule.keep, (Idx{175, 117}));
  EXPECT_EQ(preset("motionbert").pipeline.schedule.at_block, (Idx{0, 1}));
  EXPECT_EQ(preset("motionagformer").pipeline.schedule.at_block, (Idx{0, 7}));
  EXPECT_THROW(preset("vitpose"), ConfigError);
}

TEST(Presets, ShippedFilesMatchBuiltIns) {
  const fs::path dir = fs::path(H2OT_SOURCE_DIR) / "configs";
  for (const auto& name : preset_names()) {
    const fs::path file = dir / (name + ".cfg");
    ASSERT_TRUE(fs::exists(file)) << file;
    EXPECT_EQ(load_run_config(file.string()), preset(name)) << name;
  }
}

TEST(SeedOverride, EnvironmentWins) {
  RunConfig cfg = preset("mixste");
  ::setenv(kSeedEnvVar, "31337", 1);
  apply_seed_override(cfg);
  EXPECT_EQ(cfg.seed, 31337u);
  ::setenv(kSeedEnvVar, "not-a-number", 1);
  EXPECT_THROW(apply_seed_override(cfg), ParseError);
  ::unsetenv(kSeedEnvVar);
  cfg.seed = 5;
  apply_seed_override(cfg);
  EXPECT_EQ(cfg.seed, 5u);
}

TEST(SequenceText, HeaderlessTwoFrames) {
  const AnySequence s = parse_sequence_text("0,0\n1,1", std::size_t{1});
  ASSERT_TRUE(std::holds_alternative<PoseSequence2D>(s));
  const auto& p = std::get<PoseSequence2D>(s);
  EXPECT_EQ(p.frames(), 2u);
  EXPECT_EQ(p.joints(), 1u);
  EXPECT_EQ(p.at(1, 0, 0), 1.0);
  EXPECT_EQ(p.at(1, 0, 1), 1.0);
}

TEST(SequenceText, HeaderlessWithoutHintIs2D) {
  const auto& p = std::get<PoseSequence2D>(parse_sequence_text("1,2,3,4\n5,6,7,8\n"));
  EXPECT_EQ(p.joints(), 2u);
}

TEST(SequenceText, RoundTripIsBitwise) {
  Rng rng(1);
  Pose3DSequence p(7, 5);
  for (double& v : p.data()) v = rng.uniform(-1e3, 1e3);
  p.data()[3] = 0.1;
  p.data()[4] = -std::numeric_limits<double>::denorm_min();
  const AnySequence back = parse_sequence_text(format_sequence_text(p));
  EXPECT_EQ(std::get<Pose3DSequence>(back), p);
}

TEST(SequenceText, MalformedRowsNameTheLine) {
  try {
    parse_sequence_text("# h2ot-sequence frames=2 joints=1 dims=2\n0,0\n1,x\n");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find(":3"), std::string::npos) << e.what();
  }
  EXPECT_THROW(parse_sequence_text("# h2ot-sequence frames=3 joints=1 dims=2\n0,0\n1,1\n"),
               ParseError);
  EXPECT_THROW(parse_sequence_text("0,0\n1,1,1\n"), ParseError);
}

TEST(SequenceBinary, RoundTripIsBitwise) {
  Rng rng(2);
  PoseSequence2D p(11, 17);
  for (double& v : p.data()) v = rng.uniform(-1, 1);
  const AnySequence back = parse_sequence_binary(format_sequence_binary(p));
  EXPECT_EQ(std::get<PoseSequence2D>(back), p);
}

TEST(SequenceBinary, TruncatedPayloadReportsLengths) {
  PoseSequence2D p(4, 2);
  std::string bytes = format_sequence_binary(p);
  bytes.resize(bytes.size() - 8);
  try {
    parse_sequence_binary(bytes);
    FAIL();
  } catch (const ParseError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("128"), std::string::npos) << msg;
    EXPECT_NE(msg.find("120"), std::string::npos) << msg;
  }
  EXPECT_THROW(parse_sequence_binary("H2OTSEQ"), ParseError);
  EXPECT_THROW(parse_sequence_binary(std::string(40, 'x')), ParseError);
}

class FileTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("h2ot_io_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) + "_" +
            ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  fs::path dir_;
};

TEST_F(FileTest, ExtensionSelectsFormat) {
  Rng rng(3);
  Pose3DSequence p(3, 2);
  for (double& v : p.data()) v = rng.uniform(-1, 1);
  for (const char* name : {"a.txt", "a.csv", "a.pseq", "a.bin"}) {
    save_sequence(p, path(name));
    EXPECT_EQ(load_sequence_3d(path(name)), p) << name;
  }
  EXPECT_EQ(read_file(path("a.pseq")).substr(0, 8), "H2OTSEQ1");
  EXPECT_THROW(save_sequence(p, path("a.json")), ParseError);
  EXPECT_THROW(load_sequence(path("missing.txt")), Error);
}

TEST_F(FileTest, DimensionMismatchIsReported) {
  save_sequence(PoseSequence2D(2, 1), path("flat.pseq"));
  EXPECT_THROW(load_sequence_3d(path("flat.pseq")), ParseError);
}

SelectionTrace sample_trace() {
  SelectionTrace t;
  t.input_frames = 9;
  t.stages.push_back({0, {0, 2, 4, 6, 8}, {0, 2, 4, 6, 8}, {0.5, 0.125, 1e-300, 3, 4, 5, 6, 7, 8},
                      false});
  t.stages.push_back({2, {0, 2, 4}, {0, 4, 8}, {}, true});
  t.block_tokens = {5, 5, 3};
  return t;
}

TEST(TraceCsv, RoundTrip) {
  const SelectionTrace t = sample_trace();
  const std::string csv = to_csv(t);
  EXPECT_EQ(selection_trace_from_csv(csv), t);
  EXPECT_NE(csv.find("stage,block,pinned_inserted,local,frames,scores"), std::string::npos);
}

TEST(TraceCsv, BadRowsThrow) {
  EXPECT_THROW(selection_trace_from_csv("stage,block\n"), ParseError);
  std::string csv = to_csv(sample_trace());
  csv += "3,1,maybe,0,0,\n";
  EXPECT_THROW(selection_trace_from_csv(csv), ParseError);
}

}  // namespace
}  // namespace h2ot

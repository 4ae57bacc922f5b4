// Copyright 2026 The pcn Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "pcn/checkpoint.hpp"
#include "pcn/cli.hpp"
#include "pcn/errors.hpp"
#include "pcn/run_config.hpp"
#include "test_support.hpp"

namespace pcn {
namespace {

namespace fs = std::filesystem;

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run_cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::ostringstream os;
  os << is.rdbuf();
  return os.str();
}

// Shrinks the desk profile to a 16x16 canvas and 4x4 features.
const std::vector<std::string> kSmall{
    "--data.canvas=16", "--data.raw_length=12", "--data.min_size=3", "--data.max_size=4",
    "--prednet.height=4", "--prednet.width=4", "--prednet.input_channels=3",
    "--prednet.repr_channels=[2,2]", "--prednet.time_steps=4", "--preprocess.crop=16",
    "--train.window=8", "--train.batch_size=4", "--model.encoder_hidden=3"};

std::vector<std::string> with_small(std::vector<std::string> args) {
  args.insert(args.end(), kSmall.begin(), kSmall.end());
  return args;
}

fs::path make_data(const std::string& name) {
  const fs::path dir = testing::temp_dir(name);
  const Result r = run_cli(with_small({"gen-data", "--out", dir.string(), "--clips", "2",
                                       "--val-clips", "1", "--test-clips", "2"}));
  EXPECT_EQ(r.code, cli::kExitOk) << r.err;
  return dir;
}

TEST(RunConfigTest, PresetsDiffer) {
  const RunConfig desk = RunConfig::preset(Profile::kDesk);
  const RunConfig paper = RunConfig::preset(Profile::kPaper);
  EXPECT_EQ(desk.get_uint_list("prednet.repr_channels"), (std::vector<std::size_t>{4, 4}));
  EXPECT_EQ(paper.get_uint_list("prednet.repr_channels"), (std::vector<std::size_t>{64, 64}));
  EXPECT_EQ(paper.get_uint("prednet.input_channels"), 2048u);
  EXPECT_EQ(paper.get_double("train.lr"), 0.0064);
  EXPECT_EQ(paper.get_uint("train.batch_size"), 256u);
  EXPECT_EQ(desk.get_uint("train.batch_size"), 16u);
  EXPECT_EQ(model_config(paper, 51).fused_length(), 2176u);
  for (const auto& key : config_keys()) {
    EXPECT_TRUE(desk.has(key.name)) << key.name;
    EXPECT_TRUE(paper.has(key.name)) << key.name;
  }
  EXPECT_THROW(profile_from_string("laptop"), UsageError);
}

TEST(RunConfigTest, SetValidatesKeysAndTypes) {
  RunConfig c = RunConfig::preset(Profile::kDesk);
  EXPECT_THROW(c.set("train.learning_rate", "0.1"), UsageError);
  EXPECT_THROW(c.set("train.epochs", "-3"), UsageError);
  EXPECT_THROW(c.set("train.lr", "fast"), UsageError);
  EXPECT_THROW(c.set("model.use_prednet", "maybe"), UsageError);
  c.set("prednet.repr_channels", "[8, 16]");
  EXPECT_EQ(c.get_uint_list("prednet.repr_channels"), (std::vector<std::size_t>{8, 16}));
}

TEST(RunConfigTest, PrecedenceAndSeedFallback) {
  const fs::path dir = testing::temp_dir("config_precedence");
  std::ofstream(dir / "run.toml") << "profile = \"paper\"\n[train]\nepochs = 5\nlr = 0.5\n";
  ConfigSources s;
  s.file = dir / "run.toml";
  s.overrides = {{"train.lr", "0.25"}};
  s.env_seed = "99";
  RunConfig c = resolve_config(s);
  EXPECT_EQ(c.profile(), Profile::kPaper);
  EXPECT_EQ(c.get_uint("train.epochs"), 5u);
  EXPECT_EQ(c.get_double("train.lr"), 0.25);
  EXPECT_EQ(c.get_uint("prednet.input_channels"), 2048u);
  EXPECT_EQ(c.get_uint("seed"), 99u);

  s.profile = "desk";
  s.overrides.push_back({"seed", "3"});
  c = resolve_config(s);
  EXPECT_EQ(c.profile(), Profile::kDesk);
  EXPECT_EQ(c.get_uint("prednet.input_channels"), 8u);
  EXPECT_EQ(c.get_uint("seed"), 3u);

  s.overrides.pop_back();
  s.env_seed = "abc";
  EXPECT_THROW(resolve_config(s), UsageError);
}

TEST(RunConfigTest, TomlRoundTripAndUnknownKeys) {
  const fs::path dir = testing::temp_dir("config_toml");
  RunConfig c = RunConfig::preset(Profile::kPaper);
  c.set("train.epochs", "12");
  std::ofstream(dir / "out.toml") << c.to_toml();
  ConfigSources s;
  s.file = dir / "out.toml";
  EXPECT_EQ(resolve_config(s).values(), c.values());

  std::ofstream(dir / "bad.toml") << "[train]\nlearning_rate = 0.1\n";
  s.file = dir / "bad.toml";
  EXPECT_THROW(resolve_config(s), UsageError);
  s.file = dir / "missing.toml";
  EXPECT_THROW(resolve_config(s), Error);
}

TEST(Cli, UsageErrorsExitOne) {
  EXPECT_EQ(run_cli({}).code, cli::kExitUsage);
  EXPECT_EQ(run_cli({"frobnicate"}).code, cli::kExitUsage);
  EXPECT_EQ(run_cli({"gen-data", "--no-such-flag", "1"}).code, cli::kExitUsage);
  EXPECT_EQ(run_cli({"gen-data", "--profile", "huge"}).code, cli::kExitUsage);
  EXPECT_EQ(run_cli({"gradcheck", "--profile", "paper"}).code, cli::kExitUsage);
  const Result r = run_cli({"train", "--train.lr=abc"});
  EXPECT_EQ(r.code, cli::kExitUsage);
  EXPECT_FALSE(r.err.empty());
}

TEST(Cli, HelpExitsZero) {
  const Result r = run_cli({"--help"});
  EXPECT_EQ(r.code, cli::kExitOk);
  EXPECT_NE(r.out.find("gen-data"), std::string::npos);
}

TEST(Cli, RuntimeErrorsExitTwo) {
  const fs::path dir = testing::temp_dir("cli_runtime");
  EXPECT_EQ(run_cli({"inspect", (dir / "nope.pcfv").string()}).code, cli::kExitRuntime);
  EXPECT_EQ(run_cli({"train", "--data", dir.string(), "--out", (dir / "o").string()}).code,
            cli::kExitRuntime);
}

TEST(Cli, GenDataIsDeterministic) {
  const fs::path a = make_data("cli_gen_a");
  const fs::path b = make_data("cli_gen_b");
  for (const char* f : {"train.json", "val.json", "test.json", "train/clip_00000.pcfv",
                        "test/clip_00007.pcfv"}) {
    ASSERT_TRUE(fs::exists(a / f)) << f;
    EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;
  }
  EXPECT_TRUE(fs::exists(a / "config.toml"));
}

TEST(Cli, InspectReportsShape) {
  const fs::path dir = make_data("cli_inspect");
  const Result r = run_cli({"inspect", (dir / "train" / "clip_00000.pcfv").string()});
  EXPECT_EQ(r.code, cli::kExitOk) << r.err;
  EXPECT_NE(r.out.find("shape [12, 1, 16, 16]"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("nonfinite 0"), std::string::npos) << r.out;
}

TEST(Cli, TrainEvalAndRerunFromConfig) {
  const fs::path data = make_data("cli_train_data");
  const fs::path out = testing::temp_dir("cli_train_out");
  const Result t = run_cli(with_small({"train", "--data", data.string(), "--out",
                                       (out / "r1").string(), "--epochs", "2"}));
  ASSERT_EQ(t.code, cli::kExitOk) << t.err;
  for (const char* f : {"last.ckpt", "best.ckpt", "train_log.csv", "config.toml"}) {
    EXPECT_TRUE(fs::exists(out / "r1" / f)) << f;
  }
  const std::string log = slurp(out / "r1" / "train_log.csv");
  EXPECT_EQ(std::count(log.begin(), log.end(), '\n'), 3);

  // The echoed config alone reproduces the run.
  const Result again = run_cli({"train", "--config", (out / "r1" / "config.toml").string(),
                                "--out", (out / "r2").string()});
  ASSERT_EQ(again.code, cli::kExitOk) << again.err;
  EXPECT_EQ(slurp(out / "r2" / "train_log.csv"), log);

  const Result e = run_cli({"eval", "--checkpoint", (out / "r1" / "last.ckpt").string(), "--data",
                            data.string(), "--out", (out / "eval").string()});
  ASSERT_EQ(e.code, cli::kExitOk) << e.err;
  for (const char* f : {"metrics.json", "confusion.csv", "confusion.ppm"}) {
    EXPECT_TRUE(fs::exists(out / "eval" / f)) << f;
  }
}

TEST(Cli, ZeroEpochsWritesInitialCheckpoint) {
  const fs::path data = make_data("cli_zero_data");
  const fs::path out = testing::temp_dir("cli_zero_out");
  std::ofstream(out / "run.toml") << "[train]\nepochs = 0\n";
  std::vector<std::string> args =
      with_small({"train", "--config", (out / "run.toml").string(), "--data", data.string(),
                  "--out", (out / "run").string()});
  const Result r = run_cli(args);
  ASSERT_EQ(r.code, cli::kExitOk) << r.err;
  const Checkpoint ck = load_checkpoint(out / "run" / "last.ckpt");
  EXPECT_EQ(checkpoint_epoch(ck), 0u);
  EXPECT_EQ(slurp(out / "run" / "train_log.csv"), "epoch,lr,train_loss,val_loss,val_acc\n");
}

TEST(Cli, GradcheckPassesOnDesk) {
  const fs::path out = testing::temp_dir("cli_gradcheck");
  const Result r = run_cli({"gradcheck", "--out", out.string()});
  ASSERT_EQ(r.code, cli::kExitOk) << r.err;
  EXPECT_NE(r.out.find("max_rel_error"), std::string::npos);
  EXPECT_TRUE(fs::exists(out / "gradcheck.json"));
}

}  // namespace
}  // namespace pcn

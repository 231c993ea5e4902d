// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The CatEquiv Authors.

#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <unistd.h>

#include "catequiv/checkpoint.hpp"
#include "cli.hpp"
#include "support/synthetic.hpp"

namespace catequiv::cli {
namespace {

namespace fs = std::filesystem;

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Per-process scratch directory so parallel ctest runs do not collide.
fs::path scratch(const std::string& name) {
  return fs::temp_directory_path() / (name + "_" + std::to_string(::getpid()));
}

std::size_t count_lines(const fs::path& p) {
  std::ifstream in(p);
  std::size_t n = 0;
  for (std::string line; std::getline(in, line);) ++n;
  return n;
}

TEST(CliTest, VerifyWithoutData) {
  const fs::path out = scratch("catequiv_cli_verify");
  EXPECT_EQ(run({"verify", "--seed", "7", "--check-seeds", "1", "--trials", "2",
                 "--out", out.string()}),
            kOk);
  const auto j = nlohmann::json::parse(slurp(out / "verify.json"));
  EXPECT_TRUE(j["ok"].get<bool>());
  EXPECT_TRUE(fs::exists(out / "config.json"));
  fs::remove_all(out);
}

TEST(CliTest, UsageErrors) {
  EXPECT_EQ(run({}), kUsage);
  EXPECT_EQ(run({"frobnicate"}), kUsage);
  EXPECT_EQ(run({"train", "--model", "resnet", "--data-root", "/tmp"}), kUsage);
  EXPECT_EQ(run({"sweep", "--checkpoint", "x.json", "--axis", "scale"}), kUsage);
}

TEST(CliTest, MissingDataIsDataError) {
  const fs::path out = scratch("catequiv_cli_missing");
  EXPECT_EQ(run({"train", "--data-root", "/nonexistent/ucihar", "--out",
                 out.string()}),
            kDataError);
  fs::remove_all(out);
}

class CliDataTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    root_ = scratch("catequiv_cli_data");
    fs::remove_all(root_);
    const auto spec = testing::small_spec(model::ModelKind::kCatEquiv, 32);
    testing::write_ucihar_split(root_ / "UCI HAR Dataset", "train",
                                testing::synthetic_split(5, 32, 1));
    testing::write_ucihar_split(root_ / "UCI HAR Dataset", "test",
                                testing::synthetic_split(2, 32, 2));
    nlohmann::json cfg = {{"model", model::to_json(spec)},
                          {"train", {{"max_epochs", 2}, {"batch_size", 8}}},
                          {"ood", {{"shift_range", 6}}}};
    std::ofstream(root_ / "config.json") << cfg.dump(2);
  }
  static void TearDownTestSuite() { fs::remove_all(root_); }

  static std::vector<std::string> args(std::vector<std::string> a, const std::string& out) {
    a.insert(a.end(), {"--config", (root_ / "config.json").string(), "--data-root",
                       root_.string(), "--out", (root_ / out).string()});
    return a;
  }

  static inline fs::path root_;
};

TEST_F(CliDataTest, TrainEvalSweepAblate) {
  ASSERT_EQ(run(args({"train", "--seed", "3"}, "a")), kOk);
  const fs::path a = root_ / "a";
  for (const char* f : {"checkpoint.json", "train_log.jsonl", "config.json", "test_clean.json",
                        "test_clean.csv", "test_ood.json", "test_ood.csv"}) {
    EXPECT_TRUE(fs::exists(a / f)) << f;
  }
  EXPECT_EQ(count_lines(a / "train_log.jsonl"), 2u);
  const auto cfg = nlohmann::json::parse(slurp(a / "config.json"));
  EXPECT_EQ(cfg["seed"], 3);

  // Same seed, same bytes.
  ASSERT_EQ(run(args({"train", "--seed", "3"}, "b")), kOk);
  EXPECT_EQ(slurp(a / "train_log.jsonl"), slurp(root_ / "b" / "train_log.jsonl"));
  EXPECT_EQ(slurp(a / "checkpoint.json"), slurp(root_ / "b" / "checkpoint.json"));

  const std::string ckpt = (a / "checkpoint.json").string();
  ASSERT_EQ(run(args({"eval", "--checkpoint", ckpt}, "e")), kOk);
  EXPECT_TRUE(fs::exists(root_ / "e" / "eval_clean.csv"));
  EXPECT_TRUE(fs::exists(root_ / "e" / "eval_ood.json"));
  EXPECT_EQ(run(args({"eval", "--checkpoint", ckpt, "--model", "plaincnn"}, "e2")), kDataError);

  ASSERT_EQ(run(args({"sweep", "--checkpoint", ckpt, "--axis", "shift", "--grid", "0:18:3"},
                     "s")),
            kOk);
  EXPECT_EQ(count_lines(root_ / "s" / "sweep_shift.csv"), 8u);

  ASSERT_EQ(run(args({"ablate", "--variant", "no-l2", "--seed", "3", "--reference",
                      (a / "test_ood.json").string()},
                     "ab")),
            kOk);
  const auto abl = nlohmann::json::parse(slurp(root_ / "ab" / "ablation_no-l2.json"));
  EXPECT_TRUE(abl.contains("reference_macro_f1"));
  EXPECT_FALSE(model::load_checkpoint(root_ / "ab" / "checkpoint.json").spec().l2_over_axes);
}

TEST_F(CliDataTest, EnvironmentDataRoot) {
  ::setenv(kDataRootEnv, root_.c_str(), 1);
  const fs::path out = root_ / "env";
  EXPECT_EQ(run({"train", "--config", (root_ / "config.json").string(), "--out",
                 out.string(), "--epochs", "1"}),
            kOk);
  ::unsetenv(kDataRootEnv);
  EXPECT_EQ(count_lines(out / "train_log.jsonl"), 1u);
}

}  // namespace
}  // namespace catequiv::cli

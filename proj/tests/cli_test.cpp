// Copyright 2026 The l2v Authors
// SPDX-License-Identifier: Apache-2.0

// Drives the installed binary through a shell, checking exit codes and that
// the subcommands chain into a working (if tiny) pipeline.

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include "gtest/gtest.h"
#include "l2v/dataworld.hpp"
#include "test_util.hpp"

namespace l2v {
namespace {

namespace fs = std::filesystem;

int run(const std::string& args) {
  const std::string cmd = std::string("\"") + L2V_CLI_PATH + "\" " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

TEST(CliTest, ExitCodes) {
  EXPECT_EQ(run("--help"), 0);
  EXPECT_EQ(run("gen-data --help"), 0);
  EXPECT_EQ(run(""), 1);
  EXPECT_EQ(run("gen-data"), 1);
  EXPECT_EQ(run("gen-data --count -3 --out x"), 1);
  EXPECT_EQ(run("ablate --kind beam --config c.json"), 1);
  EXPECT_EQ(run("eval --ckpt /nonexistent --head /nonexistent --data /nonexistent --report r.json"), 2);
}

TEST(CliTest, GenDataIsByteIdenticalForASeed) {
  const auto dir = testing::scratch_dir("cli_gen");
  ASSERT_EQ(run("gen-data --seed 4 --count 12 --heldout 3 --out " + (dir / "a").string()), 0);
  ASSERT_EQ(run("gen-data --seed 4 --count 12 --heldout 3 --out " + (dir / "b").string()), 0);
  ASSERT_EQ(run("gen-data --seed 5 --count 12 --heldout 3 --out " + (dir / "c").string()), 0);
  std::size_t files = 0;
  for (const auto& e : fs::recursive_directory_iterator(dir / "a")) {
    if (!e.is_regular_file()) continue;
    const fs::path rel = fs::relative(e.path(), dir / "a");
    EXPECT_EQ(slurp(e.path()), slurp(dir / "b" / rel)) << rel;
    ++files;
  }
  EXPECT_EQ(files, 3u + 15u * 2u);
  EXPECT_NE(slurp(dir / "a" / "manifest.jsonl"), slurp(dir / "c" / "manifest.jsonl"));
  const Dataset ds = read_dataset(dir / "a");
  EXPECT_EQ(ds.manifest.records.size(), 15u);
}

TEST(CliTest, NoiselessFlagVerifiesRecoverability) {
  const auto dir = testing::scratch_dir("cli_noiseless");
  EXPECT_EQ(run("gen-data --noiseless --count 5 --out " + (dir / "d").string()), 0);
}

TEST(CliTest, SmallPipelineRunsEndToEnd) {
  const auto dir = testing::scratch_dir("cli_pipeline");
  const std::string d = (dir / "data").string();
  ASSERT_EQ(run("gen-data --seed 2 --count 40 --heldout 6 --out " + d), 0);
  {
    std::ofstream os(dir / "head.json");
    os << R"({"train": {"max_epochs": 1, "min_epochs": 1, "warmup_epochs": 0, "target_wer": 10.0}})";
  }
  const std::string head = (dir / "head.l2vc").string();
  ASSERT_EQ(run("train-asr --data " + d + " --out " + head + " --config " + (dir / "head.json").string()), 0);
  EXPECT_TRUE(fs::exists(head + ".json"));
  {
    std::ofstream os(dir / "run.json");
    os << R"({"epochs": 1, "warmup_epochs": 0, "batch_size": 8})";
  }
  const std::string prior = (dir / "prior.l2vc").string();
  ASSERT_EQ(run("train-prior --config " + (dir / "run.json").string() + " --data " + d + " --head " + head +
                " --out " + prior),
            0);
  EXPECT_TRUE(fs::exists(prior + ".log.jsonl"));
  const fs::path report = dir / "report.json";
  ASSERT_EQ(run("eval --ckpt " + prior + " --head " + head + " --data " + d + " --report " + report.string()), 0);
  const auto j = nlohmann::json::parse(slurp(report));
  EXPECT_EQ(j.at("mode"), "video");
  EXPECT_EQ(j.at("per_utterance").size(), 6u);
  ASSERT_EQ(run("eval --audio-diagnostic --ckpt none --head " + head + " --data " + d + " --report " +
                (dir / "diag.json").string()),
            0);
  ASSERT_EQ(run("bench --ckpt " + prior + " --head " + head + " --frames 10 --repetitions 1 --out " +
                (dir / "bench.json").string()),
            0);
  EXPECT_TRUE(fs::exists(dir / "bench.json"));
  // A tampered head must be refused at load time with a runtime exit code.
  std::ofstream(head + ".json", std::ios::trunc) << "{}";
  EXPECT_EQ(run("eval --ckpt " + prior + " --head " + head + " --data " + d + " --report " + report.string()), 2);
}

}  // namespace
}  // namespace l2v

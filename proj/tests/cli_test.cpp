// Copyright 2026 The cuatrace Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <random>
#include <string>

#include <gtest/gtest.h>

#include "cuatrace.hpp"

namespace cuatrace {
namespace {

namespace fs = std::filesystem;

struct RunResult {
  int code = -1;
  std::string out;
};

RunResult run(const std::string& args) {
  const std::string cmd = std::string(CUATRACE_CLI_PATH) + " " + args + " 2>/dev/null";
  RunResult r;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return r;
  std::array<char, 4096> buf;
  std::size_t n;
  while ((n = std::fread(buf.data(), 1, buf.size(), pipe)) > 0) r.out.append(buf.data(), n);
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("cuatrace_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  // Positive trajectories with flat PNG keyframes and a small moving square.
  std::string write_manifest(const std::string& name, std::size_t records, std::size_t steps) {
    std::vector<TrajectoryRecord> out;
    for (std::size_t p = 0; p < records; ++p) {
      RawTrajectory raw{"Open report " + std::to_string(p), Platform::kMacWin, JudgmentLabel{true, {}, {}}, {}};
      for (std::size_t s = 0; s < steps; ++s) {
        Image img(64, 48);
        img.fill_rect(0, 0, 64, 48, 220, 220, 225);
        img.fill_rect(16 * (s % 4), 16, 16, 16, 200, std::uint8_t(30 * p), 0);
        const std::string file = path(name + "_" + std::to_string(p) + "_" + std::to_string(s) + ".png");
        save_png(file, img);
        raw.steps.push_back({Keyframe{file, {}}, "click " + std::to_string(s)});
      }
      out.push_back(build_keyframe_video(raw));
    }
    write_text(path(name), serialize_store(out));
    return path(name);
  }

  fs::path dir_;
};

TEST_F(CliTest, IngestSummarizesAndIsDeterministic) {
  const auto m = write_manifest("m.jsonl", 2, 3);
  const auto a = run("ingest " + m + " --out " + path("a.jsonl"));
  EXPECT_EQ(a.code, 0);
  EXPECT_NE(a.out.find("2 trajectories, 6 steps"), std::string::npos) << a.out;
  EXPECT_EQ(run("ingest " + m + " --out " + path("b.jsonl")).code, 0);
  EXPECT_EQ(read_text(path("a.jsonl")), read_text(path("b.jsonl")));
}

TEST_F(CliTest, IngestMissingImageNamesStep) {
  const auto m = write_manifest("m.jsonl", 1, 3);
  fs::remove(path("m.jsonl_0_1.png"));
  const std::string cmd = std::string(CUATRACE_CLI_PATH) + " ingest " + m + " 2>&1";
  FILE* pipe = popen(cmd.c_str(), "r");
  std::string out;
  std::array<char, 512> buf;
  while (std::size_t n = std::fread(buf.data(), 1, buf.size(), pipe)) out.append(buf.data(), n);
  EXPECT_EQ(WEXITSTATUS(pclose(pipe)), 1);
  EXPECT_NE(out.find("step 1"), std::string::npos) << out;
}

TEST_F(CliTest, PruneVariantsAndBoundary) {
  const FeatureGrid g = generate(static_background_scene(10, 1));
  write_grid(path("scene.evgr"), g);
  ASSERT_EQ(run("prune " + path("scene.evgr") + " --out " + path("both")).code, 0);
  ASSERT_EQ(run("prune " + path("scene.evgr") + " --variant stp --out " + path("stp")).code, 0);
  ASSERT_EQ(run("prune " + path("scene.evgr") + " --variant ttp --out " + path("ttp")).code, 0);
  auto kept = [&](const std::string& d) {
    return nlohmann::json::parse(read_text(path(d + "/scene.report.json")))["kept_tokens"].get<std::size_t>();
  };
  EXPECT_LE(kept("both"), kept("stp"));
  EXPECT_LE(kept("both"), kept("ttp"));

  // CLI output equals the library call.
  const PruneResult lib = prune_pipeline(g, StpConfig{}, TtpConfig{}, false);
  EXPECT_EQ(decode_packed(read_file(path("both/scene.packed"))), lib.sequence);
  EXPECT_EQ(kept("both"), lib.report.kept_tokens);

  ASSERT_EQ(run("prune " + path("scene.evgr") + " --variant stp --tau-large 256 --out " + path("none")).code, 0);
  const auto report = nlohmann::json::parse(read_text(path("none/scene.report.json")));
  EXPECT_EQ(report["reduction_ratio"].get<double>(), 1.0);
  EXPECT_TRUE(report["thresholds"]["tau_t"].is_null());
}

TEST_F(CliTest, PruneTrajectoriesWritesMaskImages) {
  const auto m = write_manifest("m.jsonl", 2, 4);
  const auto r = run("prune " + m + " --out " + path("out") + " --visualize --merge-adjacent --workers 2");
  ASSERT_EQ(r.code, 0);
  for (const char* f : {"m_0.packed", "m_1.report.json", "m_1.spatial.png", "m_1.temporal.png", "m_1.combined.png"})
    EXPECT_TRUE(fs::exists(path(std::string("out/") + f))) << f;
  EXPECT_EQ(load_image(path("out/m_0.spatial.png")).height, 3u * 8u);
  EXPECT_EQ(nlohmann::json::parse(read_text(path("out/m_0.report.json")))["frames"], 2);
}

TEST_F(CliTest, PruneOutputIndependentOfWorkerCount) {
  const auto m = write_manifest("m.jsonl", 4, 3);
  ASSERT_EQ(run("prune " + m + " --workers 1 --out " + path("w1")).code, 0);
  ASSERT_EQ(run("prune " + m + " --workers 4 --out " + path("w4")).code, 0);
  for (int k = 0; k < 4; ++k) {
    const std::string f = "/m_" + std::to_string(k) + ".packed";
    EXPECT_EQ(read_file(path("w1") + f), read_file(path("w4") + f));
  }
}

TEST_F(CliTest, InvalidConfigFailsBeforeProcessing) {
  write_grid(path("g.evgr"), generate(static_background_scene(2)));
  EXPECT_EQ(run("prune " + path("g.evgr") + " --tau-s -0.5 --out " + path("x")).code, 1);
  EXPECT_FALSE(fs::exists(path("x")));
  EXPECT_EQ(run("prune " + path("g.evgr") + " --variant diagonal").code, 1);
  EXPECT_EQ(run("prune " + path("missing.evgr")).code, 1);
  EXPECT_EQ(run("frobnicate").code, 1);
}

TEST_F(CliTest, ConfigFileWithFlagOverride) {
  write_grid(path("g.evgr"), generate(static_background_scene(4)));
  write_text(path("run.ini"), "tau-large = 1000\nvariant = stp\n");
  ASSERT_EQ(run("--config " + path("run.ini") + " prune " + path("g.evgr") + " --out " + path("a")).code, 0);
  ASSERT_EQ(run("--config " + path("run.ini") + " prune " + path("g.evgr") + " --tau-large 40 --out " + path("b")).code, 0);
  const auto a = nlohmann::json::parse(read_text(path("a/g.report.json")));
  const auto b = nlohmann::json::parse(read_text(path("b/g.report.json")));
  EXPECT_EQ(a["thresholds"]["tau_large"], 1000);
  EXPECT_EQ(a["reduction_ratio"].get<double>(), 1.0);
  EXPECT_EQ(b["thresholds"]["tau_large"], 40);
  EXPECT_LT(b["reduction_ratio"].get<double>(), 1.0);
}

TEST_F(CliTest, EvalMatchesLibrary) {
  write_text(path("perfect.jsonl"),
             R"({"id":"a","platform":"android","pred_success":true,"gt_success":true})" "\n"
             R"({"id":"b","platform":"android","pred_success":false,"gt_success":false})" "\n");
  ASSERT_EQ(run("eval " + path("perfect.jsonl") + " --out " + path("p.json")).code, 0);
  const auto p = nlohmann::json::parse(read_text(path("p.json")));
  EXPECT_EQ(p["overall"]["accuracy"], 1.0);
  EXPECT_EQ(p["overall"]["precision"], 1.0);
  EXPECT_EQ(p["overall"]["recall"], 1.0);

  std::mt19937_64 rng(11);
  std::bernoulli_distribution coin(0.5);
  std::string text;
  for (int k = 0; k < 300; ++k) {
    nlohmann::json j{{"id", std::to_string(k)},
                     {"platform", to_string(kAllPlatforms[k % 5])},
                     {"pred_success", coin(rng)},
                     {"gt_success", coin(rng)}};
    if (coin(rng)) {
      j["pred_interval"] = {k % 7, k % 7 + 3};
      j["gt_interval"] = {k % 5, k % 5 + 4};
    }
    text += j.dump() + "\n";
  }
  write_text(path("fuzz.jsonl"), text);
  ASSERT_EQ(run("eval " + path("fuzz.jsonl") + " --out " + path("f.json")).code, 0);
  EXPECT_EQ(nlohmann::json::parse(read_text(path("f.json"))),
            nlohmann::json::parse(to_json(aggregate(parse_eval_records(text))).dump()));

  write_text(path("bad.jsonl"), text + "{broken\n");
  EXPECT_EQ(run("eval " + path("bad.jsonl")).code, 1);
}

TEST_F(CliTest, BenchWritesJsonAndCsv) {
  ASSERT_EQ(run("bench --frames 5,10,20,50 --out " + path("bench")).code, 0);
  const auto rows = nlohmann::json::parse(read_text(path("bench.json")));
  ASSERT_EQ(rows.size(), 12u);
  for (std::size_t k = 0; k < rows.size(); k += 3) {
    const auto stp = rows[k]["kept_tokens"].get<std::size_t>(), ttp = rows[k + 1]["kept_tokens"].get<std::size_t>(),
               both = rows[k + 2]["kept_tokens"].get<std::size_t>(), total = rows[k]["total_tokens"].get<std::size_t>();
    EXPECT_LE(both, ttp);
    EXPECT_LE(ttp, total);
    EXPECT_LE(both, stp);
  }
  // Later frames add few tokens under temporal pruning.
  const auto ttp5 = rows[1]["kept_tokens"].get<double>(), ttp50 = rows[10]["kept_tokens"].get<double>();
  EXPECT_LT(ttp50 / ttp5, 10.0 / 2.0);
  const std::string csv = read_text(path("bench.csv"));
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 13);
  EXPECT_EQ(run("bench --frames ''").code, 1);
  EXPECT_EQ(run("bench --frames 5,x").code, 1);
}

TEST_F(CliTest, SynthNegMockRoundTrip) {
  const auto m = write_manifest("pos.jsonl", 5, 3);
  const auto a = run("synth-neg request " + m + " --seed 7 --queue " + path("q1.jsonl"));
  const auto b = run("synth-neg request " + m + " --seed 7 --queue " + path("q2.jsonl"));
  ASSERT_EQ(a.code, 0);
  EXPECT_EQ(a.out, b.out);
  EXPECT_EQ(std::count(a.out.begin(), a.out.end(), '\n'), 5);
  EXPECT_EQ(run("synth-neg list --queue " + path("q1.jsonl")).out,
            run("synth-neg list --queue " + path("q2.jsonl")).out);

  for (int k = 0; k < 5; ++k) {
    const std::string verdict = k < 3 ? "--approve" : "--reject";
    ASSERT_EQ(run("synth-neg review --queue " + path("q1.jsonl") + " --id pos-" + std::to_string(k) + " " + verdict).code, 0);
  }
  ASSERT_EQ(run("synth-neg emit --queue " + path("q1.jsonl") + " --out " + path("neg.jsonl")).code, 0);
  const auto negs = load_manifest(path("neg.jsonl"));
  EXPECT_EQ(negs.size(), 3u);
  for (const auto& n : negs) EXPECT_FALSE(n.label->success);
  const auto again = run("ingest " + path("neg.jsonl"));
  EXPECT_EQ(again.code, 0);
  EXPECT_NE(again.out.find("3 trajectories, 9 steps"), std::string::npos);
}

TEST_F(CliTest, SynthNegUnreachableServiceIsExternalError) {
  const auto m = write_manifest("pos.jsonl", 1, 2);
  const auto r = run("synth-neg request " + m + " --endpoint http://127.0.0.1:1/translate --queue " + path("q.jsonl"));
  EXPECT_EQ(r.code, 3);
  EXPECT_NE(r.out.find("pos-0: error"), std::string::npos);
}

}  // namespace
}  // namespace cuatrace

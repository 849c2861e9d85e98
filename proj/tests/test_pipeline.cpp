// Copyright 2026 The weakiqa Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "iqa/features.hpp"
#include "iqa/iqa.h"
#include "iqa/rng.hpp"
#include "json.hpp"

namespace {

namespace fs = std::filesystem;
using Json = nlohmann::json;

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

int cli(const std::string& args, const fs::path& stdout_file = "/dev/null") {
  const std::string cmd = std::string(WEAKIQA_CLI) + " " + args + " -q > " + stdout_file.string() + " 2>/dev/null";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

Json run(const std::string& command, const Json& config, iqa_status expect = IQA_OK) {
  char* out = nullptr;
  const iqa_status st = iqa_run(command.c_str(), config.dump().c_str(), &out);
  EXPECT_EQ(st, expect) << command << ": " << iqa_last_error();
  Json j = out ? Json::parse(out) : Json();
  iqa_string_free(out);
  return j;
}

TEST(CApi, ImageMetricsAndStatus) {
  iqa_image* ref = nullptr;
  iqa_image* dist = nullptr;
  ASSERT_EQ(iqa_synthetic_reference(96, 64, 3, &ref), IQA_OK);
  EXPECT_EQ(iqa_image_width(ref), 96);
  EXPECT_EQ(iqa_image_channels(ref), 3);
  ASSERT_EQ(iqa_distort(ref, "gaussian_blur", 3, 1, &dist), IQA_OK);
  double s = 0.0;
  ASSERT_EQ(iqa_metric("SSIM", ref, ref, &s), IQA_OK);
  EXPECT_NEAR(s, 1.0, 1e-12);
  ASSERT_EQ(iqa_metric("SSIM", ref, dist, &s), IQA_OK);
  EXPECT_LT(s, 1.0);
  EXPECT_EQ(iqa_metric("nope", ref, dist, &s), IQA_ERR_INVALID_ARGUMENT);
  EXPECT_NE(std::string(iqa_last_error()).find("nope"), std::string::npos);
  EXPECT_EQ(iqa_distort(ref, "gaussian_blur", 9, 1, &dist), IQA_ERR_INVALID_ARGUMENT);
  EXPECT_EQ(iqa_metric("PSNR", nullptr, dist, &s), IQA_ERR_INVALID_ARGUMENT);
  iqa_image_free(ref);
  iqa_image_free(dist);
  EXPECT_STREQ(iqa_status_name(IQA_ERR_DEGENERATE), "degenerate");
}

TEST(CApi, Correlations) {
  const double x[] = {1, 2, 3, 4}, y[] = {1, 3, 2, 4}, flat[] = {2, 2, 2, 2};
  double r = 0.0;
  ASSERT_EQ(iqa_plcc(x, y, 4, &r), IQA_OK);
  EXPECT_NEAR(r, 0.8, 1e-15);
  ASSERT_EQ(iqa_srocc(x, y, 4, &r), IQA_OK);
  EXPECT_NEAR(r, 0.8, 1e-15);
  EXPECT_EQ(iqa_srocc(x, flat, 4, &r), IQA_ERR_DEGENERATE);
}

TEST(CApi, CommandTable) {
  std::vector<std::string> names;
  for (std::size_t i = 0; i < iqa_command_count(); ++i) names.emplace_back(iqa_command_name(i));
  for (const char* c : {"distort", "score", "normalize", "features", "train-mtl", "train-regressor", "evaluate",
                        "reliability", "selftest"})
    EXPECT_NE(std::find(names.begin(), names.end(), c), names.end()) << c;
  EXPECT_EQ(iqa_command_name(names.size()), nullptr);
}

TEST(CApi, RunErrors) {
  run("bogus", Json::object(), IQA_ERR_VALIDATION);
  char* out = nullptr;
  EXPECT_EQ(iqa_run("score", "{not json", &out), IQA_ERR_VALIDATION);
  iqa_string_free(out);
  // errors raised before a stage starts leave the result empty
  const Json r = run("score", {{"manifest", "/nonexistent/m.csv"}, {"out", "/tmp/x.csv"}, {"colour", 1}},
                     IQA_ERR_VALIDATION);
  EXPECT_TRUE(r.is_null());
  EXPECT_NE(std::string(iqa_last_error()).find("colour"), std::string::npos);
}

TEST(CApi, Selftest) {
  const Json r = run("selftest", Json::object());
  EXPECT_EQ(r["failed"], 0);
  EXPECT_GE(r["checks"].size(), 10u);
}

class PipelineTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    dir_ = fs::temp_directory_path() / "iqa_test_pipeline";
    fs::remove_all(dir_);
    fs::create_directories(dir_);
    run("synth", {{"out", (dir_ / "refs").string()}, {"count", 2}, {"seed", 1}});
    ASSERT_EQ(cli("distort --refs " + (dir_ / "refs").string() + " --plan kadid --out " + (dir_ / "d").string() +
                  " --seed 7"),
              0);
  }
  static fs::path dir_;
};

fs::path PipelineTest::dir_;

TEST_F(PipelineTest, DistortTwoReferences) {
  std::size_t pngs = 0;
  for (const auto& e : fs::directory_iterator(dir_ / "d")) pngs += e.path().extension() == ".png";
  EXPECT_EQ(pngs, 250u);
  std::ifstream in(dir_ / "d" / "manifest.csv");
  std::string line;
  std::size_t rows = 0;
  std::getline(in, line);
  EXPECT_EQ(line, "image_id,ref_path,dist_path,kind,level,seed");
  while (std::getline(in, line)) rows += !line.empty();
  EXPECT_EQ(rows, 250u);
  const Json meta = Json::parse(slurp(dir_ / "d" / "manifest.csv.meta.json"));
  EXPECT_EQ(meta["seed"], 7);
  EXPECT_EQ(meta["command"], "distort");
  EXPECT_EQ(meta["config"]["plan"], "kadid");
}

TEST_F(PipelineTest, SkipExistingWritesNothing) {
  const Json r = run("distort", {{"refs", (dir_ / "refs").string()},
                                 {"out", (dir_ / "d").string()},
                                 {"seed", 7},
                                 {"skip_existing", true}});
  EXPECT_EQ(r["written"], 0);
  EXPECT_EQ(r["skipped"], 250);
}

TEST_F(PipelineTest, ScoreIsDeterministic) {
  const auto m = (dir_ / "d" / "manifest.csv").string();
  ASSERT_EQ(cli("score --manifest " + m + " --metrics PSNR,GMSD --out " + (dir_ / "s1.csv").string()), 0);
  ASSERT_EQ(cli("score --manifest " + m + " --metrics PSNR,GMSD --out " + (dir_ / "s2.csv").string() +
                " --workers 2"),
            0);
  EXPECT_EQ(slurp(dir_ / "s1.csv"), slurp(dir_ / "s2.csv"));
  EXPECT_EQ(slurp(dir_ / "s1.csv").substr(0, 19), "image_id,PSNR,GMSD\n");
}

TEST_F(PipelineTest, DryRunWritesNothing) {
  const auto out = dir_ / "dry";
  ASSERT_EQ(cli("distort --refs " + (dir_ / "refs").string() + " --out " + out.string() + " --dry-run",
                dir_ / "dry.json"),
            0);
  EXPECT_FALSE(fs::exists(out));
  EXPECT_EQ(Json::parse(slurp(dir_ / "dry.json"))["records"], 250);
}

TEST_F(PipelineTest, ExitCodes) {
  EXPECT_EQ(cli("selftest"), 0);
  EXPECT_EQ(cli("score --manifest " + (dir_ / "missing.csv").string() + " --out x.csv"), 1);
  EXPECT_EQ(cli("score --set colour=1 --manifest " + (dir_ / "d" / "manifest.csv").string() + " --out x.csv"), 1);
  EXPECT_EQ(cli("synth --out /proc/weakiqa_denied --count 1"), 2);
}

TEST_F(PipelineTest, ConfigFileWithFlagOverride) {
  std::ofstream(dir_ / "cfg.json") << Json{{"count", 3}, {"seed", 4}, {"out", (dir_ / "cfg_refs").string()}}.dump();
  ASSERT_EQ(cli("synth --config " + (dir_ / "cfg.json").string() + " --count 1", dir_ / "cfg_out.json"), 0);
  const Json r = Json::parse(slurp(dir_ / "cfg_out.json"));
  EXPECT_EQ(r["written"], 1);
  const Json meta = Json::parse(slurp(dir_ / "cfg_refs" / "references.meta.json"));
  EXPECT_EQ(meta["seed"], 4);
}

TEST_F(PipelineTest, EvaluateProtocolThreeRuns) {
  // 20 references with 4 images each; the label is linear in the features
  iqa::Rng rng(5);
  iqa::FeatureStore store(8);
  std::ofstream labels(dir_ / "dmos.csv");
  labels << "image_id,DMOS\n";
  for (int r = 0; r < 20; ++r)
    for (int i = 0; i < 4; ++i) {
      std::vector<float> f(8);
      for (auto& v : f) v = static_cast<float>(rng.normal());
      const std::string id = "R" + std::to_string(r) + "_" + std::to_string(i);
      store.add(id, f);
      labels << id << "," << 3.0 + f[0] - 0.5 * f[1] << "\n";
    }
  labels.close();
  iqa::write_store(store, dir_ / "f.mlsp");
  const auto out = dir_ / "eval.json";
  ASSERT_EQ(cli("evaluate --features " + (dir_ / "f.mlsp").string() + " --labels " + (dir_ / "dmos.csv").string() +
                " --reps 3 --seed 1 --epochs 3 --out " + out.string()),
            0);
  const Json rep = Json::parse(slurp(out));
  EXPECT_EQ(rep["mode"], "protocol");
  ASSERT_EQ(rep["runs"].size(), 3u);
  EXPECT_TRUE(rep["median_srocc"].is_number());
  EXPECT_TRUE(rep["median_plcc"].is_number());
  EXPECT_TRUE(fs::exists(out.string() + ".meta.json"));
  const std::string first = slurp(out);
  ASSERT_EQ(cli("evaluate --features " + (dir_ / "f.mlsp").string() + " --labels " + (dir_ / "dmos.csv").string() +
                " --reps 3 --seed 1 --epochs 3 --out " + out.string()),
            0);
  EXPECT_EQ(slurp(out), first);
}

}  // namespace

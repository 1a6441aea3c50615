#include <gtest/gtest.h>

#include "test_util.hpp"

namespace mimic {
namespace {

using testing::run_cli;

std::string q(const std::filesystem::path& p) { return "'" + p.string() + "'"; }

class CliTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    dir_ = new testing::TempDir();
    const auto r = run_cli("synth --out " + q(dir_->path() / "data") + " --n 160 --seed 2 --text-dim 140 --image-dim 140");
    ASSERT_EQ(r.code, 0) << r.output;
  }
  static void TearDownTestSuite() { delete dir_; }
  static std::filesystem::path manifest() { return dir_->path() / "data" / "manifest.json"; }

  static inline testing::TempDir* dir_ = nullptr;
};

TEST_F(CliTest, SynthSummary) {
  testing::TempDir tmp;
  const auto r = run_cli("synth --out " + q(tmp.path()) + " --n 20 --text-dim 130 --image-dim 130");
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.output.find("wrote 20 instances"), std::string::npos) << r.output;
  EXPECT_TRUE(std::filesystem::exists(tmp / "manifest.json"));
}

TEST_F(CliTest, ValidateCleanAndBroken) {
  auto r = run_cli("validate " + q(manifest()));
  EXPECT_EQ(r.code, 0) << r.output;
  EXPECT_NE(r.output.find("160 instances"), std::string::npos) << r.output;

  testing::TempDir tmp;
  auto doc = testing::fixture_manifest_json();
  doc["instances"][0]["text_embedding_ref"] = "missing.emb";
  write_file(tmp / "m.json", doc.dump());
  r = run_cli("validate " + q(tmp / "m.json"));
  EXPECT_EQ(r.code, 2) << r.output;
  EXPECT_NE(r.output.find("AAA@2024-03-01"), std::string::npos) << r.output;

  write_file(tmp / "bad.json", "{");
  EXPECT_EQ(run_cli("validate " + q(tmp / "bad.json")).code, 2);
}

TEST_F(CliTest, UsageErrors) {
  EXPECT_EQ(run_cli("").code, 1);
  EXPECT_EQ(run_cli("frobnicate").code, 1);
  EXPECT_EQ(run_cli("run --manifest " + q(manifest()) + " --variant BOGUS").code, 1);
  EXPECT_EQ(run_cli("run --manifest " + q(manifest()) + " --all --train-end 2024-99-01").code, 1);
  EXPECT_EQ(run_cli("run --manifest " + q(manifest()) + " --all --train-end 2024-09-01 --val-end 2024-03-01").code, 1);
  EXPECT_EQ(run_cli("run --manifest " + q(dir_->path() / "nope.json") + " --all").code, 1);
}

TEST_F(CliTest, SingleVariantRunWritesModels) {
  testing::TempDir out;
  const auto r = run_cli("run --manifest " + q(manifest()) + " --variant N_T_P --epochs 20 --out " + q(out.path()));
  ASSERT_EQ(r.code, 0) << r.output;
  EXPECT_NE(r.output.find("N+T(P)"), std::string::npos);
  const auto rep = nlohmann::json::parse(read_file(out / "report.json"));
  ASSERT_EQ(rep["results"].size(), 1u);
  EXPECT_EQ(rep["results"][0]["variant"], "N_T_P");
  EXPECT_EQ(rep["results"][0]["feature_width"], 40);
  EXPECT_EQ(rep["config"]["train"]["mlp"]["epochs"], 20);
  for (const char* f : {"regressor.mdl", "text_gbt.mdl", "schema.json"})
    EXPECT_TRUE(std::filesystem::exists(out / "models" / "N_T_P" / f)) << f;
  EXPECT_FALSE(std::filesystem::exists(out / "models" / "N_T_P" / "image_rf.mdl"));

  const auto d = run_cli("describe " + q(out / "models" / "N_T_P" / "text_gbt.mdl"));
  EXPECT_EQ(d.code, 0);
  EXPECT_NE(d.output.find("rounds"), std::string::npos) << d.output;
  EXPECT_EQ(run_cli("describe " + q(out / "report.json")).code, 2);
}

TEST_F(CliTest, AllVariantsAreByteIdenticalOnRerun) {
  testing::TempDir a, b;
  const std::string common = "run --manifest " + q(manifest()) + " --all --seed 7 --epochs 25 --out ";
  ASSERT_EQ(run_cli(common + q(a.path())).code, 0);
  ASSERT_EQ(run_cli(common + q(b.path())).code, 0);
  EXPECT_EQ(read_file(a / "report.json"), read_file(b / "report.json"));
  EXPECT_EQ(read_file(a / "report.txt"), read_file(b / "report.txt"));
  EXPECT_EQ(read_file(a / "models/N_T_P_I_P/image_rf.mdl"), read_file(b / "models/N_T_P_I_P/image_rf.mdl"));
  const auto rep = nlohmann::json::parse(read_file(a / "report.json"));
  EXPECT_EQ(rep["results"].size(), 5u);

  const auto table = run_cli("report " + q(a / "report.json"));
  EXPECT_EQ(table.code, 0);
  EXPECT_EQ(table.output, read_file(a / "report.txt"));
  const auto js = run_cli("report --json " + q(a / "report.json"));
  EXPECT_EQ(nlohmann::json::parse(js.output), rep);
}

TEST_F(CliTest, ConfigFileAndFlagPrecedence) {
  testing::TempDir out;
  write_file(out / "cfg.json", R"({"seed": 11, "train": {"mlp": {"epochs": 15, "patience": 3}, "gbt": {"rounds": 5}}})");
  const auto r = run_cli("run --manifest " + q(manifest()) + " --variant N --config " + q(out / "cfg.json") +
                         " --epochs 12 --out " + q(out / "o"));
  ASSERT_EQ(r.code, 0) << r.output;
  const auto rep = nlohmann::json::parse(read_file(out / "o/report.json"));
  EXPECT_EQ(rep["config"]["train"]["seed"], 11);
  EXPECT_EQ(rep["config"]["train"]["mlp"]["epochs"], 12);
  EXPECT_EQ(rep["config"]["train"]["mlp"]["patience"], 3);
  EXPECT_EQ(rep["config"]["train"]["gbt"]["rounds"], 5);
}

TEST_F(CliTest, LlmBaselineAgainstMock) {
  testing::MockVlmServer server;
  testing::TempDir tmp;
  auto doc = testing::fixture_manifest_json();
  write_file(tmp / "m.json", doc.dump());
  const std::string args = "llm-baseline --manifest " + q(tmp / "m.json") + " --endpoint " + server.endpoint() +
                           " --cache-dir " + q(tmp / "cache") + " --train-end 2023-01-01 --val-end 2023-06-01 --out " +
                           q(tmp / "llm.json");
  auto r = run_cli(args);
  ASSERT_EQ(r.code, 0) << r.output;
  EXPECT_EQ(server.requests(), 3u);
  r = run_cli(args);
  ASSERT_EQ(r.code, 0) << r.output;
  EXPECT_EQ(server.requests(), 3u);
  const auto res = nlohmann::json::parse(read_file(tmp / "llm.json"));
  EXPECT_EQ(res["cache_hits"], 3);
  EXPECT_EQ(res["n"], 3);

  testing::MockVlmServer garbage(true);
  r = run_cli("llm-baseline --manifest " + q(tmp / "m.json") + " --endpoint " + garbage.endpoint() + " --cache-dir " +
              q(tmp / "cache2") + " --train-end 2023-01-01 --val-end 2023-06-01");
  EXPECT_EQ(r.code, 3);
  EXPECT_NE(r.output.find("no valid predictions"), std::string::npos) << r.output;
}

}  // namespace
}  // namespace mimic

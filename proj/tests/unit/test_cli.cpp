#include <fstream>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "cli.hpp"
#include "support/fixtures.hpp"

using namespace lesiontrack;

namespace {

nlohmann::json read_json(const std::filesystem::path& p) {
  std::ifstream in(p);
  return nlohmann::json::parse(in);
}

}  // namespace

TEST(Cli, SyntheticPipelineEndToEnd) {
  fixtures::TempDir dir;
  const std::string d = dir.path().string();
  ASSERT_EQ(run_cli({"gen-synthetic", "--seed", "3", "--lesions", "10", "--texture-size", "512", "--out", d}), 0);
  for (const char* tag : {"a", "b"}) {
    const std::string s = d + "/synth_" + tag;
    ASSERT_EQ(run_cli({"map3d", "--mesh", s + ".obj", "--texture", s + ".png", "--boxes", s + "_boxes.json", "--out", d}),
              0);
    ASSERT_TRUE(std::filesystem::exists(s + "_lesions.json"));
    ASSERT_TRUE(std::filesystem::exists(s + "_embedded.png"));
  }
  ASSERT_EQ(run_cli({"track", "--mesh-a", d + "/synth_a.obj", "--mesh-b", d + "/synth_b.obj", "--lesions-a",
                     d + "/synth_a_lesions.json", "--lesions-b", d + "/synth_b_lesions.json", "--recon-a",
                     d + "/synth_a_recon.xyz", "--recon-b", d + "/synth_b_recon.xyz", "--out", d}),
            0);
  const auto match = read_json(dir.path() / "match.json");
  EXPECT_TRUE(match.contains("pairs"));
  ASSERT_EQ(run_cli({"eval", "--mode", "track", "--result", d + "/match.json", "--gt-a", d + "/synth_a_boxes.json",
                     "--gt-b", d + "/synth_b_boxes.json", "--out", d}),
            0);
  const auto report = read_json(dir.path() / "report.json");
  EXPECT_GE(report["matching_accuracy"]["mean"].get<double>(), 0.75);
}

TEST(Cli, DetectOnTextureAndExternalBoxes) {
  fixtures::TempDir dir;
  const std::string d = dir.path().string();
  ASSERT_EQ(run_cli({"gen-synthetic", "--seed", "4", "--lesions", "6", "--texture-size", "256", "--out", d}), 0);
  ASSERT_EQ(run_cli({"detect", "--image", d + "/synth_a.png", "--out", d}), 0);
  EXPECT_TRUE(std::filesystem::exists(dir.path() / "synth_a_detections.json"));
  ASSERT_EQ(run_cli({"detect", "--external", d + "/synth_a_boxes.json", "--name", "ext", "--out", d}), 0);
  EXPECT_EQ(read_json(dir.path() / "ext_detections.json")["boxes"].size(), 6u);
  ASSERT_EQ(run_cli({"eval", "--mode", "detect", "--gt", d + "/synth_a_boxes.json", "--pred",
                     d + "/ext_detections.json", "--name", "det", "--out", d}),
            0);
  EXPECT_DOUBLE_EQ(read_json(dir.path() / "det.json")["recall"]["mean"].get<double>(), 1.0);
}

TEST(Cli, ExitCodes) {
  fixtures::TempDir dir;
  const std::string d = dir.path().string();
  EXPECT_EQ(run_cli({"no-such-command"}), 1);
  EXPECT_EQ(run_cli({"map3d", "--mesh", d + "/missing.obj", "--texture", d + "/t.png", "--boxes", d + "/b.json"}), 2);
  ASSERT_EQ(run_cli({"gen-synthetic", "--seed", "1", "--lesions", "4", "--texture-size", "256", "--out", d}), 0);
  EXPECT_EQ(run_cli({"track", "--mesh-a", d + "/synth_a.obj", "--mesh-b", d + "/synth_b.obj", "--lesions-a",
                     d + "/synth_a_boxes.json", "--lesions-b", d + "/synth_b_boxes.json", "--alpha", "1.5",
                     "--corr-mode", "identity", "--out", d}),
            1);
  EXPECT_EQ(run_cli({"detect", "--out", d}), 1);
  EXPECT_EQ(run_cli({"eval", "--mode", "bogus", "--out", d}), 1);
}

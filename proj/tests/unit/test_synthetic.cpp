#include <algorithm>
#include <set>

#include <gtest/gtest.h>

#include "lesiontrack/synthetic.hpp"
#include "support/fixtures.hpp"

using namespace lesiontrack;

namespace {

SyntheticConfig small_config(std::uint64_t seed) {
  SyntheticConfig c;
  c.rings = 40;
  c.segments = 32;
  c.texture_size = 256;
  c.num_lesions = 8;
  c.template_points = 300;
  c.seed = seed;
  return c;
}

}  // namespace

TEST(Synthetic, CountsAndTrackIds) {
  for (const std::uint64_t seed : {1u, 2u, 3u}) {
    const auto cfg = small_config(seed);
    const auto p = generate_synthetic_pair(cfg);
    ASSERT_EQ(p.first.boxes.size(), 8u);
    ASSERT_EQ(p.second.boxes.size(), 8u - 2 + 2);
    ASSERT_EQ(p.lesion_pairs.size(), 6u);
    ASSERT_EQ(p.first.lesion_vertices.size(), p.first.boxes.size());
    ASSERT_EQ(p.truth.size(), static_cast<std::size_t>(p.first.mesh.vertices.rows()));
    for (const auto& [a, b] : p.lesion_pairs) {
      ASSERT_TRUE(p.first.boxes.boxes[a].track_id.has_value());
      EXPECT_EQ(p.first.boxes.boxes[a].track_id, p.second.boxes.boxes[b].track_id);
    }
    EXPECT_EQ(p.first.reconstruction.points.rows(), p.second.reconstruction.points.rows());
    validate(p.first.mesh);
    validate(p.second.mesh);
  }
}

TEST(Synthetic, TruthIsABijection) {
  const auto p = generate_synthetic_pair(small_config(4));
  std::vector<int> sorted = p.truth.map;
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t i = 0; i < sorted.size(); ++i) ASSERT_EQ(sorted[i], static_cast<int>(i));
}

TEST(Synthetic, UndeformedSecondScanIsAPermutation) {
  auto cfg = small_config(5);
  cfg.bend = 0;
  cfg.shift = 0;
  cfg.rotation_deg = 0;
  const auto p = generate_synthetic_pair(cfg);
  for (Eigen::Index i = 0; i < p.first.mesh.vertices.rows(); ++i) {
    ASSERT_LT((p.first.mesh.vertices.row(i) - p.second.mesh.vertices.row(p.truth[i])).norm(), 1e-9);
  }
}

TEST(Synthetic, DeterministicPerSeed) {
  const auto a = generate_synthetic_pair(small_config(6));
  const auto b = generate_synthetic_pair(small_config(6));
  EXPECT_EQ(a.second.mesh.vertices, b.second.mesh.vertices);
  EXPECT_EQ(a.second.boxes, b.second.boxes);
  EXPECT_EQ(a.truth.map, b.truth.map);
}

TEST(Synthetic, WritesEveryArtifact) {
  fixtures::TempDir dir;
  const auto p = generate_synthetic_pair(small_config(7));
  write_synthetic_pair(dir.path(), p, "s");
  for (const char* f : {"s_a.obj", "s_b.obj", "s_a.png", "s_b.png", "s_a_boxes.json", "s_b_boxes.json",
                        "s_a_recon.xyz", "s_b_recon.xyz", "s_truth_corr.json", "s_manifest.json"}) {
    EXPECT_TRUE(std::filesystem::exists(dir.path() / f)) << f;
  }
}

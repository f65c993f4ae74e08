#include <cmath>
#include <limits>
#include <random>

#include <gtest/gtest.h>

#include "lesiontrack/error.hpp"
#include "lesiontrack/geodesics.hpp"
#include "lesiontrack/synthetic.hpp"
#include "support/fixtures.hpp"

using namespace lesiontrack;

namespace {

double chord(const TexturedMesh& m, int a, int b) { return (m.vertices.row(a) - m.vertices.row(b)).norm(); }

TexturedMesh two_grids() {
  TexturedMesh a = fixtures::planar_grid(3, 3, 1.0);
  TexturedMesh b = a;
  b.vertices.col(0).array() += 10.0;
  TexturedMesh m = a;
  const auto nv = a.vertices.rows();
  m.vertices.resize(2 * nv, 3);
  m.vertices << a.vertices, b.vertices;
  m.uv.resize(2 * nv, 2);
  m.uv << a.uv, b.uv;
  m.faces.resize(2 * a.faces.rows(), 3);
  m.faces << a.faces, (b.faces.array() + static_cast<int>(nv)).matrix();
  return m;
}

}  // namespace

TEST(Geodesics, ParseMethod) {
  EXPECT_EQ(parse_geodesic_method("fast_marching"), GeodesicMethod::FastMarching);
  EXPECT_EQ(parse_geodesic_method("dijkstra"), GeodesicMethod::Dijkstra);
  EXPECT_THROW(parse_geodesic_method("heat"), Error);
}

TEST(Geodesics, DijkstraAlongGridAxisIsExact) {
  const auto m = fixtures::planar_grid(10, 10, 0.1);
  const auto f = single_source(m, 0);
  EXPECT_NEAR(f.distance[10], 1.0, 1e-12);
  EXPECT_DOUBLE_EQ(f.distance[0], 0.0);
}

TEST(Geodesics, FastMarchingCornerToCornerWithinTwoPercent) {
  for (const bool anti : {true, false}) {
    const auto m = fixtures::planar_grid(40, 40, 0.025, anti);
    const int far = static_cast<int>(m.vertices.rows()) - 1;
    const auto fmm = single_source(m, 0, GeodesicMethod::FastMarching);
    const double exact = std::sqrt(2.0);
    EXPECT_NEAR(fmm.distance[far], exact, 0.02 * exact) << "anti=" << anti;
    const auto dj = single_source(m, 0, GeodesicMethod::Dijkstra);
    EXPECT_GE(dj.distance[far], exact - 1e-12);
  }
}

TEST(Geodesics, FieldsRespectChordBoundAndTriangleInequality) {
  SyntheticConfig cfg;
  cfg.rings = 24;
  cfg.segments = 16;
  cfg.texture_size = 64;
  cfg.num_lesions = 4;
  cfg.disappearing = cfg.appearing = 0;
  const auto pair = generate_synthetic_pair(cfg);
  const auto& mesh = pair.second.mesh;
  const GeodesicSolver solver(mesh);
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<int> pick(0, static_cast<int>(mesh.vertices.rows()) - 1);
  for (const auto method : {GeodesicMethod::Dijkstra, GeodesicMethod::FastMarching}) {
    std::vector<int> sources{pick(rng), pick(rng), pick(rng)};
    const auto fields = solver.fields(sources, method);
    for (std::size_t s = 0; s < sources.size(); ++s) {
      for (int v = 0; v < mesh.vertices.rows(); ++v) {
        ASSERT_GE(fields[s].distance[v], chord(mesh, sources[s], v) * (1 - 1e-9));
      }
    }
    if (method != GeodesicMethod::Dijkstra) continue;
    for (int v = 0; v < mesh.vertices.rows(); ++v) {
      ASSERT_LE(fields[0].distance[v], (fields[0].distance[sources[1]] + fields[1].distance[v]) * (1 + 1e-9));
    }
  }
}

TEST(Geodesics, FastMarchingNeverAboveDijkstra) {
  SyntheticConfig cfg;
  cfg.rings = 32;
  cfg.segments = 24;
  cfg.texture_size = 64;
  cfg.num_lesions = 2;
  cfg.disappearing = cfg.appearing = 0;
  const auto mesh = generate_synthetic_pair(cfg).second.mesh;
  const GeodesicSolver solver(mesh);
  for (const int s : {0, 100, 400}) {
    const auto dj = solver.single_source(s, GeodesicMethod::Dijkstra);
    const auto fm = solver.single_source(s, GeodesicMethod::FastMarching);
    for (int v = 0; v < mesh.vertices.rows(); ++v) ASSERT_LE(fm.distance[v], dj.distance[v] * (1 + 1e-9));
  }
}

TEST(Geodesics, RefinementNeverIncreasesFastMarchingDistance) {
  // Doubling the grid resolution is the midpoint subdivision of every triangle.
  double prev = std::numeric_limits<double>::infinity();
  for (const int k : {5, 10, 20, 40}) {
    const auto m = fixtures::planar_grid(k, 2 * k, 1.0 / k);
    const double d = single_source(m, 0, GeodesicMethod::FastMarching).distance[m.vertices.rows() - 1];
    EXPECT_LE(d, prev + 1e-6);
    prev = d;
  }
}

TEST(Geodesics, SeamDuplicatesAreWelded) {
  SyntheticConfig cfg;
  cfg.rings = 24;
  cfg.segments = 16;
  cfg.texture_size = 64;
  cfg.num_lesions = 2;
  cfg.disappearing = cfg.appearing = 0;
  const auto pair = generate_synthetic_pair(cfg);
  const auto& mesh = pair.first.mesh;
  const auto rep = weld_coincident(mesh.vertices);
  int dup = -1;
  for (int v = 0; v < static_cast<int>(rep.size()); ++v) {
    if (rep[v] != v) {
      dup = v;
      break;
    }
  }
  ASSERT_GE(dup, 0);
  const auto f = single_source(mesh, rep[dup]);
  EXPECT_EQ(f.distance[dup], 0.0);
  // Crossing the seam is short: every neighbour across it is within a ring step.
  for (int v = 0; v < mesh.vertices.rows(); ++v) {
    ASSERT_TRUE(std::isfinite(f.distance[v]));
    ASSERT_LE(f.distance[v], 2.0 * (0.15 * M_PI + 1.2 + 0.3));
  }
}

TEST(Geodesics, PairwiseIsSymmetricWithZeroDiagonal) {
  const auto m = fixtures::planar_grid(12, 9, 0.1);
  const std::vector<int> vs{0, 17, 55, 90, 129};
  for (const auto method : {GeodesicMethod::Dijkstra, GeodesicMethod::FastMarching}) {
    const auto d = pairwise_matrix(m, vs, {method, false});
    ASSERT_EQ(d.rows(), 5);
    EXPECT_TRUE(d.isApprox(d.transpose()));
    for (int i = 0; i < 5; ++i) EXPECT_EQ(d(i, i), 0.0);
  }
}

TEST(Geodesics, DisconnectedComponents) {
  const auto m = two_grids();
  const std::vector<int> vs{0, 16 + 5};
  try {
    pairwise_matrix(m, vs);
    FAIL() << "expected DisconnectedLesions";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::DisconnectedLesions);
  }
  const auto d = pairwise_matrix(m, vs, {GeodesicMethod::Dijkstra, true});
  EXPECT_TRUE(std::isinf(d(0, 1)));
  const GeodesicSolver solver(m);
  EXPECT_NE(solver.components()[0], solver.components()[21]);
}

TEST(Geodesics, InvalidSource) {
  const auto m = fixtures::planar_grid(2, 2, 1.0);
  try {
    single_source(m, 99);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::InvalidVertex);
  }
}

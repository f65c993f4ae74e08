#pragma once

#include <array>
#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "lesiontrack/mesh.hpp"

namespace lesiontrack {

enum class GeodesicMethod { Dijkstra, FastMarching };

GeodesicMethod parse_geodesic_method(const std::string& name);
const char* to_string(GeodesicMethod method);

struct DistanceField {
  int source = -1;
  Eigen::VectorXd distance;  ///< +inf where unreachable
  GeodesicMethod method = GeodesicMethod::Dijkstra;
};

/// Edge graph and incident-face table of a triangle mesh. Coincident vertices
/// (UV seam duplicates) are welded so paths may cross seams; results are
/// reported per original vertex.
class GeodesicSolver {
 public:
  GeodesicSolver(const Vertices& vertices, const Faces& faces);
  explicit GeodesicSolver(const TexturedMesh& mesh) : GeodesicSolver(mesh.vertices, mesh.faces) {}

  DistanceField single_source(int source, GeodesicMethod method = GeodesicMethod::Dijkstra) const;

  /// One field per source, computed concurrently.
  std::vector<DistanceField> fields(const std::vector<int>& sources, GeodesicMethod method) const;

  /// Connected-component label per original vertex.
  const std::vector<int>& components() const { return component_; }
  Eigen::Index num_vertices() const { return vertices_.rows(); }

 private:
  Eigen::VectorXd dijkstra(int rep_source) const;
  Eigen::VectorXd fast_marching(int rep_source) const;
  double triangle_update(int target, int a, double da, int b, double db) const;

  Vertices vertices_;
  std::vector<int> rep_;  // welded representative per vertex
  // CSR adjacency over representatives.
  std::vector<int> adj_offset_, adj_;
  std::vector<double> adj_len_;
  // CSR vertex -> incident (welded, non-degenerate) faces.
  std::vector<int> vf_offset_, vf_;
  std::vector<std::array<int, 3>> faces_;
  std::vector<int> component_;
};

DistanceField single_source(const TexturedMesh& mesh, int source, GeodesicMethod method = GeodesicMethod::Dijkstra);

struct PairwiseOptions {
  GeodesicMethod method = GeodesicMethod::Dijkstra;
  /// Cross-component pairs become +inf instead of raising DisconnectedLesions.
  bool permissive = false;
};

/// Symmetric lesion-to-lesion geodesic matrix, one distance field per lesion.
/// Asymmetry between the two directions is averaged out.
Eigen::MatrixXd pairwise_matrix(const GeodesicSolver& solver, const std::vector<int>& vertices,
                                const PairwiseOptions& options = {});
Eigen::MatrixXd pairwise_matrix(const TexturedMesh& mesh, const std::vector<int>& vertices,
                                const PairwiseOptions& options = {});

void write_matrix_csv(const std::filesystem::path& path, const Eigen::MatrixXd& matrix);

}  // namespace lesiontrack

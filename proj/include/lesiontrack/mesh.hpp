#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "lesiontrack/image.hpp"

namespace lesiontrack {

using Vertices = Eigen::Matrix<double, Eigen::Dynamic, 3, Eigen::RowMajor>;
using Faces = Eigen::Matrix<int, Eigen::Dynamic, 3, Eigen::RowMajor>;
using UvCoords = Eigen::Matrix<double, Eigen::Dynamic, 2, Eigen::RowMajor>;

/// Texture image held by reference; pixels are decoded on demand.
struct TextureRef {
  std::filesystem::path path;
  int width = 0;
  int height = 0;

  Image load() const;
};

/// Triangle mesh with one UV coordinate per vertex: row j of `uv` belongs to
/// row j of `vertices`.
struct TexturedMesh {
  Vertices vertices;
  Faces faces;
  UvCoords uv;
  TextureRef texture;
  std::string id;
  std::string subject_id;
  std::string pose_tag;

  Eigen::Index num_vertices() const { return vertices.rows(); }
  Eigen::Index num_faces() const { return faces.rows(); }
};

/// Throws on the first violated invariant, naming the offending element.
void validate(const TexturedMesh& mesh);

/// Parses OBJ `v`/`vt`/`f` records. Corners referencing one vertex with
/// different UVs split that vertex so the per-vertex UV invariant holds.
/// Polygons are fan-triangulated. The texture header is probed for W/H.
TexturedMesh load_mesh(const std::filesystem::path& geometry_path, const std::filesystem::path& texture_path);

/// Geometry-only variant for callers that supply texture dimensions themselves.
TexturedMesh load_obj(const std::filesystem::path& geometry_path);

/// Writes v/vt/f with `f a/a b/b c/c` corners. When `mtl_name` is non-empty a
/// companion .mtl referencing the texture is written next to the OBJ.
void save_obj(const std::filesystem::path& path, const TexturedMesh& mesh, const std::string& mtl_name = {});

/// Maps every vertex to the lowest-index vertex with identical position.
/// UV-seam duplicates share a representative, which is how the surface graph
/// stays connected across seams.
std::vector<int> weld_coincident(const Vertices& vertices);

}  // namespace lesiontrack

#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>
#include <nlohmann/json.hpp>

#include "lesiontrack/mesh.hpp"
#include "lesiontrack/uv_mapping.hpp"

namespace lesiontrack {

/// Points produced by a template-fitting model; row j of two scans' arrays
/// refers to the same template vertex.
struct ReconstructedVertices {
  std::string mesh_id;
  Vertices points;
};

/// Whitespace-delimited `x y z` per line, template order. Blank lines and
/// `#` comments are ignored.
ReconstructedVertices load_reconstructed(const std::filesystem::path& path);
void save_reconstructed(const std::filesystem::path& path, const ReconstructedVertices& recon);

/// Total map from source-mesh vertices to target-mesh vertices.
struct CorrespondenceMap {
  std::string source_id;
  std::string target_id;
  std::vector<int> map;

  std::size_t size() const { return map.size(); }
  int operator[](std::size_t i) const { return map[i]; }
};

/// For each source vertex: closest reconstructed point of the source scan,
/// then the target vertex closest to the same template point reconstructed in
/// the target scan. Ties go to the lowest index.
CorrespondenceMap chain_correspondence(const TexturedMesh& source, const ReconstructedVertices& source_recon,
                                       const TexturedMesh& target, const ReconstructedVertices& target_recon);

CorrespondenceMap identity_correspondence(const TexturedMesh& mesh);

/// `second` applied after `first`.
CorrespondenceMap compose(const CorrespondenceMap& first, const CorrespondenceMap& second);

struct RigidAlignConfig {
  int max_iters = 50;
  /// RMS nearest-neighbour residual (mesh units) below which the fit counts as converged.
  double tol = 0.01;
  /// Points used per ICP iteration; larger meshes are subsampled uniformly.
  Eigen::Index max_fit_points = 20000;
};

struct RigidAlignment {
  CorrespondenceMap correspondence;
  Eigen::Isometry3d transform = Eigen::Isometry3d::Identity();
  double residual = 0;
  int iterations = 0;
  bool converged = false;
};

/// Point-to-point ICP run from centroid-aligned starts (no rotation and the
/// principal-axis alignments), keeping the lowest residual, followed by
/// nearest-vertex assignment. A residual above `tol` is reported through `converged == false`
/// with the map still filled in.
RigidAlignment rigid_align_correspondence(const TexturedMesh& source, const TexturedMesh& target,
                                          const RigidAlignConfig& config = {});

/// Moves every lesion to its corresponding vertex on `target`.
LesionSet3D map_lesions(const CorrespondenceMap& corr, const LesionSet3D& lesions, const TexturedMesh& target);

nlohmann::json to_json(const CorrespondenceMap& corr);
CorrespondenceMap correspondence_from_json(const nlohmann::json& j);
CorrespondenceMap read_correspondence_json(const std::filesystem::path& path);
void write_correspondence_json(const std::filesystem::path& path, const CorrespondenceMap& corr);

}  // namespace lesiontrack

#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <nlohmann/json.hpp>

#include "lesiontrack/boxes.hpp"
#include "lesiontrack/image.hpp"
#include "lesiontrack/mesh.hpp"
#include "lesiontrack/spatial_index.hpp"

namespace lesiontrack {

struct Lesion3D {
  int vertex = -1;
  Eigen::Vector3d position = Eigen::Vector3d::Zero();
  /// Index of the originating box in its annotation set.
  int box_ref = -1;
  /// Copy of the originating box, kept so confidences and track ids survive
  /// the trip through 3D.
  std::optional<BoundingBox2D> box;
};

struct LesionSet3D {
  std::string mesh_id;
  std::vector<Lesion3D> lesions;

  std::size_t size() const { return lesions.size(); }
  bool empty() const { return lesions.empty(); }
  std::vector<int> vertex_indices() const;
  /// |lesions| x 3 matrix of positions.
  Vertices positions() const;
};

struct UvConvention {
  /// Image rows grow downwards while texture v grows upwards.
  bool flip_v = true;
};

/// Box centre in pixels divided by the image size: u = cx/W, v = 1 - cy/H.
Eigen::Vector2d box_center_to_uv(const BoundingBox2D& box, int width, int height, UvConvention conv = {});

/// Inverse of box_center_to_uv for a single point; used to plant fixtures.
Eigen::Vector2d uv_to_pixel(const Eigen::Vector2d& uv, int width, int height, UvConvention conv = {});

/// Lowest-index vertex minimising the L1 distance between its UV and `uv`.
int uv_to_vertex(const TexturedMesh& mesh, const Eigen::Vector2d& uv);

/// Reusable UV index for mapping many boxes on one mesh.
class UvLocator {
 public:
  explicit UvLocator(const TexturedMesh& mesh);
  int nearest(const Eigen::Vector2d& uv) const;

 private:
  UvIndex index_;
};

/// One lesion per box, located at the vertex whose UV is L1-closest to the
/// box centre. Box dimensions must match the mesh texture when known.
LesionSet3D lesions_to_3d(const TexturedMesh& mesh, const AnnotationSet& annotations, UvConvention conv = {});

struct BoxLayer {
  AnnotationSet boxes;
  Rgb color;
};

inline constexpr int kBorderStroke = 2;

/// Copy of `texture` with box borders drawn `kBorderStroke` pixels thick
/// inside each box. Boxes that centroid-match a box from another layer are
/// drawn in `overlap_color`.
Image embed_boxes(const Image& texture, const std::vector<BoxLayer>& layers, Rgb overlap_color);

nlohmann::json to_json(const LesionSet3D& set);
LesionSet3D lesions_from_json(const nlohmann::json& j);
LesionSet3D read_lesions_json(const std::filesystem::path& path);
void write_lesions_json(const std::filesystem::path& path, const LesionSet3D& set);

}  // namespace lesiontrack

#include "lesiontrack/uv_mapping.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "lesiontrack/error.hpp"

namespace lesiontrack {

std::vector<int> LesionSet3D::vertex_indices() const {
  std::vector<int> out;
  out.reserve(lesions.size());
  for (const auto& l : lesions) out.push_back(l.vertex);
  return out;
}

Vertices LesionSet3D::positions() const {
  Vertices out(static_cast<Eigen::Index>(lesions.size()), 3);
  for (std::size_t i = 0; i < lesions.size(); ++i) out.row(i) = lesions[i].position.transpose();
  return out;
}

Eigen::Vector2d box_center_to_uv(const BoundingBox2D& box, int width, int height, UvConvention conv) {
  const Eigen::Vector2d c = box.center();
  const double u = c.x() / width;
  const double v = c.y() / height;
  return {std::clamp(u, 0.0, 1.0), std::clamp(conv.flip_v ? 1.0 - v : v, 0.0, 1.0)};
}

Eigen::Vector2d uv_to_pixel(const Eigen::Vector2d& uv, int width, int height, UvConvention conv) {
  return {uv.x() * width, (conv.flip_v ? 1.0 - uv.y() : uv.y()) * height};
}

UvLocator::UvLocator(const TexturedMesh& mesh) : index_(mesh.uv) {
  if (mesh.num_vertices() == 0) fail(ErrorKind::EmptyMesh, "mesh '" + mesh.id + "' has no vertices");
}

int UvLocator::nearest(const Eigen::Vector2d& uv) const { return static_cast<int>(index_.nearest(uv).index); }

int uv_to_vertex(const TexturedMesh& mesh, const Eigen::Vector2d& uv) { return UvLocator(mesh).nearest(uv); }

LesionSet3D lesions_to_3d(const TexturedMesh& mesh, const AnnotationSet& annotations, UvConvention conv) {
  if (mesh.num_vertices() == 0) fail(ErrorKind::EmptyMesh, "mesh '" + mesh.id + "' has no vertices");
  const int w = mesh.texture.width ? mesh.texture.width : annotations.width;
  const int h = mesh.texture.height ? mesh.texture.height : annotations.height;
  if (mesh.texture.width && (annotations.width != w || annotations.height != h)) {
    fail(ErrorKind::Range, "annotations for " + std::to_string(annotations.width) + "x" +
                               std::to_string(annotations.height) + " image do not match texture " +
                               std::to_string(w) + "x" + std::to_string(h));
  }
  LesionSet3D out{mesh.id, {}};
  if (annotations.empty()) return out;
  const UvLocator locator(mesh);
  out.lesions.reserve(annotations.size());
  for (std::size_t i = 0; i < annotations.boxes.size(); ++i) {
    const auto& box = annotations.boxes[i];
    validate_box(box, w, h);
    const int v = locator.nearest(box_center_to_uv(box, w, h, conv));
    out.lesions.push_back({v, mesh.vertices.row(v).transpose(), static_cast<int>(i), box});
  }
  return out;
}

namespace {

struct PixelRect {
  int x0, y0, x1, y1;  // inclusive
};

std::optional<PixelRect> pixel_rect(const BoundingBox2D& b, int w, int h) {
  PixelRect r{static_cast<int>(std::floor(b.x1)), static_cast<int>(std::floor(b.y1)),
              static_cast<int>(std::ceil(b.x2)) - 1, static_cast<int>(std::ceil(b.y2)) - 1};
  r.x0 = std::max(r.x0, 0);
  r.y0 = std::max(r.y0, 0);
  r.x1 = std::min(r.x1, w - 1);
  r.y1 = std::min(r.y1, h - 1);
  if (r.x0 > r.x1 || r.y0 > r.y1) return std::nullopt;
  return r;
}

void draw_border(Image& img, const BoundingBox2D& box, Rgb color) {
  const auto rect = pixel_rect(box, img.width, img.height);
  if (!rect) return;
  for (int y = rect->y0; y <= rect->y1; ++y) {
    for (int x = rect->x0; x <= rect->x1; ++x) {
      const int inset = std::min({x - rect->x0, rect->x1 - x, y - rect->y0, rect->y1 - y});
      if (inset < kBorderStroke) img.set(x, y, color);
    }
  }
}

}  // namespace

Image embed_boxes(const Image& texture, const std::vector<BoxLayer>& layers, Rgb overlap_color) {
  Image out = texture;
  for (std::size_t l = 0; l < layers.size(); ++l) {
    for (const auto& box : layers[l].boxes.boxes) {
      bool overlaps = false;
      for (std::size_t o = 0; o < layers.size() && !overlaps; ++o) {
        if (o == l) continue;
        overlaps = std::any_of(layers[o].boxes.boxes.begin(), layers[o].boxes.boxes.end(),
                               [&](const BoundingBox2D& other) { return centroid_match(box, other); });
      }
      draw_border(out, box, overlaps ? overlap_color : layers[l].color);
    }
  }
  return out;
}

nlohmann::json to_json(const LesionSet3D& set) {
  nlohmann::json lesions = nlohmann::json::array();
  for (const auto& l : set.lesions) {
    nlohmann::json e = {{"vertex", l.vertex},
                        {"xyz", {l.position.x(), l.position.y(), l.position.z()}},
                        {"box_ref", l.box_ref}};
    if (l.box) e["box"] = to_json(*l.box);
    lesions.push_back(std::move(e));
  }
  return {{"mesh", set.mesh_id}, {"lesions", std::move(lesions)}};
}

LesionSet3D lesions_from_json(const nlohmann::json& j) {
  LesionSet3D s;
  try {
    s.mesh_id = j.at("mesh").get<std::string>();
    for (const auto& e : j.at("lesions")) {
      Lesion3D l;
      l.vertex = e.at("vertex").get<int>();
      const auto& xyz = e.at("xyz");
      l.position = {xyz.at(0).get<double>(), xyz.at(1).get<double>(), xyz.at(2).get<double>()};
      l.box_ref = e.value("box_ref", -1);
      if (e.contains("box")) l.box = box_from_json(e["box"]);
      s.lesions.push_back(std::move(l));
    }
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::Schema, std::string("lesion set: ") + e.what());
  }
  return s;
}

LesionSet3D read_lesions_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::Io, "cannot open " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::Parse, path.string() + ": " + e.what());
  }
  return lesions_from_json(j);
}

void write_lesions_json(const std::filesystem::path& path, const LesionSet3D& set) {
  std::ofstream out(path);
  if (!out) fail(ErrorKind::Io, "cannot write " + path.string());
  out << to_json(set).dump(2) << '\n';
}

}  // namespace lesiontrack

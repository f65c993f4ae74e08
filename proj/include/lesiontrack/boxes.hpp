#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>
#include <nlohmann/json.hpp>

namespace lesiontrack {

/// Axis-aligned pixel box, (x1,y1) top-left and (x2,y2) bottom-right, y down.
struct BoundingBox2D {
  double x1 = 0, y1 = 0, x2 = 0, y2 = 0;
  std::optional<double> confidence;
  std::optional<std::string> track_id;
  std::optional<std::string> annotator;

  double width() const { return x2 - x1; }
  double height() const { return y2 - y1; }
  double area() const { return width() * height(); }
  Eigen::Vector2d center() const { return {0.5 * (x1 + x2), 0.5 * (y1 + y2)}; }
  bool contains(const Eigen::Vector2d& p) const { return p.x() >= x1 && p.x() <= x2 && p.y() >= y1 && p.y() <= y2; }

  friend bool operator==(const BoundingBox2D&, const BoundingBox2D&) = default;
};

struct AnnotationSet {
  std::string image;
  int width = 0;
  int height = 0;
  std::vector<BoundingBox2D> boxes;

  std::size_t size() const { return boxes.size(); }
  bool empty() const { return boxes.empty(); }

  friend bool operator==(const AnnotationSet&, const AnnotationSet&) = default;
};

/// Throws RangeError when the box is degenerate or leaves [0,W]x[0,H].
void validate_box(const BoundingBox2D& box, int width, int height);
void validate(const AnnotationSet& set);

double iou(const BoundingBox2D& a, const BoundingBox2D& b);

/// True iff each box contains the other's centroid (bounds inclusive).
bool centroid_match(const BoundingBox2D& a, const BoundingBox2D& b);

/// Confidence-descending order; equal confidences fall back to lexicographic
/// (x1, y1, x2, y2) so the result does not depend on input order.
std::vector<std::size_t> confidence_order(const std::vector<BoundingBox2D>& boxes);

/// Greedy non-maximum suppression. Returned boxes are in confidence order and
/// no retained pair overlaps with IoU above `iou_threshold`.
std::vector<BoundingBox2D> nms(const std::vector<BoundingBox2D>& boxes, double iou_threshold);

struct TileRect {
  int x0 = 0, y0 = 0, width = 0, height = 0;
  friend bool operator==(const TileRect&, const TileRect&) = default;
};

/// Row-major tiling; tiles in the last row/column are truncated when
/// `tile_size` does not divide the image.
std::vector<TileRect> tile_split(int width, int height, int tile_size);
BoundingBox2D tile_to_global(const TileRect& tile, const BoundingBox2D& local);
BoundingBox2D global_to_tile(const TileRect& tile, const BoundingBox2D& global);

/// Splits a full-image annotation set into per-tile sets. A box goes to the
/// tile holding its centre and is clipped to that tile.
std::vector<AnnotationSet> split_annotations(const AnnotationSet& set, const std::vector<TileRect>& tiles);

/// Keeps boxes with confidence > `score_threshold`, then truncates both sets to
/// their k = min(|a|, |b|, k_cap) most confident boxes.
std::pair<AnnotationSet, AnnotationSet> filter_topk(const AnnotationSet& a, const AnnotationSet& b,
                                                     double score_threshold, std::size_t k_cap);

// ---- annotation I/O ----

/// Column names (or zero-based indices when `has_header` is false) of a
/// delimited annotation file. Either the x/y/w/h keys or the x1/y1/x2/y2 keys
/// must be set.
struct SchemaMapping {
  char delimiter = ',';
  bool has_header = true;
  std::string image;
  std::string x, y, w, h;
  std::string x1, y1, x2, y2;
  std::string confidence, track_id, annotator;
  int image_width = 4096;
  int image_height = 4096;
  /// Restricts loading to rows of this image; empty accepts every image.
  std::string image_filter;

  static SchemaMapping xywh(std::string image, std::string x, std::string y, std::string w, std::string h);
  static SchemaMapping corners(std::string image, std::string x1, std::string y1, std::string x2, std::string y2);
};

/// Loads one annotation set from CSV (per `mapping`) or canonical JSON
/// (selected by a `.json` extension). CSV rows without a confidence column
/// default to 1.0.
AnnotationSet load_annotations(const std::filesystem::path& path, const SchemaMapping& mapping);

/// CSV holding many images: one set per image, in first-appearance order.
std::vector<AnnotationSet> load_annotation_collection(const std::filesystem::path& path, const SchemaMapping& mapping);

nlohmann::json to_json(const BoundingBox2D& box);
nlohmann::json to_json(const AnnotationSet& set);
BoundingBox2D box_from_json(const nlohmann::json& j);
AnnotationSet annotations_from_json(const nlohmann::json& j);

AnnotationSet read_annotations_json(const std::filesystem::path& path);
void write_annotations_json(const std::filesystem::path& path, const AnnotationSet& set);

}  // namespace lesiontrack

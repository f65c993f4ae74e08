#include "lesiontrack/boxes.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <numeric>
#include <tuple>

#include "lesiontrack/error.hpp"

namespace lesiontrack {

void validate_box(const BoundingBox2D& box, int width, int height) {
  if (!(box.x1 < box.x2 && box.y1 < box.y2)) fail(ErrorKind::Range, "degenerate box");
  if (box.x1 < 0 || box.y1 < 0 || box.x2 > width || box.y2 > height) {
    fail(ErrorKind::Range, "box (" + std::to_string(box.x1) + "," + std::to_string(box.y1) + "," +
                               std::to_string(box.x2) + "," + std::to_string(box.y2) + ") outside " +
                               std::to_string(width) + "x" + std::to_string(height) + " image");
  }
  if (box.confidence && !(*box.confidence >= 0.0 && *box.confidence <= 1.0)) {
    fail(ErrorKind::Range, "confidence outside [0,1]");
  }
}

void validate(const AnnotationSet& set) {
  for (const auto& b : set.boxes) validate_box(b, set.width, set.height);
}

double iou(const BoundingBox2D& a, const BoundingBox2D& b) {
  const double iw = std::min(a.x2, b.x2) - std::max(a.x1, b.x1);
  const double ih = std::min(a.y2, b.y2) - std::max(a.y1, b.y1);
  if (iw <= 0 || ih <= 0) return 0.0;
  const double inter = iw * ih;
  return inter / (a.area() + b.area() - inter);
}

bool centroid_match(const BoundingBox2D& a, const BoundingBox2D& b) {
  return b.contains(a.center()) && a.contains(b.center());
}

std::vector<std::size_t> confidence_order(const std::vector<BoundingBox2D>& boxes) {
  std::vector<std::size_t> order(boxes.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) {
    const auto& a = boxes[i];
    const auto& b = boxes[j];
    const double ca = a.confidence.value_or(0.0), cb = b.confidence.value_or(0.0);
    if (ca != cb) return ca > cb;
    return std::tie(a.x1, a.y1, a.x2, a.y2) < std::tie(b.x1, b.y1, b.x2, b.y2);
  });
  return order;
}

std::vector<BoundingBox2D> nms(const std::vector<BoundingBox2D>& boxes, double iou_threshold) {
  for (const auto& b : boxes) {
    if (!b.confidence) fail(ErrorKind::MissingConfidence, "nms needs a confidence on every box");
  }
  std::vector<BoundingBox2D> kept;
  for (const auto i : confidence_order(boxes)) {
    const bool suppressed =
        std::any_of(kept.begin(), kept.end(), [&](const BoundingBox2D& k) { return iou(k, boxes[i]) > iou_threshold; });
    if (!suppressed) kept.push_back(boxes[i]);
  }
  return kept;
}

std::vector<TileRect> tile_split(int width, int height, int tile_size) {
  if (tile_size <= 0) fail(ErrorKind::InvalidConfig, "tile size must be positive");
  std::vector<TileRect> tiles;
  for (int y = 0; y < height; y += tile_size) {
    for (int x = 0; x < width; x += tile_size) {
      tiles.push_back({x, y, std::min(tile_size, width - x), std::min(tile_size, height - y)});
    }
  }
  return tiles;
}

BoundingBox2D tile_to_global(const TileRect& tile, const BoundingBox2D& local) {
  BoundingBox2D g = local;
  g.x1 += tile.x0;
  g.x2 += tile.x0;
  g.y1 += tile.y0;
  g.y2 += tile.y0;
  return g;
}

BoundingBox2D global_to_tile(const TileRect& tile, const BoundingBox2D& global) {
  BoundingBox2D l = global;
  l.x1 -= tile.x0;
  l.x2 -= tile.x0;
  l.y1 -= tile.y0;
  l.y2 -= tile.y0;
  return l;
}

std::vector<AnnotationSet> split_annotations(const AnnotationSet& set, const std::vector<TileRect>& tiles) {
  std::vector<AnnotationSet> out;
  out.reserve(tiles.size());
  for (std::size_t t = 0; t < tiles.size(); ++t) {
    out.push_back({set.image + "#" + std::to_string(t), tiles[t].width, tiles[t].height, {}});
  }
  for (const auto& box : set.boxes) {
    const auto c = box.center();
    for (std::size_t t = 0; t < tiles.size(); ++t) {
      const auto& tile = tiles[t];
      // Half-open ownership so a centre on a shared edge lands in exactly one tile.
      const bool right_edge = tile.x0 + tile.width == set.width;
      const bool bottom_edge = tile.y0 + tile.height == set.height;
      const bool in_x = c.x() >= tile.x0 && (c.x() < tile.x0 + tile.width || (right_edge && c.x() <= set.width));
      const bool in_y = c.y() >= tile.y0 && (c.y() < tile.y0 + tile.height || (bottom_edge && c.y() <= set.height));
      if (!in_x || !in_y) continue;
      auto local = global_to_tile(tile, box);
      local.x1 = std::max(local.x1, 0.0);
      local.y1 = std::max(local.y1, 0.0);
      local.x2 = std::min(local.x2, static_cast<double>(tile.width));
      local.y2 = std::min(local.y2, static_cast<double>(tile.height));
      out[t].boxes.push_back(local);
      break;
    }
  }
  return out;
}

std::pair<AnnotationSet, AnnotationSet> filter_topk(const AnnotationSet& a, const AnnotationSet& b,
                                                     double score_threshold, std::size_t k_cap) {
  auto above = [&](const AnnotationSet& s) {
    AnnotationSet out{s.image, s.width, s.height, {}};
    for (const auto i : confidence_order(s.boxes)) {
      if (!s.boxes[i].confidence) fail(ErrorKind::MissingConfidence, "filter_topk on " + s.image);
      if (*s.boxes[i].confidence > score_threshold) out.boxes.push_back(s.boxes[i]);
    }
    return out;
  };
  auto fa = above(a);
  auto fb = above(b);
  const std::size_t k = std::min({fa.size(), fb.size(), k_cap});
  fa.boxes.resize(k);
  fb.boxes.resize(k);
  return {std::move(fa), std::move(fb)};
}

// ---- I/O ----

SchemaMapping SchemaMapping::xywh(std::string image, std::string x, std::string y, std::string w, std::string h) {
  SchemaMapping m;
  m.image = std::move(image);
  m.x = std::move(x);
  m.y = std::move(y);
  m.w = std::move(w);
  m.h = std::move(h);
  return m;
}

SchemaMapping SchemaMapping::corners(std::string image, std::string x1, std::string y1, std::string x2,
                                     std::string y2) {
  SchemaMapping m;
  m.image = std::move(image);
  m.x1 = std::move(x1);
  m.y1 = std::move(y1);
  m.x2 = std::move(x2);
  m.y2 = std::move(y2);
  return m;
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line, char delim) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (quoted) {
      if (ch == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (ch == '"') {
        quoted = false;
      } else {
        cur += ch;
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == delim) {
      out.push_back(std::move(cur));
      cur.clear();
    } else if (ch != '\r') {
      cur += ch;
    }
  }
  out.push_back(std::move(cur));
  return out;
}

double to_number(const std::string& s, const std::string& column, std::size_t line) {
  double v = 0;
  const auto* b = s.data();
  const auto* e = s.data() + s.size();
  while (b < e && *b == ' ') ++b;
  auto [ptr, ec] = std::from_chars(b, e, v);
  if (ec != std::errc{} || b == e) {
    fail(ErrorKind::Schema, "line " + std::to_string(line) + ": column '" + column + "' is not numeric: '" + s + "'");
  }
  return v;
}

class ColumnResolver {
 public:
  ColumnResolver(const SchemaMapping& m, const std::vector<std::string>& header) : m_(m), header_(header) {}

  // -1 when the key is unset.
  int resolve(const std::string& key) const {
    if (key.empty()) return -1;
    if (m_.has_header) {
      const auto it = std::find(header_.begin(), header_.end(), key);
      if (it != header_.end()) return static_cast<int>(it - header_.begin());
    }
    int idx = -1;
    auto [ptr, ec] = std::from_chars(key.data(), key.data() + key.size(), idx);
    if (ec == std::errc{} && ptr == key.data() + key.size() && idx >= 0) return idx;
    fail(ErrorKind::Schema, "mapped column '" + key + "' not present");
  }

 private:
  const SchemaMapping& m_;
  const std::vector<std::string>& header_;
};

std::vector<AnnotationSet> parse_csv(const std::filesystem::path& path, const SchemaMapping& m) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::Io, "cannot open " + path.string());
  std::string line;
  std::vector<std::string> header;
  std::size_t lineno = 0;
  if (m.has_header) {
    if (!std::getline(in, line)) return {};
    ++lineno;
    header = split_csv_line(line, m.delimiter);
  }
  const ColumnResolver cols(m, header);
  const bool use_corners = !m.x1.empty();
  if (!use_corners && (m.x.empty() || m.y.empty() || m.w.empty() || m.h.empty())) {
    fail(ErrorKind::Schema, "mapping needs x/y/w/h or x1/y1/x2/y2 keys");
  }
  const int c_img = cols.resolve(m.image);
  const int c_a = cols.resolve(use_corners ? m.x1 : m.x);
  const int c_b = cols.resolve(use_corners ? m.y1 : m.y);
  const int c_c = cols.resolve(use_corners ? m.x2 : m.w);
  const int c_d = cols.resolve(use_corners ? m.y2 : m.h);
  const int c_conf = cols.resolve(m.confidence);
  const int c_track = cols.resolve(m.track_id);
  const int c_ann = cols.resolve(m.annotator);

  std::vector<AnnotationSet> sets;
  std::map<std::string, std::size_t> by_image;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto f = split_csv_line(line, m.delimiter);
    auto get = [&](int c, const std::string& name) -> const std::string& {
      if (c >= static_cast<int>(f.size())) {
        fail(ErrorKind::Schema, "line " + std::to_string(lineno) + ": missing column '" + name + "'");
      }
      return f[c];
    };
    const std::string image = c_img >= 0 ? get(c_img, m.image) : path.stem().string();
    if (!m.image_filter.empty() && image != m.image_filter) continue;

    BoundingBox2D box;
    const double a = to_number(get(c_a, "x"), "x", lineno);
    const double b = to_number(get(c_b, "y"), "y", lineno);
    const double c = to_number(get(c_c, "x2/w"), "x2/w", lineno);
    const double d = to_number(get(c_d, "y2/h"), "y2/h", lineno);
    box.x1 = a;
    box.y1 = b;
    box.x2 = use_corners ? c : a + c;
    box.y2 = use_corners ? d : b + d;
    box.confidence = c_conf >= 0 ? to_number(get(c_conf, m.confidence), m.confidence, lineno) : 1.0;
    if (c_track >= 0 && !get(c_track, m.track_id).empty()) box.track_id = get(c_track, m.track_id);
    if (c_ann >= 0 && !get(c_ann, m.annotator).empty()) box.annotator = get(c_ann, m.annotator);
    try {
      validate_box(box, m.image_width, m.image_height);
    } catch (const Error& e) {
      fail(e.kind(), path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }

    auto [it, inserted] = by_image.try_emplace(image, sets.size());
    if (inserted) sets.push_back({image, m.image_width, m.image_height, {}});
    sets[it->second].boxes.push_back(std::move(box));
  }
  return sets;
}

bool is_json(const std::filesystem::path& path) { return path.extension() == ".json"; }

}  // namespace

AnnotationSet load_annotations(const std::filesystem::path& path, const SchemaMapping& mapping) {
  if (is_json(path)) return read_annotations_json(path);
  auto sets = parse_csv(path, mapping);
  if (sets.empty()) {
    return {mapping.image_filter.empty() ? path.stem().string() : mapping.image_filter, mapping.image_width,
            mapping.image_height, {}};
  }
  if (sets.size() > 1) {
    fail(ErrorKind::Schema, path.string() + " holds " + std::to_string(sets.size()) +
                                " images; set an image filter or load it as a collection");
  }
  return std::move(sets.front());
}

std::vector<AnnotationSet> load_annotation_collection(const std::filesystem::path& path, const SchemaMapping& mapping) {
  if (is_json(path)) return {read_annotations_json(path)};
  return parse_csv(path, mapping);
}

nlohmann::json to_json(const BoundingBox2D& box) {
  nlohmann::json j = {{"x1", box.x1}, {"y1", box.y1}, {"x2", box.x2}, {"y2", box.y2}};
  if (box.confidence) j["confidence"] = *box.confidence;
  if (box.track_id) j["track_id"] = *box.track_id;
  if (box.annotator) j["annotator"] = *box.annotator;
  return j;
}

nlohmann::json to_json(const AnnotationSet& set) {
  nlohmann::json boxes = nlohmann::json::array();
  for (const auto& b : set.boxes) boxes.push_back(to_json(b));
  return {{"image", set.image}, {"width", set.width}, {"height", set.height}, {"boxes", std::move(boxes)}};
}

BoundingBox2D box_from_json(const nlohmann::json& j) {
  try {
    BoundingBox2D b;
    b.x1 = j.at("x1").get<double>();
    b.y1 = j.at("y1").get<double>();
    b.x2 = j.at("x2").get<double>();
    b.y2 = j.at("y2").get<double>();
    if (j.contains("confidence") && !j["confidence"].is_null()) b.confidence = j["confidence"].get<double>();
    if (j.contains("track_id") && !j["track_id"].is_null()) {
      const auto& t = j["track_id"];
      b.track_id = t.is_string() ? t.get<std::string>() : t.dump();
    }
    if (j.contains("annotator") && !j["annotator"].is_null()) b.annotator = j["annotator"].get<std::string>();
    return b;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::Schema, std::string("box record: ") + e.what());
  }
}

AnnotationSet annotations_from_json(const nlohmann::json& j) {
  AnnotationSet s;
  try {
    s.image = j.at("image").get<std::string>();
    s.width = j.at("width").get<int>();
    s.height = j.at("height").get<int>();
    for (const auto& b : j.at("boxes")) s.boxes.push_back(box_from_json(b));
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::Schema, std::string("annotation set: ") + e.what());
  }
  validate(s);
  return s;
}

AnnotationSet read_annotations_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::Io, "cannot open " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::Parse, path.string() + ": " + e.what());
  }
  return annotations_from_json(j);
}

void write_annotations_json(const std::filesystem::path& path, const AnnotationSet& set) {
  std::ofstream out(path);
  if (!out) fail(ErrorKind::Io, "cannot write " + path.string());
  out << to_json(set).dump(2) << '\n';
}

}  // namespace lesiontrack

#include "lesiontrack/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <numeric>
#include <random>

#include <Eigen/Geometry>

#include "lesiontrack/error.hpp"
#include "lesiontrack/uv_mapping.hpp"

namespace lesiontrack {

namespace {

constexpr Rgb kSkin{224, 172, 150};
constexpr Rgb kSpot{90, 60, 50};

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  // Rejection keeps the draw exact and portable.
  int below(int bound) {
    const auto b = static_cast<std::uint64_t>(bound);
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % b;
    std::uint64_t x;
    do {
      x = engine_();
    } while (x >= limit);
    return static_cast<int>(x % b);
  }
  double normal() {
    // Box-Muller on two uniforms in (0,1].
    const double u1 = 1.0 - uniform(), u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[below(static_cast<int>(i))]);
  }

 private:
  std::mt19937_64 engine_;
};

struct Capsule {
  int rings, segments;
  double radius, length;

  double profile_length() const { return std::numbers::pi * radius + length; }
  int bottom() const { return 0; }
  int top() const { return 1 + (rings - 1) * (segments + 1); }
  int at(int ring, int column) const { return 1 + (ring - 1) * (segments + 1) + column; }
  int num_vertices() const { return top() + 1; }

  // Radius and height at arc length s along the meridian.
  std::pair<double, double> profile(double s) const {
    const double cap = 0.5 * std::numbers::pi * radius;
    if (s < cap) {
      const double phi = s / radius;
      return {radius * std::sin(phi), -0.5 * length - radius * std::cos(phi)};
    }
    if (s <= cap + length) return {radius, -0.5 * length + (s - cap)};
    const double phi = (s - cap - length) / radius;
    return {radius * std::cos(phi), 0.5 * length + radius * std::sin(phi)};
  }
  double ring_arc(int ring) const { return profile_length() * ring / rings; }
};

TexturedMesh build_capsule(const Capsule& c) {
  TexturedMesh m;
  const int n = c.num_vertices();
  m.vertices.resize(n, 3);
  m.uv.resize(n, 2);
  const double p = c.profile_length();
  m.vertices.row(c.bottom()) << 0, 0, -0.5 * c.length - c.radius;
  m.uv.row(c.bottom()) << 0.5, 0.0;
  m.vertices.row(c.top()) << 0, 0, 0.5 * c.length + c.radius;
  m.uv.row(c.top()) << 0.5, 1.0;
  for (int k = 1; k < c.rings; ++k) {
    const double s = c.ring_arc(k);
    const auto [r, z] = c.profile(s);
    for (int j = 0; j <= c.segments; ++j) {
      const int v = c.at(k, j);
      if (j == c.segments) {
        // Seam column repeats column 0 bit for bit so welding can find it.
        m.vertices.row(v) = m.vertices.row(c.at(k, 0));
      } else {
        const double theta = 2.0 * std::numbers::pi * j / c.segments;
        m.vertices.row(v) << r * std::cos(theta), r * std::sin(theta), z;
      }
      m.uv.row(v) << static_cast<double>(j) / c.segments, s / p;
    }
  }
  std::vector<Eigen::Vector3i> faces;
  for (int j = 0; j < c.segments; ++j) faces.emplace_back(c.bottom(), c.at(1, j + 1), c.at(1, j));
  for (int k = 1; k + 1 < c.rings; ++k) {
    for (int j = 0; j < c.segments; ++j) {
      const int a = c.at(k, j), b = c.at(k, j + 1), cc = c.at(k + 1, j + 1), d = c.at(k + 1, j);
      faces.emplace_back(a, b, cc);
      faces.emplace_back(a, cc, d);
    }
  }
  for (int j = 0; j < c.segments; ++j) faces.emplace_back(c.top(), c.at(c.rings - 1, j), c.at(c.rings - 1, j + 1));
  m.faces.resize(static_cast<Eigen::Index>(faces.size()), 3);
  for (std::size_t f = 0; f < faces.size(); ++f) m.faces.row(f) = faces[f].transpose();
  return m;
}

// Smooth bend of the body axis followed by a rigid motion.
struct Deformation {
  double bend;
  Eigen::Isometry3d rigid;

  Eigen::Vector3d operator()(const Eigen::Vector3d& p) const {
    Eigen::Vector3d q = p;
    if (bend != 0.0) {
      const double rb = 1.0 / bend;
      const double theta = p.z() * bend;
      q.x() = rb - (rb - p.x()) * std::cos(theta);
      q.z() = (rb - p.x()) * std::sin(theta);
    }
    return rigid * q;
  }
};

Image paint(int size, const TexturedMesh& mesh, const std::vector<int>& lesions, int radius) {
  Image img(size, size, kSkin);
  for (const int v : lesions) {
    const Eigen::Vector2d px = uv_to_pixel(mesh.uv.row(v).transpose(), size, size);
    for (int y = static_cast<int>(px.y()) - radius - 1; y <= static_cast<int>(px.y()) + radius + 1; ++y) {
      for (int x = static_cast<int>(px.x()) - radius - 1; x <= static_cast<int>(px.x()) + radius + 1; ++x) {
        if (x < 0 || y < 0 || x >= size || y >= size) continue;
        const double dx = x + 0.5 - px.x(), dy = y + 0.5 - px.y();
        if (dx * dx + dy * dy <= radius * radius) img.set(x, y, kSpot);
      }
    }
  }
  return img;
}

BoundingBox2D lesion_box(const TexturedMesh& mesh, int vertex, int size, int radius, const std::string& track) {
  const Eigen::Vector2d px = uv_to_pixel(mesh.uv.row(vertex).transpose(), size, size);
  const double half = radius + 1.0;
  BoundingBox2D b{px.x() - half, px.y() - half, px.x() + half, px.y() + half, std::nullopt, track, std::nullopt};
  if (b.x1 < 0 || b.y1 < 0 || b.x2 > size || b.y2 > size) {
    fail(ErrorKind::InvalidConfig, "synthetic lesion box leaves the texture; enlarge the texture or shrink the lesions");
  }
  return b;
}

}  // namespace

SyntheticPair generate_synthetic_pair(const SyntheticConfig& cfg) {
  if (cfg.num_lesions < 0 || cfg.disappearing < 0 || cfg.appearing < 0 || cfg.disappearing > cfg.num_lesions) {
    fail(ErrorKind::InvalidConfig, "synthetic lesion counts are inconsistent");
  }
  if (cfg.rings < 4 || cfg.segments < 6 || cfg.radius <= 0 || cfg.length <= 0 || cfg.texture_size < 16) {
    fail(ErrorKind::InvalidConfig, "synthetic surface is too coarse");
  }
  Rng rng(cfg.seed);
  const Capsule cap{cfg.rings, cfg.segments, cfg.radius, cfg.length};
  TexturedMesh a = build_capsule(cap);

  // Lesion sites on the cylindrical part, away from the UV seam.
  const double cap_arc = 0.5 * std::numbers::pi * cfg.radius;
  std::vector<std::pair<int, int>> sites;  // (ring, column)
  const int total = cfg.num_lesions + cfg.appearing;
  for (int tries = 0; static_cast<int>(sites.size()) < total; ++tries) {
    if (tries > 200000) fail(ErrorKind::InvalidConfig, "cannot place synthetic lesions with the requested separation");
    const int k = 2 + rng.below(cap.rings - 3);
    const int j = 2 + rng.below(cap.segments - 3);
    const double s = cap.ring_arc(k);
    if (s < cap_arc + 0.02 || s > cap_arc + cfg.length - 0.02) continue;
    const Eigen::RowVector3d p = a.vertices.row(cap.at(k, j));
    const bool clear = std::all_of(sites.begin(), sites.end(), [&](const auto& o) {
      return (a.vertices.row(cap.at(o.first, o.second)) - p).norm() >= cfg.min_separation;
    });
    if (clear) sites.emplace_back(k, j);
  }

  std::vector<int> order(cfg.num_lesions);
  std::iota(order.begin(), order.end(), 0);
  rng.shuffle(order);
  std::vector<char> gone(cfg.num_lesions, 0);
  for (int d = 0; d < cfg.disappearing; ++d) gone[order[d]] = 1;

  Eigen::Isometry3d rigid = Eigen::Isometry3d::Identity();
  rigid.rotate(Eigen::AngleAxisd(cfg.rotation_deg * std::numbers::pi / 180.0, Eigen::Vector3d(0.3, 0.2, 1.0).normalized()));
  rigid.pretranslate(Eigen::Vector3d(cfg.shift, 0.5 * cfg.shift, 0.0));
  const Deformation deform{cfg.bend, rigid};

  const int n = cap.num_vertices();
  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  rng.shuffle(perm);

  SyntheticPair out;
  out.config = cfg;
  TexturedMesh b;
  b.vertices.resize(n, 3);
  b.uv.resize(n, 2);
  for (int i = 0; i < n; ++i) {
    b.vertices.row(perm[i]) = deform(a.vertices.row(i).transpose()).transpose();
    b.uv.row(perm[i]) = a.uv.row(i);
  }
  b.faces.resize(a.faces.rows(), 3);
  for (Eigen::Index f = 0; f < a.faces.rows(); ++f) {
    for (int c = 0; c < 3; ++c) b.faces(f, c) = perm[a.faces(f, c)];
  }
  out.truth = {"synth_a", "synth_b", perm};

  // First scan lesions in site order; second scan keeps survivors (possibly
  // nudged to a grid neighbour) plus new ones, listed in shuffled order.
  std::vector<std::pair<int, std::string>> second;  // (vertex on b, track id)
  std::vector<int> second_source;                   // index on first scan or -1
  for (int l = 0; l < cfg.num_lesions; ++l) {
    auto [k, j] = sites[l];
    const std::string id = "L" + std::to_string(l);
    out.first.lesion_vertices.push_back(cap.at(k, j));
    if (gone[l]) continue;
    if (rng.uniform() < cfg.jitter_probability) {
      const int dir = rng.below(4);
      k += dir == 0 ? 1 : dir == 1 ? -1 : 0;
      j += dir == 2 ? 1 : dir == 3 ? -1 : 0;
    }
    second.emplace_back(perm[cap.at(k, j)], id);
    second_source.push_back(l);
  }
  for (int l = cfg.num_lesions; l < total; ++l) {
    second.emplace_back(perm[cap.at(sites[l].first, sites[l].second)], "N" + std::to_string(l - cfg.num_lesions));
    second_source.push_back(-1);
  }
  std::vector<int> listing(second.size());
  std::iota(listing.begin(), listing.end(), 0);
  rng.shuffle(listing);

  const int size = cfg.texture_size;
  auto finish = [&](SyntheticScan& scan, TexturedMesh mesh, const std::string& id, const std::string& pose) {
    mesh.id = id;
    mesh.subject_id = "synth";
    mesh.pose_tag = pose;
    mesh.texture = {id + ".png", size, size};
    scan.mesh = std::move(mesh);
    scan.boxes.image = id + ".png";
    scan.boxes.width = size;
    scan.boxes.height = size;
  };
  finish(out.first, std::move(a), "synth_a", "a");
  finish(out.second, std::move(b), "synth_b", "b");
  for (int l = 0; l < cfg.num_lesions; ++l) {
    out.first.boxes.boxes.push_back(
        lesion_box(out.first.mesh, out.first.lesion_vertices[l], size, cfg.lesion_radius_px, "L" + std::to_string(l)));
  }
  for (std::size_t pos = 0; pos < listing.size(); ++pos) {
    const auto& [v, id] = second[listing[pos]];
    out.second.lesion_vertices.push_back(v);
    out.second.boxes.boxes.push_back(lesion_box(out.second.mesh, v, size, cfg.lesion_radius_px, id));
    if (second_source[listing[pos]] >= 0) out.lesion_pairs.emplace_back(second_source[listing[pos]], static_cast<int>(pos));
  }
  std::sort(out.lesion_pairs.begin(), out.lesion_pairs.end());
  out.first.texture = paint(size, out.first.mesh, out.first.lesion_vertices, cfg.lesion_radius_px);
  out.second.texture = paint(size, out.second.mesh, out.second.lesion_vertices, cfg.lesion_radius_px);

  // Template reconstructions: the same surface samples seen through each scan
  // with independent noise, indexed identically.
  const int t = std::min(cfg.template_points, n);
  std::vector<int> samples(n);
  std::iota(samples.begin(), samples.end(), 0);
  rng.shuffle(samples);
  samples.resize(t);
  std::sort(samples.begin(), samples.end());
  out.first.reconstruction = {"synth_a", Vertices(t, 3)};
  out.second.reconstruction = {"synth_b", Vertices(t, 3)};
  for (int r = 0; r < t; ++r) {
    const Eigen::Vector3d p = out.first.mesh.vertices.row(samples[r]).transpose();
    const Eigen::Vector3d na(rng.normal(), rng.normal(), rng.normal());
    const Eigen::Vector3d nb(rng.normal(), rng.normal(), rng.normal());
    out.first.reconstruction.points.row(r) = (p + cfg.template_noise * na).transpose();
    out.second.reconstruction.points.row(r) = (deform(p) + cfg.template_noise * nb).transpose();
  }
  return out;
}

nlohmann::json manifest(const SyntheticPair& pair, const std::string& stem) {
  auto scan = [&](const SyntheticScan& s, const std::string& tag) {
    return nlohmann::json{{"mesh", stem + "_" + tag + ".obj"},
                          {"texture", stem + "_" + tag + ".png"},
                          {"boxes", stem + "_" + tag + "_boxes.json"},
                          {"reconstruction", stem + "_" + tag + "_recon.xyz"},
                          {"num_vertices", s.mesh.num_vertices()},
                          {"num_lesions", s.boxes.size()},
                          {"lesion_vertices", s.lesion_vertices}};
  };
  nlohmann::json pairs = nlohmann::json::array();
  for (const auto& [i, j] : pair.lesion_pairs) pairs.push_back({i, j});
  const auto& c = pair.config;
  return {{"first", scan(pair.first, "a")},
          {"second", scan(pair.second, "b")},
          {"correspondence", stem + "_truth_corr.json"},
          {"lesion_pairs", pairs},
          {"disappearing", c.disappearing},
          {"appearing", c.appearing},
          {"config",
           {{"num_lesions", c.num_lesions},
            {"bend", c.bend},
            {"shift", c.shift},
            {"rotation_deg", c.rotation_deg},
            {"jitter_probability", c.jitter_probability},
            {"seed", c.seed}}}};
}

void write_synthetic_pair(const std::filesystem::path& dir, const SyntheticPair& pair, const std::string& stem) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) fail(ErrorKind::Io, "cannot create " + dir.string() + ": " + ec.message());
  auto write_scan = [&](const SyntheticScan& s, const std::string& tag) {
    TexturedMesh m = s.mesh;
    m.texture.path = stem + "_" + tag + ".png";
    save_obj(dir / (stem + "_" + tag + ".obj"), m, stem + "_" + tag);
    write_png(dir / (stem + "_" + tag + ".png"), s.texture);
    AnnotationSet boxes = s.boxes;
    boxes.image = stem + "_" + tag + ".png";
    write_annotations_json(dir / (stem + "_" + tag + "_boxes.json"), boxes);
    save_reconstructed(dir / (stem + "_" + tag + "_recon.xyz"), s.reconstruction);
  };
  write_scan(pair.first, "a");
  write_scan(pair.second, "b");
  write_correspondence_json(dir / (stem + "_truth_corr.json"), pair.truth);
  std::ofstream out(dir / (stem + "_manifest.json"));
  if (!out) fail(ErrorKind::Io, "cannot write manifest in " + dir.string());
  out << manifest(pair, stem).dump(2) << '\n';
}

}  // namespace lesiontrack

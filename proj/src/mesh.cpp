#include "lesiontrack/mesh.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "lesiontrack/error.hpp"

namespace lesiontrack {
namespace {

struct Corner {
  long v = -1;
  long t = -1;
};

std::string where(const std::filesystem::path& path, std::size_t line) {
  return path.string() + ":" + std::to_string(line);
}

double parse_double(std::string_view tok, const std::filesystem::path& path, std::size_t line) {
  double out = 0;
  const auto* end = tok.data() + tok.size();
  auto [ptr, ec] = std::from_chars(tok.data(), end, out);
  if (ec != std::errc{} || ptr != end) fail(ErrorKind::Parse, where(path, line) + ": bad number '" + std::string(tok) + "'");
  return out;
}

// OBJ indices are 1-based; negative values count back from the current end.
long resolve_index(std::string_view tok, std::size_t count, const std::filesystem::path& path, std::size_t line) {
  long raw = 0;
  const auto* end = tok.data() + tok.size();
  auto [ptr, ec] = std::from_chars(tok.data(), end, raw);
  if (ec != std::errc{} || ptr != end || raw == 0) {
    fail(ErrorKind::Parse, where(path, line) + ": bad index '" + std::string(tok) + "'");
  }
  const long idx = raw > 0 ? raw - 1 : static_cast<long>(count) + raw;
  if (idx < 0 || idx >= static_cast<long>(count)) {
    fail(ErrorKind::Parse, where(path, line) + ": index " + std::to_string(raw) + " out of range (have " +
                               std::to_string(count) + ")");
  }
  return idx;
}

std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t' || s[i] == '\r')) ++i;
    const std::size_t start = i;
    while (i < s.size() && s[i] != ' ' && s[i] != '\t' && s[i] != '\r') ++i;
    if (i > start) out.push_back(s.substr(start, i - start));
  }
  return out;
}

}  // namespace

Image TextureRef::load() const {
  auto img = read_image(path);
  if ((width && img.width != width) || (height && img.height != height)) {
    fail(ErrorKind::Range, "texture " + path.string() + " changed size since the mesh was loaded");
  }
  return img;
}

void validate(const TexturedMesh& mesh) {
  const auto n = mesh.num_vertices();
  if (n == 0 || mesh.num_faces() == 0) fail(ErrorKind::EmptyMesh, "mesh '" + mesh.id + "' has no vertices or faces");
  if (mesh.uv.rows() != n) {
    fail(ErrorKind::UVMismatch, "mesh '" + mesh.id + "' has " + std::to_string(mesh.uv.rows()) + " UVs for " +
                                    std::to_string(n) + " vertices");
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!mesh.vertices.row(i).allFinite()) fail(ErrorKind::Parse, "vertex " + std::to_string(i) + " is not finite");
    const double u = mesh.uv(i, 0), v = mesh.uv(i, 1);
    if (!(u >= 0.0 && u <= 1.0 && v >= 0.0 && v <= 1.0)) {
      fail(ErrorKind::UVMismatch, "uv of vertex " + std::to_string(i) + " outside [0,1]^2");
    }
  }
  for (Eigen::Index f = 0; f < mesh.num_faces(); ++f) {
    const auto face = mesh.faces.row(f);
    for (int k = 0; k < 3; ++k) {
      if (face[k] < 0 || face[k] >= n) {
        fail(ErrorKind::Parse, "face " + std::to_string(f) + " references vertex " + std::to_string(face[k]) +
                                   " of " + std::to_string(n));
      }
    }
    if (face[0] == face[1] || face[1] == face[2] || face[0] == face[2]) {
      fail(ErrorKind::Parse, "face " + std::to_string(f) + " is degenerate");
    }
  }
}

TexturedMesh load_obj(const std::filesystem::path& geometry_path) {
  std::ifstream in(geometry_path);
  if (!in) fail(ErrorKind::Io, "cannot open " + geometry_path.string());

  std::vector<Eigen::Vector3d> positions;
  std::vector<Eigen::Vector2d> texcoords;
  std::vector<std::array<Corner, 3>> triangles;

  std::string line;
  std::size_t lineno = 0;
  std::vector<Corner> poly;
  while (std::getline(in, line)) {
    ++lineno;
    const auto toks = split_ws(line);
    if (toks.empty() || toks[0][0] == '#') continue;
    const auto tag = toks[0];
    if (tag == "v") {
      if (toks.size() < 4) fail(ErrorKind::Parse, where(geometry_path, lineno) + ": vertex needs 3 coordinates");
      positions.emplace_back(parse_double(toks[1], geometry_path, lineno), parse_double(toks[2], geometry_path, lineno),
                             parse_double(toks[3], geometry_path, lineno));
    } else if (tag == "vt") {
      if (toks.size() < 3) fail(ErrorKind::Parse, where(geometry_path, lineno) + ": vt needs 2 coordinates");
      texcoords.emplace_back(parse_double(toks[1], geometry_path, lineno), parse_double(toks[2], geometry_path, lineno));
    } else if (tag == "f") {
      if (toks.size() < 4) fail(ErrorKind::Parse, where(geometry_path, lineno) + ": face needs >= 3 corners");
      poly.clear();
      for (std::size_t k = 1; k < toks.size(); ++k) {
        const auto tok = toks[k];
        const auto s1 = tok.find('/');
        Corner c;
        c.v = resolve_index(tok.substr(0, s1), positions.size(), geometry_path, lineno);
        if (s1 != std::string_view::npos) {
          const auto rest = tok.substr(s1 + 1);
          const auto s2 = rest.find('/');
          const auto ttok = rest.substr(0, s2);
          if (!ttok.empty()) c.t = resolve_index(ttok, texcoords.size(), geometry_path, lineno);
        }
        poly.push_back(c);
      }
      for (std::size_t k = 1; k + 1 < poly.size(); ++k) triangles.push_back({poly[0], poly[k], poly[k + 1]});
    }
    // Normals, groups, materials and smoothing records carry nothing we need.
  }

  if (positions.empty() || triangles.empty()) fail(ErrorKind::EmptyMesh, geometry_path.string() + " has no faces");

  // First UV seen for a vertex keeps the original index; further distinct UVs
  // create appended duplicates.
  const auto n = static_cast<long>(positions.size());
  std::vector<long> first_uv(n, -1);
  std::vector<std::vector<std::pair<long, long>>> extra(n);  // (uv index, new vertex)
  std::vector<Eigen::Vector3d> out_pos = positions;
  std::vector<long> out_uv_index(n, -1);

  auto vertex_for = [&](const Corner& c) -> long {
    if (c.t < 0) return c.v;
    if (first_uv[c.v] < 0 || first_uv[c.v] == c.t) {
      first_uv[c.v] = c.t;
      out_uv_index[c.v] = c.t;
      return c.v;
    }
    if (texcoords[first_uv[c.v]] == texcoords[c.t]) return c.v;
    for (const auto& [t, nv] : extra[c.v]) {
      if (texcoords[t] == texcoords[c.t]) return nv;
    }
    const long nv = static_cast<long>(out_pos.size());
    out_pos.push_back(positions[c.v]);
    out_uv_index.push_back(c.t);
    extra[c.v].emplace_back(c.t, nv);
    return nv;
  };

  TexturedMesh mesh;
  mesh.id = geometry_path.stem().string();
  mesh.faces.resize(static_cast<Eigen::Index>(triangles.size()), 3);
  const bool per_vertex_file = texcoords.size() == positions.size();
  for (std::size_t f = 0; f < triangles.size(); ++f) {
    for (int k = 0; k < 3; ++k) mesh.faces(f, k) = static_cast<int>(vertex_for(triangles[f][k]));
  }
  // A file with exactly one vt per v and no per-corner UVs is per-vertex by position.
  if (per_vertex_file) {
    for (long i = 0; i < n; ++i) {
      if (out_uv_index[i] < 0) out_uv_index[i] = i;
    }
  }

  mesh.vertices.resize(static_cast<Eigen::Index>(out_pos.size()), 3);
  mesh.uv.resize(static_cast<Eigen::Index>(out_pos.size()), 2);
  for (std::size_t i = 0; i < out_pos.size(); ++i) {
    mesh.vertices.row(i) = out_pos[i].transpose();
    if (out_uv_index[i] < 0) fail(ErrorKind::UVMismatch, "vertex " + std::to_string(i + 1) + " has no UV coordinate");
    mesh.uv.row(i) = texcoords[out_uv_index[i]].transpose();
  }
  validate(mesh);
  return mesh;
}

TexturedMesh load_mesh(const std::filesystem::path& geometry_path, const std::filesystem::path& texture_path) {
  auto mesh = load_obj(geometry_path);
  const auto [w, h] = probe_image_size(texture_path);
  mesh.texture = {texture_path, w, h};
  return mesh;
}

void save_obj(const std::filesystem::path& path, const TexturedMesh& mesh, const std::string& mtl_name) {
  std::ofstream out(path);
  if (!out) fail(ErrorKind::Io, "cannot write " + path.string());
  char buf[128];
  if (!mtl_name.empty()) {
    out << "mtllib " << mtl_name << ".mtl\nusemtl " << mtl_name << "\n";
    std::ofstream mtl(path.parent_path() / (mtl_name + ".mtl"));
    if (!mtl) fail(ErrorKind::Io, "cannot write material for " + path.string());
    mtl << "newmtl " << mtl_name << "\nKa 1 1 1\nKd 1 1 1\nmap_Kd " << mesh.texture.path.filename().string() << "\n";
  }
  for (Eigen::Index i = 0; i < mesh.num_vertices(); ++i) {
    std::snprintf(buf, sizeof buf, "v %.17g %.17g %.17g\n", mesh.vertices(i, 0), mesh.vertices(i, 1), mesh.vertices(i, 2));
    out << buf;
  }
  for (Eigen::Index i = 0; i < mesh.uv.rows(); ++i) {
    std::snprintf(buf, sizeof buf, "vt %.17g %.17g\n", mesh.uv(i, 0), mesh.uv(i, 1));
    out << buf;
  }
  for (Eigen::Index f = 0; f < mesh.num_faces(); ++f) {
    const int a = mesh.faces(f, 0) + 1, b = mesh.faces(f, 1) + 1, c = mesh.faces(f, 2) + 1;
    out << "f " << a << '/' << a << ' ' << b << '/' << b << ' ' << c << '/' << c << '\n';
  }
  if (!out) fail(ErrorKind::Io, "write failed " + path.string());
}

std::vector<int> weld_coincident(const Vertices& vertices) {
  const auto n = static_cast<int>(vertices.rows());
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  auto less = [&](int a, int b) {
    for (int k = 0; k < 3; ++k) {
      if (vertices(a, k) != vertices(b, k)) return vertices(a, k) < vertices(b, k);
    }
    return a < b;
  };
  std::sort(order.begin(), order.end(), less);
  std::vector<int> rep(n);
  for (int i = 0; i < n;) {
    int j = i;
    while (j < n && vertices.row(order[j]) == vertices.row(order[i])) ++j;
    for (int k = i; k < j; ++k) rep[order[k]] = order[i];  // order[i] is the lowest index in its run
    i = j;
  }
  return rep;
}

}  // namespace lesiontrack

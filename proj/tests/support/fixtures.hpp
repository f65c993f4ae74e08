#pragma once

#include <atomic>
#include <filesystem>
#include <random>
#include <string>

#include "lesiontrack/mesh.hpp"

namespace fixtures {

/// (nx+1) x (ny+1) vertex grid on the z=0 plane with spacing h. Each cell is
/// split along its anti-diagonal, or its main diagonal when `anti` is false.
/// UVs are the normalised xy coordinates.
inline lesiontrack::TexturedMesh planar_grid(int nx, int ny, double h, bool anti = true) {
  lesiontrack::TexturedMesh m;
  const int cols = nx + 1;
  m.vertices.resize(cols * (ny + 1), 3);
  m.uv.resize(cols * (ny + 1), 2);
  for (int y = 0; y <= ny; ++y) {
    for (int x = 0; x <= nx; ++x) {
      m.vertices.row(y * cols + x) << x * h, y * h, 0.0;
      m.uv.row(y * cols + x) << static_cast<double>(x) / nx, static_cast<double>(y) / ny;
    }
  }
  m.faces.resize(2 * nx * ny, 3);
  int f = 0;
  for (int y = 0; y < ny; ++y) {
    for (int x = 0; x < nx; ++x) {
      const int a = y * cols + x, b = a + 1, c = a + cols + 1, d = a + cols;
      if (anti) {
        m.faces.row(f++) << a, b, d;
        m.faces.row(f++) << b, c, d;
      } else {
        m.faces.row(f++) << a, b, c;
        m.faces.row(f++) << a, c, d;
      }
    }
  }
  m.texture.width = 256;
  m.texture.height = 256;
  m.id = "grid";
  return m;
}

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag = "lt") {
    static std::atomic<int> counter{0};
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            (tag + "_" + std::to_string(rd()) + "_" + std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

}  // namespace fixtures

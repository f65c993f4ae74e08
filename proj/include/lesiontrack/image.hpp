#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <vector>

namespace lesiontrack {

using Rgb = std::array<std::uint8_t, 3>;

/// Interleaved 8-bit RGB raster, row-major with y pointing down.
struct Image {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;

  Image() = default;
  Image(int w, int h, Rgb fill = {0, 0, 0});

  bool empty() const { return width == 0 || height == 0; }

  Rgb at(int x, int y) const {
    const auto* p = &pixels[3 * (static_cast<std::size_t>(y) * width + x)];
    return {p[0], p[1], p[2]};
  }
  void set(int x, int y, Rgb c) {
    auto* p = &pixels[3 * (static_cast<std::size_t>(y) * width + x)];
    p[0] = c[0];
    p[1] = c[1];
    p[2] = c[2];
  }

  friend bool operator==(const Image&, const Image&) = default;
};

/// Decodes PNG or JPEG, chosen by file signature.
Image read_image(const std::filesystem::path& path);

/// Reads only the header to obtain (width, height).
std::array<int, 2> probe_image_size(const std::filesystem::path& path);

void write_png(const std::filesystem::path& path, const Image& image);

}  // namespace lesiontrack

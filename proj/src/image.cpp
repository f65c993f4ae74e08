#include "lesiontrack/image.hpp"

#include <cstdio>
#include <csetjmp>
#include <memory>

#include <jpeglib.h>
#include <png.h>

#include "lesiontrack/error.hpp"

namespace lesiontrack {
namespace {

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

FilePtr open_file(const std::filesystem::path& path, const char* mode) {
  FilePtr f(std::fopen(path.c_str(), mode));
  if (!f) fail(ErrorKind::Io, "cannot open " + path.string());
  return f;
}

enum class Format { Png, Jpeg, Unknown };

Format sniff(std::FILE* f) {
  unsigned char sig[8] = {};
  const auto n = std::fread(sig, 1, 8, f);
  std::rewind(f);
  if (n == 8 && png_sig_cmp(sig, 0, 8) == 0) return Format::Png;
  if (n >= 3 && sig[0] == 0xFF && sig[1] == 0xD8 && sig[2] == 0xFF) return Format::Jpeg;
  return Format::Unknown;
}

Image read_png(std::FILE* f, const std::filesystem::path& path, bool header_only) {
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!info) fail(ErrorKind::Io, "libpng init failed");
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    fail(ErrorKind::Io, "corrupt PNG " + path.string());
  }
  png_init_io(png, f);
  png_read_info(png, info);
  Image img;
  img.width = static_cast<int>(png_get_image_width(png, info));
  img.height = static_cast<int>(png_get_image_height(png, info));
  if (header_only) {
    png_destroy_read_struct(&png, &info, nullptr);
    return img;
  }
  // Normalise every colour type to 8-bit RGB.
  png_set_expand(png);
  png_set_strip_16(png);
  png_set_strip_alpha(png);
  png_set_gray_to_rgb(png);
  png_read_update_info(png, info);
  img.pixels.resize(3 * static_cast<std::size_t>(img.width) * img.height);
  std::vector<png_bytep> rows(img.height);
  for (int y = 0; y < img.height; ++y) rows[y] = &img.pixels[3 * static_cast<std::size_t>(y) * img.width];
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  return img;
}

struct JpegErrorMgr {
  jpeg_error_mgr base;
  std::jmp_buf jump;
};

void jpeg_error_exit(j_common_ptr cinfo) {
  auto* err = reinterpret_cast<JpegErrorMgr*>(cinfo->err);
  std::longjmp(err->jump, 1);
}

Image read_jpeg(std::FILE* f, const std::filesystem::path& path, bool header_only) {
  jpeg_decompress_struct cinfo{};
  JpegErrorMgr err{};
  cinfo.err = jpeg_std_error(&err.base);
  err.base.error_exit = jpeg_error_exit;
  if (setjmp(err.jump)) {
    jpeg_destroy_decompress(&cinfo);
    fail(ErrorKind::Io, "corrupt JPEG " + path.string());
  }
  jpeg_create_decompress(&cinfo);
  jpeg_stdio_src(&cinfo, f);
  jpeg_read_header(&cinfo, TRUE);
  Image img;
  img.width = static_cast<int>(cinfo.image_width);
  img.height = static_cast<int>(cinfo.image_height);
  if (header_only) {
    jpeg_destroy_decompress(&cinfo);
    return img;
  }
  cinfo.out_color_space = JCS_RGB;
  jpeg_start_decompress(&cinfo);
  img.pixels.resize(3 * static_cast<std::size_t>(img.width) * img.height);
  while (cinfo.output_scanline < cinfo.output_height) {
    JSAMPROW row = &img.pixels[3 * static_cast<std::size_t>(cinfo.output_scanline) * img.width];
    jpeg_read_scanlines(&cinfo, &row, 1);
  }
  jpeg_finish_decompress(&cinfo);
  jpeg_destroy_decompress(&cinfo);
  return img;
}

Image read_any(const std::filesystem::path& path, bool header_only) {
  auto f = open_file(path, "rb");
  switch (sniff(f.get())) {
    case Format::Png: return read_png(f.get(), path, header_only);
    case Format::Jpeg: return read_jpeg(f.get(), path, header_only);
    case Format::Unknown: break;
  }
  fail(ErrorKind::Io, "unsupported image format " + path.string());
}

}  // namespace

Image::Image(int w, int h, Rgb fill) : width(w), height(h), pixels(3 * static_cast<std::size_t>(w) * h) {
  for (std::size_t i = 0; i < pixels.size(); i += 3) {
    pixels[i] = fill[0];
    pixels[i + 1] = fill[1];
    pixels[i + 2] = fill[2];
  }
}

Image read_image(const std::filesystem::path& path) { return read_any(path, false); }

std::array<int, 2> probe_image_size(const std::filesystem::path& path) {
  const auto img = read_any(path, true);
  return {img.width, img.height};
}

void write_png(const std::filesystem::path& path, const Image& image) {
  auto f = open_file(path, "wb");
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!info) fail(ErrorKind::Io, "libpng init failed");
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    fail(ErrorKind::Io, "PNG write failed " + path.string());
  }
  png_init_io(png, f.get());
  png_set_IHDR(png, info, image.width, image.height, 8, PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  for (int y = 0; y < image.height; ++y) {
    png_write_row(png, const_cast<png_bytep>(&image.pixels[3 * static_cast<std::size_t>(y) * image.width]));
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

}  // namespace lesiontrack

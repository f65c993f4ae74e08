#include "lesiontrack/blob_detector.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Core>

namespace lesiontrack {
namespace {

using Plane = Eigen::Array<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

Plane darkness(const Image& image) {
  Plane d(image.height, image.width);
  for (int y = 0; y < image.height; ++y) {
    for (int x = 0; x < image.width; ++x) {
      const auto c = image.at(x, y);
      const float lum = 0.299f * c[0] + 0.587f * c[1] + 0.114f * c[2];
      d(y, x) = 1.0f - lum / 255.0f;
    }
  }
  return d;
}

std::vector<float> gaussian_kernel(double sigma) {
  const int radius = std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
  std::vector<float> k(2 * radius + 1);
  double sum = 0;
  for (int i = -radius; i <= radius; ++i) {
    const double v = std::exp(-0.5 * i * i / (sigma * sigma));
    k[i + radius] = static_cast<float>(v);
    sum += v;
  }
  for (auto& v : k) v = static_cast<float>(v / sum);
  return k;
}

// Separable blur with edge clamping, so a constant image stays constant.
Plane blur(const Plane& src, double sigma) {
  const auto k = gaussian_kernel(sigma);
  const int r = static_cast<int>(k.size() / 2);
  const int h = static_cast<int>(src.rows()), w = static_cast<int>(src.cols());
  Plane tmp(h, w), out(h, w);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      float acc = 0;
      for (int i = -r; i <= r; ++i) acc += k[i + r] * src(y, std::clamp(x + i, 0, w - 1));
      tmp(y, x) = acc;
    }
  }
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      float acc = 0;
      for (int i = -r; i <= r; ++i) acc += k[i + r] * tmp(std::clamp(y + i, 0, h - 1), x);
      out(y, x) = acc;
    }
  }
  return out;
}

bool is_scale_space_max(const std::vector<Plane>& stack, std::size_t s, int x, int y) {
  const float v = stack[s](y, x);
  const int h = static_cast<int>(stack[s].rows()), w = static_cast<int>(stack[s].cols());
  const std::size_t s0 = s == 0 ? 0 : s - 1;
  const std::size_t s1 = std::min(stack.size() - 1, s + 1);
  for (std::size_t t = s0; t <= s1; ++t) {
    for (int dy = -1; dy <= 1; ++dy) {
      for (int dx = -1; dx <= 1; ++dx) {
        if (t == s && dx == 0 && dy == 0) continue;
        const int yy = y + dy, xx = x + dx;
        if (yy < 0 || yy >= h || xx < 0 || xx >= w) continue;
        if (stack[t](yy, xx) > v) return false;
      }
    }
  }
  return true;
}

}  // namespace

AnnotationSet detect_blobs(const Image& image, const BlobConfig& config) {
  AnnotationSet out{"", image.width, image.height, {}};
  if (image.empty() || config.radii.empty()) return out;

  const Plane dark = darkness(image);
  std::vector<Plane> stack;
  stack.reserve(config.radii.size());
  for (const double r : config.radii) {
    const double sigma = r / std::sqrt(2.0);
    stack.push_back(blur(dark, sigma) - blur(dark, sigma * config.surround_ratio));
  }

  struct Peak {
    int x, y;
    double radius;
    float response;
  };
  std::vector<Peak> peaks;
  for (std::size_t s = 0; s < stack.size(); ++s) {
    for (int y = 0; y < image.height; ++y) {
      for (int x = 0; x < image.width; ++x) {
        const float v = stack[s](y, x);
        if (v < config.response_threshold) continue;
        if (is_scale_space_max(stack, s, x, y)) peaks.push_back({x, y, config.radii[s], v});
      }
    }
  }
  if (peaks.empty()) return out;

  const float strongest = std::max_element(peaks.begin(), peaks.end(), [](const Peak& a, const Peak& b) {
                            return a.response < b.response;
                          })->response;
  std::vector<BoundingBox2D> boxes;
  boxes.reserve(peaks.size());
  for (const auto& p : peaks) {
    const double cx = p.x + 0.5, cy = p.y + 0.5;
    BoundingBox2D b;
    b.x1 = std::max(0.0, cx - p.radius);
    b.y1 = std::max(0.0, cy - p.radius);
    b.x2 = std::min<double>(image.width, cx + p.radius);
    b.y2 = std::min<double>(image.height, cy + p.radius);
    b.confidence = std::clamp(static_cast<double>(p.response / strongest), 0.0, 1.0);
    boxes.push_back(b);
  }
  out.boxes = nms(boxes, config.nms_iou);
  return out;
}

}  // namespace lesiontrack

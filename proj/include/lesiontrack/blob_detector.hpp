#pragma once

#include <vector>

#include "lesiontrack/boxes.hpp"
#include "lesiontrack/image.hpp"

namespace lesiontrack {

struct BlobConfig {
  /// Blob radii in pixels; each maps to a Gaussian scale of radius / sqrt(2).
  std::vector<double> radii = {2, 4, 8, 16};
  /// Minimum centre-surround response, in darkness units (0..1 of full range).
  double response_threshold = 0.05;
  double surround_ratio = 1.6;
  double nms_iou = 0.01;
};

/// Classical stand-in for a trained lesion detector: dark-on-skin blobs found
/// as scale-space maxima of a difference-of-Gaussians on inverted luminance.
/// Confidences are normalised by the strongest response in the image.
AnnotationSet detect_blobs(const Image& image, const BlobConfig& config = {});

}  // namespace lesiontrack

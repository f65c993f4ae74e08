#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "lesiontrack/boxes.hpp"
#include "lesiontrack/correspondence.hpp"
#include "lesiontrack/image.hpp"
#include "lesiontrack/mesh.hpp"

namespace lesiontrack {

/// Two scans of a capsule-shaped body with planted dark lesions. The second
/// scan is bent, rigidly moved and has its vertex order shuffled.
struct SyntheticConfig {
  int num_lesions = 20;  ///< lesions on the first scan
  int disappearing = 2;
  int appearing = 2;
  /// Bend curvature (1/m) applied to the second scan; 0 keeps the shape.
  double bend = 0.6;
  /// Rigid motion of the second scan.
  double shift = 0.3;
  double rotation_deg = 25.0;
  /// Persistent lesions move to a random grid neighbour with this probability.
  double jitter_probability = 0.3;
  double radius = 0.15;
  double length = 1.2;
  int rings = 96;
  int segments = 64;
  int texture_size = 1024;
  int lesion_radius_px = 5;
  double min_separation = 0.08;
  /// Template points shared by both reconstructions and their noise (m).
  int template_points = 1500;
  double template_noise = 0.004;
  std::uint64_t seed = 0;
};

struct SyntheticScan {
  TexturedMesh mesh;
  Image texture;
  AnnotationSet boxes;  ///< every box carries a track id
  std::vector<int> lesion_vertices;  ///< parallel to boxes
  ReconstructedVertices reconstruction;
};

struct SyntheticPair {
  SyntheticScan first, second;
  /// Exact vertex map first -> second.
  CorrespondenceMap truth;
  /// (box index on first, box index on second) for persistent lesions.
  std::vector<std::pair<int, int>> lesion_pairs;
  SyntheticConfig config;
};

SyntheticPair generate_synthetic_pair(const SyntheticConfig& config);

/// Writes `<stem>_{a,b}.obj/.mtl/.png`, annotation JSON, reconstructions,
/// the ground-truth correspondence and a manifest into `dir`.
void write_synthetic_pair(const std::filesystem::path& dir, const SyntheticPair& pair, const std::string& stem = "synth");

nlohmann::json manifest(const SyntheticPair& pair, const std::string& stem = "synth");

}  // namespace lesiontrack

#include "lesiontrack/correspondence.hpp"

#include <cmath>
#include <limits>
#include <fstream>
#include <numeric>
#include <sstream>
#include <vector>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "lesiontrack/error.hpp"
#include "lesiontrack/spatial_index.hpp"

namespace lesiontrack {

ReconstructedVertices load_reconstructed(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::Io, "cannot open " + path.string());
  std::vector<Eigen::Vector3d> pts;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream ss(line);
    Eigen::Vector3d p;
    if (!(ss >> p.x() >> p.y() >> p.z()) || !p.allFinite()) {
      fail(ErrorKind::Parse, path.string() + ":" + std::to_string(lineno) + ": expected three finite numbers");
    }
    pts.push_back(p);
  }
  ReconstructedVertices r{path.stem().string(), Vertices(static_cast<Eigen::Index>(pts.size()), 3)};
  for (std::size_t i = 0; i < pts.size(); ++i) r.points.row(i) = pts[i].transpose();
  return r;
}

void save_reconstructed(const std::filesystem::path& path, const ReconstructedVertices& recon) {
  std::ofstream out(path);
  if (!out) fail(ErrorKind::Io, "cannot write " + path.string());
  char buf[96];
  for (Eigen::Index i = 0; i < recon.points.rows(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g %.17g %.17g\n", recon.points(i, 0), recon.points(i, 1), recon.points(i, 2));
    out << buf;
  }
}

CorrespondenceMap chain_correspondence(const TexturedMesh& source, const ReconstructedVertices& source_recon,
                                       const TexturedMesh& target, const ReconstructedVertices& target_recon) {
  if (source_recon.points.rows() != target_recon.points.rows()) {
    fail(ErrorKind::TemplateSizeMismatch, "reconstructions have " + std::to_string(source_recon.points.rows()) +
                                              " and " + std::to_string(target_recon.points.rows()) + " points");
  }
  if (source_recon.points.rows() == 0) fail(ErrorKind::EmptyIndex, "empty reconstruction");
  if (target.num_vertices() == 0) fail(ErrorKind::EmptyMesh, "target mesh has no vertices");

  const SpatialIndex recon_index(source_recon.points);
  const SpatialIndex target_index(target.vertices);
  // Template point -> target vertex, filled lazily since most template points
  // are shared by many source vertices.
  std::vector<int> template_to_target(source_recon.points.rows(), -1);

  CorrespondenceMap corr{source.id, target.id, std::vector<int>(source.num_vertices())};
  for (Eigen::Index i = 0; i < source.num_vertices(); ++i) {
    const auto j = recon_index.nearest(source.vertices.row(i).transpose()).index;
    int& k = template_to_target[j];
    if (k < 0) k = static_cast<int>(target_index.nearest(target_recon.points.row(j).transpose()).index);
    corr.map[i] = k;
  }
  return corr;
}

CorrespondenceMap identity_correspondence(const TexturedMesh& mesh) {
  CorrespondenceMap corr{mesh.id, mesh.id, std::vector<int>(mesh.num_vertices())};
  std::iota(corr.map.begin(), corr.map.end(), 0);
  return corr;
}

CorrespondenceMap compose(const CorrespondenceMap& first, const CorrespondenceMap& second) {
  CorrespondenceMap out{first.source_id, second.target_id, std::vector<int>(first.size())};
  for (std::size_t i = 0; i < first.size(); ++i) {
    const int mid = first[i];
    if (mid < 0 || static_cast<std::size_t>(mid) >= second.size()) {
      fail(ErrorKind::MeshMismatch, "cannot compose: index " + std::to_string(mid) + " outside second map");
    }
    out.map[i] = second[mid];
  }
  return out;
}

namespace {

// Least-squares rotation+translation taking `src` onto `dst` (Kabsch).
Eigen::Isometry3d kabsch(const Vertices& src, const Vertices& dst) {
  const Eigen::RowVector3d cs = src.colwise().mean();
  const Eigen::RowVector3d cd = dst.colwise().mean();
  const Eigen::Matrix3d h = (src.rowwise() - cs).transpose() * (dst.rowwise() - cd);
  Eigen::JacobiSVD<Eigen::Matrix3d> svd(h, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Eigen::Matrix3d d = Eigen::Matrix3d::Identity();
  if ((svd.matrixV() * svd.matrixU().transpose()).determinant() < 0) d(2, 2) = -1;
  const Eigen::Matrix3d r = svd.matrixV() * d * svd.matrixU().transpose();
  Eigen::Isometry3d t = Eigen::Isometry3d::Identity();
  t.linear() = r;
  t.translation() = cd.transpose() - r * cs.transpose();
  return t;
}

// Centroid-aligned starts: no rotation, and every proper rotation taking the
// source principal axes onto the target ones.
std::vector<Eigen::Isometry3d> initial_alignments(const Vertices& source, const Vertices& target) {
  const Eigen::Vector3d cs = source.colwise().mean().transpose();
  const Eigen::Vector3d ct = target.colwise().mean().transpose();
  const auto axes = [](const Vertices& v, const Eigen::Vector3d& c) {
    const Eigen::MatrixXd centred = v.rowwise() - c.transpose();
    const Eigen::Matrix3d cov = centred.transpose() * centred;
    return Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d>(cov).eigenvectors();
  };
  const Eigen::Matrix3d as = axes(source, cs), at = axes(target, ct);
  std::vector<Eigen::Isometry3d> out;
  const auto push = [&](const Eigen::Matrix3d& r) {
    Eigen::Isometry3d t = Eigen::Isometry3d::Identity();
    t.linear() = r;
    t.translation() = ct - r * cs;
    out.push_back(t);
  };
  push(Eigen::Matrix3d::Identity());
  for (const double sx : {1.0, -1.0}) {
    for (const double sy : {1.0, -1.0}) {
      const Eigen::Matrix3d r = at * Eigen::Vector3d(sx, sy, 1.0).asDiagonal() * as.transpose();
      push(r.determinant() > 0 ? r : Eigen::Matrix3d(at * Eigen::Vector3d(sx, sy, -1.0).asDiagonal() * as.transpose()));
    }
  }
  return out;
}

}  // namespace

RigidAlignment rigid_align_correspondence(const TexturedMesh& source, const TexturedMesh& target,
                                          const RigidAlignConfig& config) {
  if (source.num_vertices() == 0 || target.num_vertices() == 0) fail(ErrorKind::EmptyMesh, "ICP on empty mesh");
  const SpatialIndex target_index(target.vertices);

  const Eigen::Index stride = std::max<Eigen::Index>(1, source.num_vertices() / std::max<Eigen::Index>(1, config.max_fit_points));
  const Eigen::Index m = (source.num_vertices() + stride - 1) / stride;
  Vertices sample(m, 3);
  for (Eigen::Index i = 0; i < m; ++i) sample.row(i) = source.vertices.row(i * stride);

  RigidAlignment out;
  out.residual = std::numeric_limits<double>::infinity();
  for (const Eigen::Isometry3d& start : initial_alignments(source.vertices, target.vertices)) {
    Eigen::Isometry3d transform = start;
    double residual = 0;
    int iterations = 0;
    double previous = std::numeric_limits<double>::infinity();
    Vertices matched(m, 3), moved(m, 3);
    for (int it = 0; it < config.max_iters; ++it) {
      double sq = 0;
      for (Eigen::Index i = 0; i < m; ++i) {
        const Eigen::Vector3d p = transform * Eigen::Vector3d(sample.row(i).transpose());
        moved.row(i) = p.transpose();
        const auto hit = target_index.nearest(p);
        matched.row(i) = target.vertices.row(hit.index);
        sq += hit.distance * hit.distance;
      }
      residual = std::sqrt(sq / static_cast<double>(m));
      iterations = it + 1;
      if (previous - residual <= 1e-12 * (1.0 + residual)) break;
      previous = residual;
      transform = kabsch(moved, matched) * transform;
    }
    if (std::isinf(out.residual) || residual < out.residual - 1e-9 * (1.0 + out.residual)) {
      out.residual = residual;
      out.transform = transform;
      out.iterations = iterations;
    }
  }

  out.correspondence = {source.id, target.id, std::vector<int>(source.num_vertices())};
  double sq = 0;
  for (Eigen::Index i = 0; i < source.num_vertices(); ++i) {
    const auto hit = target_index.nearest(out.transform * Eigen::Vector3d(source.vertices.row(i).transpose()));
    out.correspondence.map[i] = static_cast<int>(hit.index);
    sq += hit.distance * hit.distance;
  }
  out.residual = std::sqrt(sq / static_cast<double>(source.num_vertices()));
  out.converged = out.residual <= config.tol;
  return out;
}

LesionSet3D map_lesions(const CorrespondenceMap& corr, const LesionSet3D& lesions, const TexturedMesh& target) {
  if (!corr.source_id.empty() && !lesions.mesh_id.empty() && corr.source_id != lesions.mesh_id) {
    fail(ErrorKind::MeshMismatch, "lesions on '" + lesions.mesh_id + "' but correspondence starts at '" +
                                      corr.source_id + "'");
  }
  LesionSet3D out{target.id, {}};
  out.lesions.reserve(lesions.size());
  for (const auto& l : lesions.lesions) {
    if (l.vertex < 0 || static_cast<std::size_t>(l.vertex) >= corr.size()) {
      fail(ErrorKind::MeshMismatch, "lesion vertex " + std::to_string(l.vertex) + " outside correspondence");
    }
    const int t = corr[l.vertex];
    if (t < 0 || t >= target.num_vertices()) {
      fail(ErrorKind::MeshMismatch, "correspondence target " + std::to_string(t) + " outside target mesh");
    }
    out.lesions.push_back({t, target.vertices.row(t).transpose(), l.box_ref, l.box});
  }
  return out;
}

nlohmann::json to_json(const CorrespondenceMap& corr) { return corr.map; }

CorrespondenceMap correspondence_from_json(const nlohmann::json& j) {
  CorrespondenceMap c;
  try {
    if (j.is_array()) {
      c.map = j.get<std::vector<int>>();
    } else {
      c.source_id = j.value("source", "");
      c.target_id = j.value("target", "");
      c.map = j.at("map").get<std::vector<int>>();
    }
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::Schema, std::string("correspondence: ") + e.what());
  }
  return c;
}

CorrespondenceMap read_correspondence_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::Io, "cannot open " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::Parse, path.string() + ": " + e.what());
  }
  return correspondence_from_json(j);
}

void write_correspondence_json(const std::filesystem::path& path, const CorrespondenceMap& corr) {
  std::ofstream out(path);
  if (!out) fail(ErrorKind::Io, "cannot write " + path.string());
  out << to_json(corr).dump() << '\n';
}

}  // namespace lesiontrack

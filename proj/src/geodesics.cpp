#include "lesiontrack/geodesics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <queue>
#include <set>
#include <thread>

#include "lesiontrack/error.hpp"

namespace lesiontrack {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

using HeapEntry = std::pair<double, int>;
using MinHeap = std::priority_queue<HeapEntry, std::vector<HeapEntry>, std::greater<>>;

}  // namespace

GeodesicMethod parse_geodesic_method(const std::string& name) {
  if (name == "dijkstra") return GeodesicMethod::Dijkstra;
  if (name == "fast_marching" || name == "fmm") return GeodesicMethod::FastMarching;
  fail(ErrorKind::InvalidConfig, "unknown geodesic method '" + name + "'");
}

const char* to_string(GeodesicMethod method) {
  return method == GeodesicMethod::Dijkstra ? "dijkstra" : "fast_marching";
}

GeodesicSolver::GeodesicSolver(const Vertices& vertices, const Faces& faces)
    : vertices_(vertices), rep_(weld_coincident(vertices)) {
  const int n = static_cast<int>(vertices.rows());
  std::vector<std::vector<int>> nbrs(n);
  std::vector<std::vector<int>> vf(n);
  for (Eigen::Index f = 0; f < faces.rows(); ++f) {
    std::array<int, 3> t{rep_[faces(f, 0)], rep_[faces(f, 1)], rep_[faces(f, 2)]};
    if (t[0] == t[1] || t[1] == t[2] || t[0] == t[2]) continue;
    const int fid = static_cast<int>(faces_.size());
    faces_.push_back(t);
    for (int k = 0; k < 3; ++k) {
      vf[t[k]].push_back(fid);
      nbrs[t[k]].push_back(t[(k + 1) % 3]);
      nbrs[t[k]].push_back(t[(k + 2) % 3]);
    }
  }
  adj_offset_.assign(n + 1, 0);
  vf_offset_.assign(n + 1, 0);
  for (int v = 0; v < n; ++v) {
    auto& nb = nbrs[v];
    std::sort(nb.begin(), nb.end());
    nb.erase(std::unique(nb.begin(), nb.end()), nb.end());
    adj_offset_[v + 1] = adj_offset_[v] + static_cast<int>(nb.size());
    vf_offset_[v + 1] = vf_offset_[v] + static_cast<int>(vf[v].size());
  }
  adj_.reserve(adj_offset_[n]);
  adj_len_.reserve(adj_offset_[n]);
  vf_.reserve(vf_offset_[n]);
  for (int v = 0; v < n; ++v) {
    for (const int u : nbrs[v]) {
      adj_.push_back(u);
      adj_len_.push_back((vertices_.row(v) - vertices_.row(u)).norm());
    }
    vf_.insert(vf_.end(), vf[v].begin(), vf[v].end());
  }

  // Components over representatives, then propagated to duplicates.
  component_.assign(n, -1);
  int label = 0;
  std::vector<int> stack;
  for (int s = 0; s < n; ++s) {
    if (rep_[s] != s || component_[s] >= 0) continue;
    component_[s] = label;
    stack.push_back(s);
    while (!stack.empty()) {
      const int v = stack.back();
      stack.pop_back();
      for (int e = adj_offset_[v]; e < adj_offset_[v + 1]; ++e) {
        if (component_[adj_[e]] < 0) {
          component_[adj_[e]] = label;
          stack.push_back(adj_[e]);
        }
      }
    }
    ++label;
  }
  for (int v = 0; v < n; ++v) component_[v] = component_[rep_[v]];
}

Eigen::VectorXd GeodesicSolver::dijkstra(int src) const {
  Eigen::VectorXd dist = Eigen::VectorXd::Constant(vertices_.rows(), kInf);
  MinHeap heap;
  dist[src] = 0.0;
  heap.emplace(0.0, src);
  while (!heap.empty()) {
    const auto [d, v] = heap.top();
    heap.pop();
    if (d > dist[v]) continue;
    for (int e = adj_offset_[v]; e < adj_offset_[v + 1]; ++e) {
      const double nd = d + adj_len_[e];
      if (nd < dist[adj_[e]]) {
        dist[adj_[e]] = nd;
        heap.emplace(nd, adj_[e]);
      }
    }
  }
  return dist;
}

// First-order update of `target` from the planar unfolding of triangle
// (a, b, target): a virtual point source is placed on the far side of edge ab
// at distances (da, db); the update is valid only when the straight ray from
// that source to `target` crosses the edge ab.
double GeodesicSolver::triangle_update(int target, int a, double da, int b, double db) const {
  const Eigen::Vector3d pa = vertices_.row(a).transpose();
  const Eigen::Vector3d pb = vertices_.row(b).transpose();
  const Eigen::Vector3d pc = vertices_.row(target).transpose();
  const Eigen::Vector3d e = pb - pa;
  const double c = e.norm();
  if (c <= 0) return kInf;
  const Eigen::Vector3d ex = e / c;
  const Eigen::Vector3d ac = pc - pa;
  const double cx = ac.dot(ex);
  const double cy = (ac - cx * ex).norm();
  if (cy <= 0) return kInf;

  const double sx = (da * da - db * db + c * c) / (2.0 * c);
  const double sy2 = da * da - sx * sx;
  if (sy2 < 0) return kInf;
  const double sy = -std::sqrt(sy2);

  const double t = -sy / (cy - sy);
  const double x_cross = sx + t * (cx - sx);
  if (x_cross < 0 || x_cross > c) return kInf;
  const double d = std::hypot(cx - sx, cy - sy);
  // Causality: the arrival time may not precede either supporting vertex.
  if (d < std::max(da, db)) return kInf;
  return d;
}

Eigen::VectorXd GeodesicSolver::fast_marching(int src) const {
  const auto n = vertices_.rows();
  Eigen::VectorXd dist = Eigen::VectorXd::Constant(n, kInf);
  std::vector<char> alive(n, 0);
  MinHeap heap;
  dist[src] = 0.0;
  heap.emplace(0.0, src);
  while (!heap.empty()) {
    const auto [d, v] = heap.top();
    heap.pop();
    if (alive[v] || d > dist[v]) continue;
    alive[v] = 1;
    for (int e = adj_offset_[v]; e < adj_offset_[v + 1]; ++e) {
      const int u = adj_[e];
      if (alive[u]) continue;
      double best = d + adj_len_[e];
      // Triangles containing both u and v whose third corner is already fixed.
      for (int k = vf_offset_[u]; k < vf_offset_[u + 1]; ++k) {
        const auto& t = faces_[vf_[k]];
        if (t[0] != v && t[1] != v && t[2] != v) continue;
        const int w = t[0] != u && t[0] != v ? t[0] : (t[1] != u && t[1] != v ? t[1] : t[2]);
        if (!alive[w]) continue;
        best = std::min(best, triangle_update(u, v, d, w, dist[w]));
      }
      if (best < dist[u]) {
        dist[u] = best;
        heap.emplace(best, u);
      }
    }
  }
  return dist;
}

DistanceField GeodesicSolver::single_source(int source, GeodesicMethod method) const {
  if (source < 0 || source >= vertices_.rows()) {
    fail(ErrorKind::InvalidVertex, "source vertex " + std::to_string(source) + " out of range");
  }
  const int rs = rep_[source];
  const Eigen::VectorXd rep_dist = method == GeodesicMethod::Dijkstra ? dijkstra(rs) : fast_marching(rs);
  DistanceField field{source, Eigen::VectorXd(vertices_.rows()), method};
  for (Eigen::Index v = 0; v < vertices_.rows(); ++v) field.distance[v] = rep_dist[rep_[v]];
  return field;
}

std::vector<DistanceField> GeodesicSolver::fields(const std::vector<int>& sources, GeodesicMethod method) const {
  std::vector<DistanceField> out(sources.size());
  const std::size_t workers =
      std::min<std::size_t>(sources.size(), std::max(1u, std::thread::hardware_concurrency()));
  if (workers <= 1) {
    for (std::size_t i = 0; i < sources.size(); ++i) out[i] = single_source(sources[i], method);
    return out;
  }
  for (const int s : sources) {
    if (s < 0 || s >= vertices_.rows()) fail(ErrorKind::InvalidVertex, "source vertex " + std::to_string(s));
  }
  std::vector<std::jthread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (std::size_t i = w; i < sources.size(); i += workers) out[i] = single_source(sources[i], method);
    });
  }
  return out;
}

DistanceField single_source(const TexturedMesh& mesh, int source, GeodesicMethod method) {
  return GeodesicSolver(mesh).single_source(source, method);
}

Eigen::MatrixXd pairwise_matrix(const GeodesicSolver& solver, const std::vector<int>& vertices,
                                const PairwiseOptions& options) {
  const auto m = static_cast<Eigen::Index>(vertices.size());
  if (!options.permissive) {
    std::set<int> comps;
    for (const int v : vertices) {
      if (v < 0 || v >= solver.num_vertices()) fail(ErrorKind::InvalidVertex, "lesion vertex " + std::to_string(v));
      comps.insert(solver.components()[v]);
    }
    if (comps.size() > 1) {
      std::string detail;
      for (std::size_t i = 0; i < vertices.size(); ++i) {
        detail += (i ? ", " : "") + std::to_string(vertices[i]) + "->c" +
                  std::to_string(solver.components()[vertices[i]]);
      }
      fail(ErrorKind::DisconnectedLesions, "lesions span " + std::to_string(comps.size()) +
                                               " mesh components (vertex->component: " + detail + ")");
    }
  }
  const auto fields = solver.fields(vertices, options.method);
  Eigen::MatrixXd d(m, m);
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = 0; j < m; ++j) d(i, j) = fields[i].distance[vertices[j]];
  }
  Eigen::MatrixXd sym = 0.5 * (d + d.transpose());
  sym.diagonal().setZero();
  return sym;
}

Eigen::MatrixXd pairwise_matrix(const TexturedMesh& mesh, const std::vector<int>& vertices,
                                const PairwiseOptions& options) {
  return pairwise_matrix(GeodesicSolver(mesh), vertices, options);
}

void write_matrix_csv(const std::filesystem::path& path, const Eigen::MatrixXd& matrix) {
  std::ofstream out(path);
  if (!out) fail(ErrorKind::Io, "cannot write " + path.string());
  out.precision(17);
  for (Eigen::Index i = 0; i < matrix.rows(); ++i) {
    for (Eigen::Index j = 0; j < matrix.cols(); ++j) out << (j ? "," : "") << matrix(i, j);
    out << '\n';
  }
}

}  // namespace lesiontrack

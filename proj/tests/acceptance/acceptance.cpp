// Runs every acceptance criterion and prints one PASS/FAIL/SKIP line each.
// Exit status is non-zero when any criterion fails.
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "lesiontrack/assignment.hpp"
#include "lesiontrack/boxes.hpp"
#include "lesiontrack/correspondence.hpp"
#include "lesiontrack/geodesics.hpp"
#include "lesiontrack/metrics.hpp"
#include "lesiontrack/partition.hpp"
#include "lesiontrack/synthetic.hpp"
#include "lesiontrack/tracking.hpp"
#include "lesiontrack/uv_mapping.hpp"
#include "oracles/oracles.hpp"
#include "support/fixtures.hpp"

using namespace lesiontrack;
namespace fs = std::filesystem;

namespace {

enum class Status { Pass, Fail, Skip };

struct Outcome {
  Status status = Status::Pass;
  std::string detail;
};

Outcome pass(std::string d) { return {Status::Pass, std::move(d)}; }
Outcome fail_with(std::string d) { return {Status::Fail, std::move(d)}; }

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// ---------------------------------------------------------------- 1

SchemaMapping schema_from(const fs::path& dir) {
  SchemaMapping m = SchemaMapping::xywh("image", "x", "y", "w", "h");
  const fs::path file = dir / "schema.json";
  if (!fs::exists(file)) return m;
  std::ifstream in(file);
  const auto j = nlohmann::json::parse(in);
  const auto get = [&](const char* key, std::string& field) {
    if (j.contains(key)) field = j[key].get<std::string>();
  };
  get("image", m.image);
  get("x", m.x);
  get("y", m.y);
  get("w", m.w);
  get("h", m.h);
  get("x1", m.x1);
  get("y1", m.y1);
  get("x2", m.x2);
  get("y2", m.y2);
  if (!m.x1.empty()) m.x = m.y = m.w = m.h = "";
  if (j.contains("delimiter")) m.delimiter = j["delimiter"].get<std::string>().at(0);
  m.has_header = j.value("has_header", true);
  return m;
}

// Expects LESIONTRACK_DATA_DIR with annotations/ (CSV or JSON files, optional
// schema.json column mapping) and subjects.csv.
Outcome criterion_annotation_statistics() {
  const char* env = std::getenv("LESIONTRACK_DATA_DIR");
  if (env == nullptr || !fs::is_directory(fs::path(env) / "annotations") ||
      !fs::exists(fs::path(env) / "subjects.csv")) {
    return {Status::Skip, "LESIONTRACK_DATA_DIR with annotations/ and subjects.csv not present"};
  }
  const fs::path dir(env);
  const auto mapping = schema_from(dir);
  std::size_t boxes = 0;
  double width = 0, height = 0;
  std::vector<fs::path> files;
  for (const auto& e : fs::recursive_directory_iterator(dir / "annotations")) {
    const auto ext = e.path().extension();
    if (e.is_regular_file() && (ext == ".csv" || ext == ".json") && e.path().filename() != "schema.json") {
      files.push_back(e.path());
    }
  }
  std::sort(files.begin(), files.end());
  for (const auto& f : files) {
    std::vector<AnnotationSet> sets;
    if (f.extension() == ".json") {
      sets.push_back(read_annotations_json(f));
    } else {
      sets = load_annotation_collection(f, mapping);
    }
    for (const auto& s : sets) {
      for (const auto& b : s.boxes) {
        ++boxes;
        width += b.width();
        height += b.height();
      }
    }
  }
  const double mw = boxes ? width / boxes : 0, mh = boxes ? height / boxes : 0;
  const auto part = partition_subjects(load_subject_metadata(dir / "subjects.csv"), PartitionConfig{});
  const bool ok = boxes == 26507 && std::abs(mw - 22.07) <= 0.01 && std::abs(mh - 22.95) <= 0.01 &&
                  part.train.meshes.size() == 128 && part.validation.meshes.size() == 40 &&
                  part.test.meshes.size() == 40 && part.longitudinal.meshes.size() == 10;
  const auto d = fmt("%zu boxes, mean %.3f x %.3f px, meshes %zu/%zu/%zu/%zu", boxes, mw, mh,
                     part.train.meshes.size(), part.validation.meshes.size(), part.test.meshes.size(),
                     part.longitudinal.meshes.size());
  return ok ? pass(d) : fail_with(d);
}

// ---------------------------------------------------------------- 2

double row_sum(const Eigen::MatrixXd& c, const std::vector<int>& cols) {
  double s = 0;
  for (std::size_t i = 0; i < cols.size(); ++i) s += c(static_cast<Eigen::Index>(i), cols[i]);
  return s;
}

double min_over_permutations(const Eigen::MatrixXd& c) {
  std::vector<int> p(c.rows());
  std::iota(p.begin(), p.end(), 0);
  double best = std::numeric_limits<double>::infinity();
  do {
    best = std::min(best, row_sum(c, p));
  } while (std::next_permutation(p.begin(), p.end()));
  return best;
}

// Cost of a dummy-extended assignment, summed in source order then appearing targets.
double extended_cost(const Eigen::MatrixXd& u, const std::vector<int>& target, const std::vector<int>& appearing) {
  const auto n = u.rows() - 1, m = u.cols() - 1;
  double s = 0;
  for (Eigen::Index i = 0; i < n; ++i) s += u(i, target[i] < 0 ? m : target[i]);
  for (const int j : appearing) s += u(n, j);
  return s;
}

Outcome criterion_hungarian_optimality() {
  std::mt19937_64 rng(20240601);
  std::uniform_int_distribution<int> size(1, 7), small(0, 9);
  std::uniform_real_distribution<double> real(0.0, 10.0);
  int plain_ok = 0, dummy_ok = 0;
  for (int trial = 0; trial < 500; ++trial) {
    const bool integral = trial % 2 == 0;
    const auto draw = [&] { return integral ? static_cast<double>(small(rng)) : real(rng); };
    // Square, no dummies.
    const int k = size(rng);
    Eigen::MatrixXd c(k, k);
    for (Eigen::Index e = 0; e < c.size(); ++e) c.data()[e] = draw();
    plain_ok += row_sum(c, solve_hungarian(c)) == min_over_permutations(c);
    // Rectangular with dummy row/column.
    const int n = size(rng) - 1, m = size(rng) - 1;
    Eigen::MatrixXd u(n + 1, m + 1);
    for (Eigen::Index e = 0; e < u.size(); ++e) u.data()[e] = draw();
    u(n, m) = 0;
    const auto a = solve_with_dummies(u);
    double best = std::numeric_limits<double>::infinity();
    std::vector<oracle::Map> maps;
    oracle::all_maps(n, m, maps);
    for (const auto& mp : maps) {
      std::vector<bool> hit(m, false);
      for (const int t : mp) {
        if (t >= 0) hit[t] = true;
      }
      std::vector<int> app;
      for (int j = 0; j < m; ++j) {
        if (!hit[j]) app.push_back(j);
      }
      best = std::min(best, extended_cost(u, mp, app));
    }
    dummy_ok += extended_cost(u, a.target, a.appearing()) == best;
  }
  const auto d = fmt("exact on %d/500 square and %d/500 dummy-extended matrices", plain_ok, dummy_ok);
  return plain_ok == 500 && dummy_ok == 500 ? pass(d) : fail_with(d);
}

// ---------------------------------------------------------------- 3

struct QapInstance {
  Eigen::MatrixXd u, ds, dt;
};

// Lesion clouds in a unit square; a random subset persists with small jitter,
// the rest appear or disappear, and target order is shuffled.
QapInstance random_qap_instance(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> size(1, 7);
  const int n = size(rng), m = size(rng);
  const int shared = std::uniform_int_distribution<int>(0, std::min(n, m))(rng);
  Eigen::MatrixX2d ps, pt;
  const Eigen::MatrixXd ds = oracle::random_points_distances(n, rng, 1.0, &ps);
  oracle::random_points_distances(m, rng, 1.0, &pt);
  std::normal_distribution<double> jitter(0.0, 0.03);
  for (int k = 0; k < shared; ++k) pt.row(k) = ps.row(k) + Eigen::RowVector2d(jitter(rng), jitter(rng));
  std::vector<int> perm(m);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);
  Eigen::MatrixX2d q(m, 2);
  for (int k = 0; k < m; ++k) q.row(perm[k]) = pt.row(k);
  Eigen::MatrixXd dt(m, m), u(n, m);
  for (int a = 0; a < m; ++a) {
    for (int b = 0; b < m; ++b) dt(a, b) = (q.row(a) - q.row(b)).norm();
  }
  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < m; ++b) u(a, b) = (ps.row(a) - q.row(b)).norm();
  }
  QapInstance in;
  in.u = Eigen::MatrixXd::Constant(n + 1, m + 1, 0.5);
  in.u.topLeftCorner(n, m) = u;
  in.u(n, m) = 0;
  in.ds = extend_with_dummy(ds, 0.5);
  in.dt = extend_with_dummy(dt, 0.5);
  return in;
}

Outcome criterion_qap_quality() {
  std::mt19937_64 rng(777);
  int within = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const auto in = random_qap_instance(rng);
    const auto best = oracle::brute_force_qap(in.u, in.ds, in.dt, 0.5);
    const auto a = solve_spectral(in.u, in.ds, in.dt, 0.5);
    const double l = oracle::straight_loss(a.target, in.u, in.ds, in.dt, 0.5);
    within += l <= 1.1 * best.loss + 1e-12;
  }
  // Unique zero-loss identity instances: identical clouds on both sides.
  int zero_cases = 0, zero_exact = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const int k = 1 + trial % 7;
    Eigen::MatrixX2d p;
    const Eigen::MatrixXd d = oracle::random_points_distances(k, rng, 1.0, &p);
    Eigen::MatrixXd u = Eigen::MatrixXd::Constant(k + 1, k + 1, 0.5);
    u.topLeftCorner(k, k) = d;
    u(k, k) = 0;
    const auto dd = extend_with_dummy(d, 0.5);
    const auto best = oracle::brute_force_qap(u, dd, dd, 0.5);
    std::vector<int> id(k);
    std::iota(id.begin(), id.end(), 0);
    if (best.loss != 0.0 || best.num_optimal != 1 || best.map != id) continue;
    ++zero_cases;
    zero_exact += solve_spectral(u, dd, dd, 0.5).target == id;
  }
  const auto d = fmt("%d/200 within 10%% of optimum; zero-loss identity exact on %d/%d", within, zero_exact,
                     zero_cases);
  return within >= 180 && zero_exact == zero_cases && zero_cases > 0 ? pass(d) : fail_with(d);
}

// ---------------------------------------------------------------- 4, 5, 7

SyntheticConfig synthetic_config(std::uint64_t seed) {
  SyntheticConfig cfg;
  cfg.seed = seed;
  return cfg;
}

std::vector<int> iota_vec(std::size_t n) {
  std::vector<int> v(n);
  std::iota(v.begin(), v.end(), 0);
  return v;
}

Outcome criterion_zero_loss_fixed_point() {
  const auto pair = generate_synthetic_pair(synthetic_config(4));
  const auto& scan = pair.first;
  const auto lesions = lesions_to_3d(scan.mesh, scan.boxes);
  const auto id = identity_correspondence(scan.mesh);
  std::vector<std::pair<int, int>> gt;
  for (int k = 0; k < static_cast<int>(lesions.size()); ++k) gt.emplace_back(k, k);
  const auto detected = iota_vec(lesions.size());
  int runs = 0, good = 0;
  std::string worst;
  for (const double alpha : {0.0, 0.5, 1.0}) {
    for (const auto kind : {DistanceKind::Euclidean, DistanceKind::Geodesic}) {
      MatchConfig cfg;
      cfg.alpha = alpha;
      cfg.distance_kind = kind;
      const auto r = track(scan.mesh, lesions, scan.mesh, lesions, &id, cfg);
      const auto acc = tracking_accuracy(r, gt, detected, detected);
      ++runs;
      if (r.pairs == gt && r.loss == 0.0 && acc.matching == 1.0) {
        ++good;
      } else {
        worst = fmt(" [alpha=%.1f %s: loss %.3g, accuracy %.3f]", alpha, to_string(kind), r.loss, acc.matching);
      }
    }
  }
  const auto d = fmt("%d/%d configurations give identity, loss 0, accuracy 1 on %zu lesions", good, runs,
                     lesions.size()) + worst;
  return good == runs ? pass(d) : fail_with(d);
}

struct PipelineInputs {
  LesionSet3D first, second;
  CorrespondenceMap corr;
};

PipelineInputs pipeline_inputs(const SyntheticPair& pair) {
  return {lesions_to_3d(pair.first.mesh, pair.first.boxes), lesions_to_3d(pair.second.mesh, pair.second.boxes),
          chain_correspondence(pair.first.mesh, pair.first.reconstruction, pair.second.mesh,
                               pair.second.reconstruction)};
}

double matching_accuracy(const SyntheticPair& pair, const PipelineInputs& in, double alpha, DistanceKind kind) {
  MatchConfig cfg;
  cfg.alpha = alpha;
  cfg.distance_kind = kind;
  const auto r = track(pair.first.mesh, in.first, pair.second.mesh, in.second, &in.corr, cfg);
  return tracking_accuracy(r, pair.lesion_pairs, iota_vec(in.first.size()), iota_vec(in.second.size())).matching;
}

Outcome criterion_synthetic_tracking() {
  struct Variant {
    double alpha;
    DistanceKind kind;
    const char* name;
  };
  const std::vector<Variant> variants{{0.5, DistanceKind::Geodesic, "a=0.5 geo"},
                                      {1.0, DistanceKind::Geodesic, "a=1 geo"},
                                      {0.5, DistanceKind::Euclidean, "a=0.5 euc"},
                                      {1.0, DistanceKind::Euclidean, "a=1 euc"}};
  std::vector<std::vector<double>> acc(variants.size());
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto pair = generate_synthetic_pair(synthetic_config(seed));
    const auto in = pipeline_inputs(pair);
    for (std::size_t v = 0; v < variants.size(); ++v) {
      acc[v].push_back(matching_accuracy(pair, in, variants[v].alpha, variants[v].kind));
    }
  }
  std::vector<MeanStd> s;
  std::string d = "mean (std) over 20 seeds:";
  for (std::size_t v = 0; v < variants.size(); ++v) {
    s.push_back(mean_std(acc[v]));
    d += fmt(" %s %.3f (%.3f);", variants[v].name, s[v].mean, s[v].std);
  }
  const bool ok = s[0].mean >= 0.95 && s[0].mean >= s[1].mean && s[1].mean >= s[2].mean && s[1].mean >= s[3].mean;
  return ok ? pass(d) : fail_with(d);
}

// ---------------------------------------------------------------- 6

Outcome criterion_geodesic_fidelity() {
  std::string d;
  bool ok = true;
  const auto grid = fixtures::planar_grid(50, 50, 0.02);
  const int far = static_cast<int>(grid.vertices.rows()) - 1;
  const double exact = std::sqrt(2.0);
  const double fmm = single_source(grid, 0, GeodesicMethod::FastMarching).distance[far];
  const double rel = std::abs(fmm - exact) / exact;
  ok = ok && rel <= 0.02;
  d += fmt("grid corner-to-corner error %.3f%%", 100 * rel);

  const auto capsule = generate_synthetic_pair(synthetic_config(6)).second.mesh;
  std::mt19937_64 rng(6);
  long chord_violations = 0, above_dijkstra = 0;
  // Sampled triples per method: {samples, violations}.
  long samples[2] = {0, 0}, violations[2] = {0, 0};
  for (const auto* mesh : {&grid, &capsule}) {
    const GeodesicSolver solver(*mesh);
    std::uniform_int_distribution<int> pick(0, static_cast<int>(mesh->vertices.rows()) - 1);
    std::vector<int> sources;
    for (int k = 0; k < 6; ++k) sources.push_back(pick(rng));
    const auto dijkstra = solver.fields(sources, GeodesicMethod::Dijkstra);
    const auto fmm = solver.fields(sources, GeodesicMethod::FastMarching);
    for (std::size_t s = 0; s < sources.size(); ++s) {
      for (Eigen::Index v = 0; v < mesh->vertices.rows(); ++v) {
        const double c = (mesh->vertices.row(sources[s]) - mesh->vertices.row(v)).norm();
        chord_violations += dijkstra[s].distance[v] < c * (1 - 1e-9);
        chord_violations += fmm[s].distance[v] < c * (1 - 1e-9);
        above_dijkstra += fmm[s].distance[v] > dijkstra[s].distance[v] * (1 + 1e-9);
      }
    }
    // d(a, v) <= d(a, b) + d(b, v) for every sampled vertex v.
    for (int k = 0; k < 2; ++k) {
      const auto& fields = k == 0 ? dijkstra : fmm;
      for (std::size_t a = 0; a < sources.size(); ++a) {
        for (std::size_t b = 0; b < sources.size(); ++b) {
          if (a == b) continue;
          const double dab = fields[a].distance[sources[b]];
          for (Eigen::Index v = 0; v < mesh->vertices.rows(); v += 7) {
            ++samples[k];
            violations[k] += fields[a].distance[v] > (dab + fields[b].distance[v]) * (1 + 1e-9);
          }
        }
      }
    }
  }
  ok = ok && chord_violations == 0 && above_dijkstra == 0 && violations[0] == 0;
  d += fmt("; chord violations %ld; fast marching above dijkstra %ld; dijkstra triangle violations %ld/%ld"
           " (fast marching, informational: %ld/%ld)",
           chord_violations, above_dijkstra, violations[0], samples[0], violations[1], samples[1]);
  return ok ? pass(d) : fail_with(d);
}

// ---------------------------------------------------------------- 7

BoundingBox2D box(double x1, double y1, double x2, double y2) {
  BoundingBox2D b;
  b.x1 = x1;
  b.y1 = y1;
  b.x2 = x2;
  b.y2 = y2;
  return b;
}

Outcome criterion_metric_definitions() {
  const auto gt = box(0, 0, 10, 10);
  const auto left = box(2, 1, 12, 11);     // both centroids enclosed
  const auto middle = box(4, 0, 24, 10);   // holds the GT centroid, its own lies outside the GT
  const auto right = box(-5, -5, 15, 15);  // concentric, larger
  bool fig = centroid_match(gt, left) && !centroid_match(gt, middle) && centroid_match(gt, right);
  fig = fig && middle.contains(gt.center()) && !gt.contains(middle.center());
  fig = fig && std::abs(iou(gt, middle) - iou(gt, right)) < 1e-12;
  fig = fig && !criterion_match(gt, middle, MatchCriterion::Iou50) && !criterion_match(gt, right, MatchCriterion::Iou50);

  // Tracking evaluations with imperfect detections: each scan misses a random
  // subset of its lesions.
  int evaluations = 0, ordered = 0;
  for (std::uint64_t seed = 100; seed < 110; ++seed) {
    const auto pair = generate_synthetic_pair(synthetic_config(seed));
    std::mt19937_64 rng(seed);
    std::bernoulli_distribution keep(0.85);
    const auto thin = [&](const AnnotationSet& full, std::vector<int>& detected) {
      AnnotationSet out{full.image, full.width, full.height, {}};
      detected.assign(full.boxes.size(), -1);
      for (std::size_t k = 0; k < full.boxes.size(); ++k) {
        if (!keep(rng)) continue;
        detected[k] = static_cast<int>(out.boxes.size());
        out.boxes.push_back(full.boxes[k]);
      }
      return out;
    };
    std::vector<int> det_a, det_b;
    const auto boxes_a = thin(pair.first.boxes, det_a);
    const auto boxes_b = thin(pair.second.boxes, det_b);
    // Detection maps from the metric itself must agree with the construction.
    if (detection_map(pair.first.boxes, boxes_a) != det_a || detection_map(pair.second.boxes, boxes_b) != det_b) {
      return fail_with("detection_map disagrees with planted detections");
    }
    const auto la = lesions_to_3d(pair.first.mesh, boxes_a);
    const auto lb = lesions_to_3d(pair.second.mesh, boxes_b);
    const auto corr = chain_correspondence(pair.first.mesh, pair.first.reconstruction, pair.second.mesh,
                                           pair.second.reconstruction);
    for (const double alpha : {0.5, 1.0}) {
      for (const auto kind : {DistanceKind::Geodesic, DistanceKind::Euclidean}) {
        MatchConfig cfg;
        cfg.alpha = alpha;
        cfg.distance_kind = kind;
        const auto r = track(pair.first.mesh, la, pair.second.mesh, lb, &corr, cfg);
        const auto acc = tracking_accuracy(r, pair.lesion_pairs, det_a, det_b);
        ++evaluations;
        ordered += acc.matching >= acc.longitudinal;
      }
    }
  }
  const auto d = fmt("figure cases %s (IoU %.3f / %.3f); matching >= longitudinal on %d/%d evaluations",
                     fig ? "reproduced" : "NOT reproduced", iou(gt, middle), iou(gt, right), ordered, evaluations);
  return fig && ordered == evaluations ? pass(d) : fail_with(d);
}

// ---------------------------------------------------------------- 8

Outcome criterion_uv_mapping() {
  // Irregular UV layout so ties and non-grid nearest neighbours both occur.
  auto mesh = fixtures::planar_grid(12, 9, 0.1);
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> wobble(-0.02, 0.02);
  for (Eigen::Index v = 0; v < mesh.uv.rows(); ++v) {
    for (int k = 0; k < 2; ++k) mesh.uv(v, k) = std::clamp(mesh.uv(v, k) + wobble(rng), 0.0, 1.0);
  }
  mesh.texture.width = 96;
  mesh.texture.height = 72;
  long checked = 0, wrong = 0;
  for (int py = 0; py < mesh.texture.height; ++py) {
    for (int px = 0; px < mesh.texture.width; ++px) {
      BoundingBox2D b = box(px, py, px + 1, py + 1);
      const Eigen::Vector2d uv = box_center_to_uv(b, mesh.texture.width, mesh.texture.height);
      const auto [expected, dist] = oracle::nearest_row(mesh.uv, uv, true);
      ++checked;
      wrong += uv_to_vertex(mesh, uv) != expected;
    }
  }
  // Planted lesions on the synthetic surface round-trip to their vertices.
  const auto pair = generate_synthetic_pair(synthetic_config(8));
  int planted = 0, recovered = 0;
  for (const auto* scan : {&pair.first, &pair.second}) {
    const auto lesions = lesions_to_3d(scan->mesh, scan->boxes);
    for (std::size_t k = 0; k < lesions.size(); ++k) {
      ++planted;
      recovered += lesions.lesions[k].vertex == scan->lesion_vertices[k];
    }
  }
  const auto d = fmt("%ld/%ld pixel centres map to the L1-nearest vertex; %d/%d planted lesions recovered",
                     checked - wrong, checked, recovered, planted);
  return wrong == 0 && recovered == planted ? pass(d) : fail_with(d);
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    double budget_s;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria{
      {1, "annotation statistics", 60, criterion_annotation_statistics},
      {2, "hungarian optimality", 30, criterion_hungarian_optimality},
      {3, "qap solver quality", 300, criterion_qap_quality},
      {4, "zero-loss fixed point", 60, criterion_zero_loss_fixed_point},
      {5, "synthetic longitudinal tracking", 600, criterion_synthetic_tracking},
      {6, "geodesic fidelity", 60, criterion_geodesic_fidelity},
      {7, "metric definitions", 60, criterion_metric_definitions},
      {8, "uv mapping", 30, criterion_uv_mapping},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = fail_with(std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (o.status != Status::Skip && secs > c.budget_s) {
      o.status = Status::Fail;
      o.detail += fmt("; exceeded %.0f s budget", c.budget_s);
    }
    const char* tag = o.status == Status::Pass ? "PASS" : o.status == Status::Fail ? "FAIL" : "SKIP";
    std::printf("criterion %d %-32s %s  %s  (%.2f s)\n", c.id, c.name, tag, o.detail.c_str(), secs);
    std::fflush(stdout);
    failures += o.status == Status::Fail;
  }
  return failures == 0 ? 0 : 1;
}

#include "cli.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>

#include <CLI11.hpp>

#include "lesiontrack/blob_detector.hpp"
#include "lesiontrack/boxes.hpp"
#include "lesiontrack/correspondence.hpp"
#include "lesiontrack/error.hpp"
#include "lesiontrack/metrics.hpp"
#include "lesiontrack/partition.hpp"
#include "lesiontrack/synthetic.hpp"
#include "lesiontrack/tracking.hpp"
#include "lesiontrack/uv_mapping.hpp"

namespace fs = std::filesystem;

namespace lesiontrack {

namespace {

constexpr Rgb kManualColor{0, 200, 0};
constexpr Rgb kPredictedColor{220, 0, 0};
constexpr Rgb kOverlapColor{255, 220, 0};
constexpr double kTopkThreshold = 0.5;
constexpr std::size_t kTopkCap = 100;

void require_inputs(std::initializer_list<const fs::path*> paths) {
  for (const auto* p : paths) {
    if (!p->empty() && !fs::exists(*p)) fail(ErrorKind::Io, "input does not exist: " + p->string());
  }
}

void require_inputs(const std::vector<fs::path>& paths) {
  for (const auto& p : paths) require_inputs({&p});
}

fs::path prepare_out(const fs::path& out) {
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec) fail(ErrorKind::Io, "cannot create output directory " + out.string() + ": " + ec.message());
  return out;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path);
  if (!f) fail(ErrorKind::Io, "cannot write " + path.string());
  f << text;
}

void write_json(const fs::path& path, const nlohmann::json& j) { write_text(path, j.dump(2) + "\n"); }

nlohmann::json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::Io, "cannot open " + path.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::Parse, path.string() + ": " + e.what());
  }
}

// Column options shared by commands that read delimited annotation files.
struct CsvOptions {
  std::string layout = "xywh";
  std::vector<std::string> columns;
  std::string confidence, track_id, annotator;
  bool no_header = false;
  char delimiter = ',';
  int width = 4096, height = 4096;
  std::string image_filter;

  void add(CLI::App* app) {
    app->add_option("--csv-layout", layout, "Box layout of CSV inputs")->check(CLI::IsMember({"xywh", "corners"}));
    app->add_option("--csv-columns", columns, "image,a,b,c,d column names (or indices with --csv-no-header)")
        ->expected(5)
        ->delimiter(',');
    app->add_option("--csv-confidence", confidence, "Confidence column");
    app->add_option("--csv-track-id", track_id, "Track id column");
    app->add_option("--csv-annotator", annotator, "Annotator column");
    app->add_flag("--csv-no-header", no_header, "CSV has no header row; columns are zero-based indices");
    app->add_option("--csv-delimiter", delimiter, "CSV delimiter");
    app->add_option("--csv-width", width, "Texture width assumed for CSV rows");
    app->add_option("--csv-height", height, "Texture height assumed for CSV rows");
    app->add_option("--csv-image", image_filter, "Only rows of this image");
  }

  SchemaMapping mapping() const {
    const std::vector<std::string> cols =
        columns.empty() ? std::vector<std::string>{"image", "x", "y", "w", "h"} : columns;
    SchemaMapping m = layout == "corners" ? SchemaMapping::corners(cols[0], cols[1], cols[2], cols[3], cols[4])
                                          : SchemaMapping::xywh(cols[0], cols[1], cols[2], cols[3], cols[4]);
    m.confidence = confidence;
    m.track_id = track_id;
    m.annotator = annotator;
    m.has_header = !no_header;
    m.delimiter = delimiter;
    m.image_width = width;
    m.image_height = height;
    m.image_filter = image_filter;
    return m;
  }
};

// JSON files hold one set or an array of sets; other files go through the CSV mapping.
std::vector<AnnotationSet> load_sets(const fs::path& path, const CsvOptions& csv) {
  if (path.extension() == ".json") {
    const auto j = read_json(path);
    if (j.is_array()) {
      std::vector<AnnotationSet> out;
      for (const auto& s : j) out.push_back(annotations_from_json(s));
      return out;
    }
    return {annotations_from_json(j)};
  }
  return load_annotation_collection(path, csv.mapping());
}

AnnotationSet load_single(const fs::path& path, const CsvOptions& csv) {
  auto sets = load_sets(path, csv);
  if (sets.size() != 1) {
    fail(ErrorKind::Schema, path.string() + " holds " + std::to_string(sets.size()) + " annotation sets, expected one");
  }
  return std::move(sets.front());
}

// ---- detect ----

struct DetectArgs {
  fs::path image, external, out = "out";
  std::string name;
  double min_confidence = 0.0;
  double nms_iou = 0.01;
  std::vector<double> radii = {2, 4, 8, 16};
  double response_threshold = 0.05;
  CsvOptions csv;
};

void cmd_detect(const DetectArgs& a) {
  require_inputs({&a.image, &a.external});
  if (a.image.empty() == a.external.empty()) fail(ErrorKind::InvalidConfig, "pass exactly one of --image or --external");
  AnnotationSet set;
  if (!a.image.empty()) {
    BlobConfig cfg;
    cfg.radii = a.radii;
    cfg.response_threshold = a.response_threshold;
    cfg.nms_iou = a.nms_iou;
    set = detect_blobs(read_image(a.image), cfg);
    set.image = a.image.filename().string();
  } else {
    set = load_single(a.external, a.csv);
    for (auto& b : set.boxes) {
      if (!b.confidence) b.confidence = 1.0;
    }
  }
  AnnotationSet kept{set.image, set.width, set.height, {}};
  for (const auto& b : nms(set.boxes, a.nms_iou)) {
    if (*b.confidence >= a.min_confidence) kept.boxes.push_back(b);
  }
  const auto out = prepare_out(a.out);
  const std::string stem = !a.name.empty() ? a.name
                           : !a.image.empty() ? a.image.stem().string()
                                              : a.external.stem().string();
  write_annotations_json(out / (stem + "_detections.json"), kept);
  std::cout << kept.size() << " detections -> " << (out / (stem + "_detections.json")).string() << '\n';
}

// ---- map3d ----

struct Map3dArgs {
  fs::path mesh, texture, boxes, predictions, out = "out";
  bool no_vflip = false;
  CsvOptions csv;
};

void cmd_map3d(const Map3dArgs& a) {
  require_inputs({&a.mesh, &a.texture, &a.boxes, &a.predictions});
  const TexturedMesh mesh = load_mesh(a.mesh, a.texture);
  validate(mesh);
  const UvConvention conv{!a.no_vflip};
  const AnnotationSet boxes = load_single(a.boxes, a.csv);
  std::optional<AnnotationSet> preds;
  if (!a.predictions.empty()) preds = load_single(a.predictions, a.csv);

  const auto out = prepare_out(a.out);
  const std::string stem = a.mesh.stem().string();
  LesionSet3D lesions = lesions_to_3d(mesh, boxes, conv);
  write_lesions_json(out / (stem + "_lesions.json"), lesions);
  std::vector<BoxLayer> layers{{boxes, kManualColor}};
  if (preds) {
    write_lesions_json(out / (stem + "_pred_lesions.json"), lesions_to_3d(mesh, *preds, conv));
    layers.push_back({*preds, kPredictedColor});
  }
  write_png(out / (stem + "_embedded.png"), embed_boxes(mesh.texture.load(), layers, kOverlapColor));
  std::cout << lesions.size() << " lesions -> " << (out / (stem + "_lesions.json")).string() << '\n';
}

// ---- track ----

struct TrackArgs {
  fs::path mesh_a, mesh_b, lesions_a, lesions_b, recon_a, recon_b, corr, out = "out";
  std::string corr_mode;
  double alpha = 0.5;
  std::string distance = "geodesic";
  double dummy_u = 0.5, dummy_b = 0.5;
  std::string solver = "auto";
  std::string geodesic_method = "dijkstra";
  bool normalize = false, permissive = false, no_topk = false;
  int local_search_passes = 1;
  std::string name = "match";
};

// Indices of lesions kept by the top-k confidence rule, or all when some
// lesion carries no confidence.
std::pair<std::vector<int>, std::vector<int>> topk_indices(const LesionSet3D& a, const LesionSet3D& b) {
  auto all = [](const LesionSet3D& s) {
    std::vector<int> v(s.size());
    std::iota(v.begin(), v.end(), 0);
    return v;
  };
  auto as_set = [](const LesionSet3D& s) {
    AnnotationSet out;
    for (const auto& l : s.lesions) out.boxes.push_back(*l.box);
    return out;
  };
  auto has_conf = [](const LesionSet3D& s) {
    return std::all_of(s.lesions.begin(), s.lesions.end(),
                       [](const Lesion3D& l) { return l.box && l.box->confidence; });
  };
  if (!has_conf(a) || !has_conf(b)) return {all(a), all(b)};
  const auto [fa, fb] = filter_topk(as_set(a), as_set(b), kTopkThreshold, kTopkCap);
  auto back = [](const LesionSet3D& s, const AnnotationSet& kept) {
    std::vector<int> idx;
    std::vector<char> used(s.size(), 0);
    for (const auto& box : kept.boxes) {
      for (std::size_t i = 0; i < s.size(); ++i) {
        if (!used[i] && *s.lesions[i].box == box) {
          used[i] = 1;
          idx.push_back(static_cast<int>(i));
          break;
        }
      }
    }
    std::sort(idx.begin(), idx.end());
    return idx;
  };
  return {back(a, fa), back(b, fb)};
}

LesionSet3D subset(const LesionSet3D& s, const std::vector<int>& idx) {
  LesionSet3D out{s.mesh_id, {}};
  for (const int i : idx) out.lesions.push_back(s.lesions[i]);
  return out;
}

void cmd_track(const TrackArgs& a) {
  require_inputs({&a.mesh_a, &a.mesh_b, &a.lesions_a, &a.lesions_b, &a.recon_a, &a.recon_b, &a.corr});
  MatchConfig cfg;
  cfg.alpha = a.alpha;
  cfg.distance_kind = parse_distance_kind(a.distance);
  cfg.dummy_unary_cost = a.dummy_u;
  cfg.dummy_binary_cost = a.dummy_b;
  cfg.solver = parse_solver_kind(a.solver);
  cfg.geodesic_method = parse_geodesic_method(a.geodesic_method);
  cfg.normalize_by_diameter = a.normalize;
  cfg.permissive_components = a.permissive;
  cfg.local_search_passes = a.local_search_passes;
  cfg.validate();

  TexturedMesh mesh_a = load_obj(a.mesh_a);
  TexturedMesh mesh_b = load_obj(a.mesh_b);
  mesh_a.id = a.mesh_a.stem().string();
  mesh_b.id = a.mesh_b.stem().string();
  LesionSet3D lesions_a = read_lesions_json(a.lesions_a);
  LesionSet3D lesions_b = read_lesions_json(a.lesions_b);

  std::optional<CorrespondenceMap> corr;
  const int sources = (!a.recon_a.empty() || !a.recon_b.empty()) + !a.corr.empty() + !a.corr_mode.empty();
  if (sources > 1) fail(ErrorKind::InvalidConfig, "pass one of --recon-a/--recon-b, --corr or --corr-mode");
  if (!a.recon_a.empty() || !a.recon_b.empty()) {
    if (a.recon_a.empty() || a.recon_b.empty()) fail(ErrorKind::InvalidConfig, "--recon-a and --recon-b go together");
    corr = chain_correspondence(mesh_a, load_reconstructed(a.recon_a), mesh_b, load_reconstructed(a.recon_b));
  } else if (!a.corr.empty()) {
    corr = read_correspondence_json(a.corr);
    if (corr->size() != static_cast<std::size_t>(mesh_a.num_vertices())) {
      fail(ErrorKind::MeshMismatch, "correspondence has " + std::to_string(corr->size()) + " entries, mesh has " +
                                        std::to_string(mesh_a.num_vertices()) + " vertices");
    }
  } else if (a.corr_mode == "identity") {
    if (mesh_a.num_vertices() != mesh_b.num_vertices()) {
      fail(ErrorKind::MeshMismatch, "identity correspondence needs equal vertex counts");
    }
    corr = identity_correspondence(mesh_a);
  } else if (a.corr_mode == "icp") {
    const auto fit = rigid_align_correspondence(mesh_a, mesh_b);
    if (!fit.converged) {
      std::cerr << "warning: rigid alignment residual " << fit.residual << " exceeds tolerance\n";
    }
    corr = fit.correspondence;
  } else if (!a.corr_mode.empty()) {
    fail(ErrorKind::InvalidConfig, "unknown --corr-mode '" + a.corr_mode + "' (expected identity|icp)");
  }
  if (corr) {
    corr->source_id = mesh_a.id;
    corr->target_id = mesh_b.id;
  }
  lesions_a.mesh_id = mesh_a.id;
  lesions_b.mesh_id = mesh_b.id;

  const auto [keep_a, keep_b] =
      a.no_topk ? std::pair{std::vector<int>{}, std::vector<int>{}} : topk_indices(lesions_a, lesions_b);
  const bool filtered = !a.no_topk;
  const LesionSet3D use_a = filtered ? subset(lesions_a, keep_a) : lesions_a;
  const LesionSet3D use_b = filtered ? subset(lesions_b, keep_b) : lesions_b;

  MatchResult r = track(mesh_a, use_a, mesh_b, use_b, corr ? &*corr : nullptr, cfg);
  // Report indices into the lesion files as given.
  if (filtered) {
    for (auto& [i, j] : r.pairs) {
      i = keep_a[i];
      j = keep_b[j];
    }
    for (auto& i : r.disappearing) i = keep_a[i];
    for (auto& j : r.appearing) j = keep_b[j];
  }
  const auto out = prepare_out(a.out);
  write_json(out / (a.name + ".json"), to_json(r));
  std::cout << r.pairs.size() << " pairs, " << r.disappearing.size() << " disappearing, " << r.appearing.size()
            << " appearing, loss " << r.loss << " (" << to_string(r.solver_used) << ")\n";
}

// ---- eval ----

struct EvalArgs {
  std::string mode = "detect";
  std::vector<fs::path> gt, pred;
  std::string criterion = "centroid";
  double conf_threshold = 0.5;
  std::string ap = "all";
  // track mode
  std::vector<fs::path> results, gt_a, gt_b, det_a, det_b;
  std::vector<std::string> subjects;
  // annotator-matrix mode
  std::vector<std::string> annotators;
  fs::path out = "out";
  std::string name = "report";
  CsvOptions csv;
};

std::vector<AnnotationSet> load_many(const std::vector<fs::path>& paths, const CsvOptions& csv) {
  std::vector<AnnotationSet> out;
  for (const auto& p : paths) {
    for (auto& s : load_sets(p, csv)) out.push_back(std::move(s));
  }
  return out;
}

AnnotationSet boxes_of(const LesionSet3D& lesions) {
  AnnotationSet s;
  for (const auto& l : lesions.lesions) {
    if (!l.box) fail(ErrorKind::Schema, "lesion file lacks the originating boxes");
    s.boxes.push_back(*l.box);
  }
  return s;
}

void cmd_eval(const EvalArgs& a) {
  require_inputs(a.gt);
  require_inputs(a.pred);
  require_inputs(a.results);
  require_inputs(a.gt_a);
  require_inputs(a.gt_b);
  require_inputs(a.det_a);
  require_inputs(a.det_b);
  const auto out = prepare_out(a.out);
  std::string table;
  nlohmann::json report;
  if (a.mode == "detect") {
    if (a.gt.empty() || a.pred.empty()) fail(ErrorKind::InvalidConfig, "detect evaluation needs --gt and --pred");
    const auto interp = a.ap == "11" ? ApInterpolation::ElevenPoint : ApInterpolation::AllPoint;
    const auto r = evaluate_detection(load_many(a.gt, a.csv), load_many(a.pred, a.csv), parse_criterion(a.criterion),
                                      a.conf_threshold, interp);
    report = to_json(r);
    table = format_table(r);
  } else if (a.mode == "track") {
    const std::size_t n = a.results.size();
    if (n == 0 || a.gt_a.size() != n || a.gt_b.size() != n) {
      fail(ErrorKind::InvalidConfig, "track evaluation needs matching counts of --result, --gt-a and --gt-b");
    }
    if ((!a.det_a.empty() && a.det_a.size() != n) || (!a.det_b.empty() && a.det_b.size() != n)) {
      fail(ErrorKind::InvalidConfig, "--det-a/--det-b must be given once per result");
    }
    std::vector<SubjectTracking> subjects;
    for (std::size_t k = 0; k < n; ++k) {
      const auto result = match_result_from_json(read_json(a.results[k]));
      const auto ga = load_single(a.gt_a[k], a.csv);
      const auto gb = load_single(a.gt_b[k], a.csv);
      const auto pairs = longitudinal_pairs(ga, gb);
      // Without detection files the tracked lesions are the GT boxes themselves.
      const auto map_a = a.det_a.empty() ? detection_map(ga, ga) : detection_map(ga, boxes_of(read_lesions_json(a.det_a[k])));
      const auto map_b = a.det_b.empty() ? detection_map(gb, gb) : detection_map(gb, boxes_of(read_lesions_json(a.det_b[k])));
      const std::string name = k < a.subjects.size() ? a.subjects[k] : a.results[k].stem().string();
      subjects.push_back({name, tracking_accuracy(result, pairs, map_a, map_b)});
    }
    const auto r = summarize_tracking(std::move(subjects));
    report = to_json(r);
    table = format_table(r);
  } else if (a.mode == "annotator-matrix") {
    std::vector<std::string> names;
    std::vector<std::vector<AnnotationSet>> sets;
    for (const auto& entry : a.annotators) {
      const auto eq = entry.find('=');
      if (eq == std::string::npos) fail(ErrorKind::InvalidConfig, "--annotator expects name=path, got '" + entry + "'");
      const fs::path p = entry.substr(eq + 1);
      require_inputs({&p});
      names.push_back(entry.substr(0, eq));
      sets.push_back(load_sets(p, a.csv));
    }
    const auto m = pairwise_annotator_matrix(sets);
    report = annotator_matrix_json(names, m);
    table = format_annotator_table(names, m);
  } else {
    fail(ErrorKind::InvalidConfig, "unknown eval mode '" + a.mode + "'");
  }
  write_json(out / (a.name + ".json"), report);
  write_text(out / (a.name + ".txt"), table);
  std::cout << table;
}

// ---- partition ----

struct PartitionArgs {
  fs::path metadata, out = "out";
  PartitionConfig config;
};

void cmd_partition(const PartitionArgs& a) {
  require_inputs({&a.metadata});
  const auto p = partition_subjects(load_subject_metadata(a.metadata), a.config);
  const auto out = prepare_out(a.out);
  write_json(out / "partition.json", to_json(p));
  std::cout << "train " << p.train.meshes.size() << ", validation " << p.validation.meshes.size() << ", test "
            << p.test.meshes.size() << ", longitudinal " << p.longitudinal.meshes.size() << " meshes\n";
}

// ---- gen-synthetic ----

struct SyntheticArgs {
  SyntheticConfig config;
  fs::path out = "out";
  std::string stem = "synth";
};

void cmd_gen_synthetic(const SyntheticArgs& a) {
  const auto pair = generate_synthetic_pair(a.config);
  write_synthetic_pair(prepare_out(a.out), pair, a.stem);
  std::cout << pair.first.boxes.size() << " + " << pair.second.boxes.size() << " lesions, " << pair.lesion_pairs.size()
            << " tracked -> " << a.out.string() << '\n';
}

int exit_code(const Error& e) { return e.is_io() ? 2 : 1; }

}  // namespace

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"Skin lesion detection plumbing, 2D-to-3D mapping and longitudinal tracking on textured meshes"};
  app.require_subcommand(1);
  app.set_config("--config", "", "key=value config file; [command] sections apply to that command");
  app.set_help_all_flag("--help-all");

  DetectArgs detect;
  auto* d = app.add_subcommand("detect", "Detect dark blobs in a texture or re-serialise external detections");
  d->add_option("--image", detect.image, "Texture image (PNG/JPEG)");
  d->add_option("--external", detect.external, "External detections (CSV or annotation JSON)");
  d->add_option("--out", detect.out, "Output directory");
  d->add_option("--name", detect.name, "Output file stem");
  d->add_option("--min-confidence", detect.min_confidence, "Drop detections below this confidence");
  d->add_option("--nms-iou", detect.nms_iou, "NMS IoU threshold");
  d->add_option("--radii", detect.radii, "Blob radii in pixels")->delimiter(',');
  d->add_option("--response-threshold", detect.response_threshold, "Minimum blob response");
  detect.csv.add(d);

  Map3dArgs map3d;
  auto* m = app.add_subcommand("map3d", "Map boxes to mesh vertices and embed them in the texture");
  m->add_option("--mesh", map3d.mesh, "OBJ mesh")->required();
  m->add_option("--texture", map3d.texture, "Texture image")->required();
  m->add_option("--boxes", map3d.boxes, "Manual boxes (annotation JSON or CSV)")->required();
  m->add_option("--pred", map3d.predictions, "Predicted boxes drawn as a second layer");
  m->add_flag("--no-vflip", map3d.no_vflip, "Texture rows and v grow in the same direction");
  m->add_option("--out", map3d.out, "Output directory");
  map3d.csv.add(m);

  TrackArgs tr;
  auto* t = app.add_subcommand("track", "Match lesions between two scans of one subject");
  t->add_option("--mesh-a", tr.mesh_a, "Earlier scan OBJ")->required();
  t->add_option("--mesh-b", tr.mesh_b, "Later scan OBJ")->required();
  t->add_option("--lesions-a", tr.lesions_a, "Lesions on the earlier scan (map3d output)")->required();
  t->add_option("--lesions-b", tr.lesions_b, "Lesions on the later scan")->required();
  t->add_option("--recon-a", tr.recon_a, "Template reconstruction of the earlier scan");
  t->add_option("--recon-b", tr.recon_b, "Template reconstruction of the later scan");
  t->add_option("--corr", tr.corr, "Precomputed vertex correspondence JSON");
  t->add_option("--corr-mode", tr.corr_mode, "identity | icp");
  t->add_option("--alpha", tr.alpha, "Unary weight in [0,1]");
  t->add_option("--distance", tr.distance, "euclidean | geodesic");
  t->add_option("--dummy-u", tr.dummy_u, "Dummy unary cost (mesh units)");
  t->add_option("--dummy-b", tr.dummy_b, "Dummy binary cost (mesh units)");
  t->add_option("--solver", tr.solver, "auto | hungarian | spectral | brute_force");
  t->add_option("--geodesic-method", tr.geodesic_method, "dijkstra | fmm");
  t->add_flag("--normalize-by-diameter", tr.normalize, "Divide distances by the largest source lesion distance");
  t->add_flag("--permissive", tr.permissive, "Allow lesions on disconnected components");
  t->add_flag("--no-topk", tr.no_topk, "Skip the confidence top-k filter");
  t->add_option("--local-search-passes", tr.local_search_passes, "Swap passes after spectral rounding");
  t->add_option("--name", tr.name, "Output file stem");
  t->add_option("--out", tr.out, "Output directory");

  EvalArgs ev;
  auto* e = app.add_subcommand("eval", "Detection, tracking and inter-annotator evaluation");
  e->add_option("--mode", ev.mode, "detect | track | annotator-matrix")
      ->check(CLI::IsMember({"detect", "track", "annotator-matrix"}));
  e->add_option("--gt", ev.gt, "Ground-truth annotation files");
  e->add_option("--pred", ev.pred, "Prediction annotation files");
  e->add_option("--criterion", ev.criterion, "centroid | iou_0.5");
  e->add_option("--conf-threshold", ev.conf_threshold, "Prediction confidence threshold");
  e->add_option("--ap", ev.ap, "AP interpolation: all | 11")->check(CLI::IsMember({"all", "11"}));
  e->add_option("--result", ev.results, "Match results, one per subject");
  e->add_option("--gt-a", ev.gt_a, "GT boxes with track ids on the earlier scans");
  e->add_option("--gt-b", ev.gt_b, "GT boxes with track ids on the later scans");
  e->add_option("--det-a", ev.det_a, "Lesion files that were tracked on the earlier scans");
  e->add_option("--det-b", ev.det_b, "Lesion files that were tracked on the later scans");
  e->add_option("--subject", ev.subjects, "Subject names for the report");
  e->add_option("--annotator", ev.annotators, "name=path, repeated per annotator");
  e->add_option("--name", ev.name, "Output file stem");
  e->add_option("--out", ev.out, "Output directory");
  ev.csv.add(e);

  PartitionArgs pa;
  auto* p = app.add_subcommand("partition", "Sex-stratified subject split");
  p->add_option("--metadata", pa.metadata, "CSV with subject_id,sex,scan_id[,annotated]")->required();
  p->add_option("--seed", pa.config.seed, "Random seed");
  p->add_option("--train", pa.config.train, "Training subjects");
  p->add_option("--validation", pa.config.validation, "Validation subjects");
  p->add_option("--test", pa.config.test, "Static test subjects");
  p->add_option("--longitudinal", pa.config.longitudinal, "Longitudinal subjects drawn from the static test split");
  p->add_option("--out", pa.out, "Output directory");

  SyntheticArgs sy;
  auto* g = app.add_subcommand("gen-synthetic", "Generate a synthetic longitudinal scan pair");
  g->add_option("--seed", sy.config.seed, "Random seed");
  g->add_option("--lesions", sy.config.num_lesions, "Lesions on the first scan");
  g->add_option("--appearing", sy.config.appearing, "New lesions on the second scan");
  g->add_option("--disappearing", sy.config.disappearing, "Lesions missing from the second scan");
  g->add_option("--bend", sy.config.bend, "Bend curvature (1/m)");
  g->add_option("--shift", sy.config.shift, "Rigid translation (m)");
  g->add_option("--rotation", sy.config.rotation_deg, "Rigid rotation (degrees)");
  g->add_option("--jitter", sy.config.jitter_probability, "Probability a persistent lesion moves one vertex");
  g->add_option("--texture-size", sy.config.texture_size, "Texture side in pixels");
  g->add_option("--stem", sy.stem, "File name stem");
  g->add_option("--out", sy.out, "Output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& ex) {
    return app.exit(ex);
  } catch (const CLI::CallForAllHelp& ex) {
    return app.exit(ex);
  } catch (const CLI::FileError& ex) {
    app.exit(ex);
    return 2;
  } catch (const CLI::ParseError& ex) {
    app.exit(ex);
    return 1;
  }

  try {
    if (d->parsed()) cmd_detect(detect);
    if (m->parsed()) cmd_map3d(map3d);
    if (t->parsed()) cmd_track(tr);
    if (e->parsed()) cmd_eval(ev);
    if (p->parsed()) cmd_partition(pa);
    if (g->parsed()) cmd_gen_synthetic(sy);
  } catch (const Error& ex) {
    std::cerr << "error: " << ex.what() << '\n';
    return exit_code(ex);
  } catch (const fs::filesystem_error& ex) {
    std::cerr << "error: " << ex.what() << '\n';
    return 2;
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << '\n';
    return 1;
  }
  return 0;
}

int run_cli(const std::vector<std::string>& args) {
  std::vector<const char*> argv{"lesiontrack"};
  for (const auto& a : args) argv.push_back(a.c_str());
  return run_cli(static_cast<int>(argv.size()), argv.data());
}

}  // namespace lesiontrack

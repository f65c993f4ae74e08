#include "lesiontrack/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <set>

#include "lesiontrack/error.hpp"

namespace lesiontrack {

MatchCriterion parse_criterion(const std::string& name) {
  if (name == "centroid") return MatchCriterion::Centroid;
  if (name == "iou_0.5" || name == "iou") return MatchCriterion::Iou50;
  fail(ErrorKind::InvalidConfig, "unknown criterion '" + name + "' (expected iou_0.5|centroid)");
}

const char* to_string(MatchCriterion c) { return c == MatchCriterion::Centroid ? "centroid" : "iou_0.5"; }

bool criterion_match(const BoundingBox2D& gt, const BoundingBox2D& pred, MatchCriterion criterion) {
  return criterion == MatchCriterion::Centroid ? centroid_match(gt, pred) : iou(gt, pred) >= 0.5;
}

SetMatching match_sets(const AnnotationSet& gt, const AnnotationSet& pred, MatchCriterion criterion,
                       double conf_threshold) {
  SetMatching out;
  std::vector<char> taken(gt.size(), 0);
  for (const auto p : confidence_order(pred.boxes)) {
    const auto& box = pred.boxes[p];
    if (box.confidence.value_or(1.0) < conf_threshold) continue;
    ++out.num_pred_kept;
    int best = -1;
    double best_score = 0;
    for (std::size_t g = 0; g < gt.size(); ++g) {
      if (taken[g] || !criterion_match(gt.boxes[g], box, criterion)) continue;
      // Larger is better for both criteria.
      const double score = criterion == MatchCriterion::Iou50 ? iou(gt.boxes[g], box)
                                                              : -(gt.boxes[g].center() - box.center()).norm();
      if (best < 0 || score > best_score) {
        best = static_cast<int>(g);
        best_score = score;
      }
    }
    if (best >= 0) {
      taken[best] = 1;
      out.pairs.emplace_back(best, static_cast<int>(p));
    } else {
      out.unmatched_pred.push_back(static_cast<int>(p));
    }
  }
  for (std::size_t g = 0; g < gt.size(); ++g) {
    if (!taken[g]) out.unmatched_gt.push_back(static_cast<int>(g));
  }
  return out;
}

PrecisionRecall prf_from_counts(int tp, int fp, int fn) {
  PrecisionRecall r;
  const int pred = tp + fp;
  const int gt = tp + fn;
  if (pred == 0 && gt == 0) return {1, 1, 1};
  r.precision = pred > 0 ? static_cast<double>(tp) / pred : 0.0;
  r.recall = gt > 0 ? static_cast<double>(tp) / gt : 1.0;
  const double s = r.precision + r.recall;
  r.f1 = s > 0 ? 2 * r.precision * r.recall / s : 0.0;
  return r;
}

PrecisionRecall precision_recall(const AnnotationSet& gt, const AnnotationSet& pred, MatchCriterion criterion,
                                 double conf_threshold) {
  const auto m = match_sets(gt, pred, criterion, conf_threshold);
  return prf_from_counts(static_cast<int>(m.pairs.size()), static_cast<int>(m.unmatched_pred.size()),
                         static_cast<int>(m.unmatched_gt.size()));
}

double average_precision(const AnnotationSet& gt, const AnnotationSet& pred, MatchCriterion criterion,
                         ApInterpolation interpolation) {
  for (const auto& b : pred.boxes) {
    if (!b.confidence) fail(ErrorKind::MissingConfidence, "average precision needs a confidence on every prediction");
  }
  if (gt.empty()) return pred.empty() ? 1.0 : 0.0;
  if (pred.empty()) return 0.0;

  // Greedy matching visits predictions in confidence order, so the matching at
  // any threshold is a prefix of the full one.
  const auto m = match_sets(gt, pred, criterion, -std::numeric_limits<double>::infinity());
  std::vector<char> is_tp(pred.size(), 0);
  for (const auto& [g, p] : m.pairs) is_tp[p] = 1;
  const auto order = confidence_order(pred.boxes);

  std::vector<double> recall, precision;
  int tp = 0;
  for (std::size_t k = 0; k < order.size(); ++k) {
    tp += is_tp[order[k]];
    const bool group_end =
        k + 1 == order.size() || *pred.boxes[order[k + 1]].confidence != *pred.boxes[order[k]].confidence;
    if (!group_end) continue;
    recall.push_back(static_cast<double>(tp) / static_cast<double>(gt.size()));
    precision.push_back(static_cast<double>(tp) / static_cast<double>(k + 1));
  }
  // Precision envelope: best precision at any recall at least as high.
  for (std::size_t k = precision.size(); k-- > 1;) precision[k - 1] = std::max(precision[k - 1], precision[k]);

  if (interpolation == ApInterpolation::ElevenPoint) {
    double sum = 0;
    for (int t = 0; t <= 10; ++t) {
      const double r = t / 10.0;
      const auto it = std::find_if(recall.begin(), recall.end(), [&](double x) { return x >= r - 1e-12; });
      if (it != recall.end()) sum += precision[static_cast<std::size_t>(it - recall.begin())];
    }
    return sum / 11.0;
  }
  double area = 0, prev = 0;
  for (std::size_t k = 0; k < recall.size(); ++k) {
    area += (recall[k] - prev) * precision[k];
    prev = recall[k];
  }
  return area;
}

MeanStd mean_std(const std::vector<double>& values) {
  if (values.empty()) return {};
  double mean = 0;
  for (const double v : values) mean += v;
  mean /= static_cast<double>(values.size());
  double var = 0;
  for (const double v : values) var += (v - mean) * (v - mean);
  return {mean, std::sqrt(var / static_cast<double>(values.size()))};
}

namespace {

// Pairs prediction sets with GT sets: by image name when all names resolve,
// otherwise by position.
std::vector<int> pair_sets(const std::vector<AnnotationSet>& gt, const std::vector<AnnotationSet>& pred) {
  std::map<std::string, int> by_name;
  for (std::size_t i = 0; i < gt.size(); ++i) by_name.emplace(gt[i].image, static_cast<int>(i));
  std::vector<int> out(gt.size(), -1);
  bool named = by_name.size() == gt.size();
  std::vector<int> tentative(gt.size(), -1);
  for (std::size_t p = 0; p < pred.size() && named; ++p) {
    const auto it = by_name.find(pred[p].image);
    if (it == by_name.end() || tentative[it->second] >= 0) {
      named = false;
    } else {
      tentative[it->second] = static_cast<int>(p);
    }
  }
  if (named) return tentative;
  if (pred.size() != gt.size()) {
    fail(ErrorKind::Schema, "cannot pair " + std::to_string(pred.size()) + " prediction sets with " +
                                std::to_string(gt.size()) + " ground-truth sets");
  }
  for (std::size_t i = 0; i < gt.size(); ++i) out[i] = static_cast<int>(i);
  return out;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

std::string pad(const std::string& s, std::size_t width) {
  return s.size() >= width ? s : s + std::string(width - s.size(), ' ');
}

std::string render(const std::vector<std::vector<std::string>>& rows) {
  std::vector<std::size_t> widths;
  for (const auto& r : rows) {
    widths.resize(std::max(widths.size(), r.size()), 0);
    for (std::size_t c = 0; c < r.size(); ++c) widths[c] = std::max(widths[c], r[c].size());
  }
  std::string out;
  for (const auto& r : rows) {
    std::string line;
    for (std::size_t c = 0; c < r.size(); ++c) line += (c ? "  " : "") + pad(r[c], widths[c]);
    while (!line.empty() && line.back() == ' ') line.pop_back();
    out += line + '\n';
  }
  return out;
}

std::string mean_std_cell(const MeanStd& m) { return fmt(m.mean) + " (" + fmt(m.std) + ")"; }

nlohmann::json to_json(const MeanStd& m) { return {{"mean", m.mean}, {"std", m.std}}; }

nlohmann::json to_json(const PrecisionRecall& p) {
  return {{"precision", p.precision}, {"recall", p.recall}, {"f1", p.f1}};
}

}  // namespace

DetectionReport evaluate_detection(const std::vector<AnnotationSet>& gt, const std::vector<AnnotationSet>& pred,
                                   MatchCriterion criterion, double conf_threshold, ApInterpolation interpolation) {
  DetectionReport report;
  report.criterion = criterion;
  report.conf_threshold = conf_threshold;
  const auto pairing = pair_sets(gt, pred);
  std::vector<double> p, r, f, a;
  for (std::size_t i = 0; i < gt.size(); ++i) {
    const AnnotationSet empty{gt[i].image, gt[i].width, gt[i].height, {}};
    const AnnotationSet& ps = pairing[i] >= 0 ? pred[pairing[i]] : empty;
    const auto m = match_sets(gt[i], ps, criterion, conf_threshold);
    ScanDetection s;
    s.image = gt[i].image;
    s.tp = static_cast<int>(m.pairs.size());
    s.fp = static_cast<int>(m.unmatched_pred.size());
    s.fn = static_cast<int>(m.unmatched_gt.size());
    s.prf = prf_from_counts(s.tp, s.fp, s.fn);
    s.ap = average_precision(gt[i], ps, criterion, interpolation);
    p.push_back(s.prf.precision);
    r.push_back(s.prf.recall);
    f.push_back(s.prf.f1);
    a.push_back(s.ap);
    report.scans.push_back(std::move(s));
  }
  report.precision = mean_std(p);
  report.recall = mean_std(r);
  report.f1 = mean_std(f);
  report.ap = mean_std(a);
  return report;
}

nlohmann::json to_json(const DetectionReport& report) {
  nlohmann::json scans = nlohmann::json::array();
  for (const auto& s : report.scans) {
    scans.push_back({{"image", s.image},
                     {"tp", s.tp},
                     {"fp", s.fp},
                     {"fn", s.fn},
                     {"precision", s.prf.precision},
                     {"recall", s.prf.recall},
                     {"f1", s.prf.f1},
                     {"ap", s.ap}});
  }
  return {{"criterion", to_string(report.criterion)},
          {"conf_threshold", report.conf_threshold},
          {"scans", scans},
          {"precision", to_json(report.precision)},
          {"recall", to_json(report.recall)},
          {"f1", to_json(report.f1)},
          {"ap", to_json(report.ap)}};
}

std::string format_table(const DetectionReport& report) {
  std::vector<std::vector<std::string>> rows{{"criterion", "precision", "recall", "f1", "ap"}};
  rows.push_back({to_string(report.criterion), mean_std_cell(report.precision), mean_std_cell(report.recall),
                  mean_std_cell(report.f1), mean_std_cell(report.ap)});
  return render(rows);
}

std::vector<std::vector<PrecisionRecall>> pairwise_annotator_matrix(
    const std::vector<std::vector<AnnotationSet>>& annotators) {
  const std::size_t k = annotators.size();
  if (k < 2) fail(ErrorKind::InvalidConfig, "annotator matrix needs at least two annotators");
  std::vector<std::vector<PrecisionRecall>> out(k, std::vector<PrecisionRecall>(k));
  for (std::size_t g = 0; g < k; ++g) {
    for (std::size_t p = 0; p < k; ++p) {
      if (g == p) {
        out[g][p] = {1, 1, 1};
        continue;
      }
      const auto pairing = pair_sets(annotators[g], annotators[p]);
      int tp = 0, fp = 0, fn = 0;
      std::vector<char> used(annotators[p].size(), 0);
      for (std::size_t i = 0; i < annotators[g].size(); ++i) {
        const auto& gs = annotators[g][i];
        const AnnotationSet empty{gs.image, gs.width, gs.height, {}};
        const AnnotationSet& ps = pairing[i] >= 0 ? annotators[p][pairing[i]] : empty;
        if (pairing[i] >= 0) used[pairing[i]] = 1;
        const auto m = match_sets(gs, ps, MatchCriterion::Centroid);
        tp += static_cast<int>(m.pairs.size());
        fp += static_cast<int>(m.unmatched_pred.size());
        fn += static_cast<int>(m.unmatched_gt.size());
      }
      // Images only the predicting annotator covers still count as false positives.
      for (std::size_t j = 0; j < annotators[p].size(); ++j) {
        if (!used[j]) fp += static_cast<int>(annotators[p][j].size());
      }
      out[g][p] = prf_from_counts(tp, fp, fn);
    }
  }
  return out;
}

nlohmann::json annotator_matrix_json(const std::vector<std::string>& names,
                                     const std::vector<std::vector<PrecisionRecall>>& matrix) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& row : matrix) {
    nlohmann::json r = nlohmann::json::array();
    for (const auto& e : row) r.push_back(to_json(e));
    rows.push_back(r);
  }
  return {{"annotators", names}, {"matrix", rows}};
}

std::string format_annotator_table(const std::vector<std::string>& names,
                                   const std::vector<std::vector<PrecisionRecall>>& matrix) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> header{"gt \\ pred"};
  for (const auto& n : names) header.push_back(n);
  rows.push_back(header);
  for (std::size_t g = 0; g < matrix.size(); ++g) {
    std::vector<std::string> r{g < names.size() ? names[g] : std::to_string(g)};
    for (const auto& e : matrix[g]) r.push_back(fmt(e.precision) + "/" + fmt(e.recall) + "/" + fmt(e.f1));
    rows.push_back(r);
  }
  return render(rows) + "cells: precision/recall/f1\n";
}

std::vector<int> detection_map(const AnnotationSet& gt, const AnnotationSet& detections, MatchCriterion criterion,
                               double conf_threshold) {
  std::vector<int> out(gt.size(), -1);
  for (const auto& [g, p] : match_sets(gt, detections, criterion, conf_threshold).pairs) out[g] = p;
  return out;
}

std::vector<std::pair<int, int>> longitudinal_pairs(const AnnotationSet& gt_t, const AnnotationSet& gt_t1) {
  std::map<std::string, int> later;
  for (std::size_t j = 0; j < gt_t1.size(); ++j) {
    if (const auto& id = gt_t1.boxes[j].track_id) {
      if (!later.emplace(*id, static_cast<int>(j)).second) fail(ErrorKind::Schema, "duplicate track id '" + *id + "'");
    }
  }
  std::vector<std::pair<int, int>> out;
  std::set<std::string> seen;
  for (std::size_t i = 0; i < gt_t.size(); ++i) {
    const auto& id = gt_t.boxes[i].track_id;
    if (!id) continue;
    if (!seen.insert(*id).second) fail(ErrorKind::Schema, "duplicate track id '" + *id + "'");
    const auto it = later.find(*id);
    if (it != later.end()) out.emplace_back(static_cast<int>(i), it->second);
  }
  return out;
}

TrackingAccuracy tracking_accuracy(const MatchResult& result, const std::vector<std::pair<int, int>>& gt_pairs,
                                   const std::vector<int>& detected_t, const std::vector<int>& detected_t1) {
  if (gt_pairs.empty()) fail(ErrorKind::EmptyGroundTruth, "no longitudinal ground-truth pairs");
  const std::set<std::pair<int, int>> predicted(result.pairs.begin(), result.pairs.end());
  TrackingAccuracy acc;
  acc.total_pairs = static_cast<int>(gt_pairs.size());
  for (const auto& [a, b] : gt_pairs) {
    if (a < 0 || static_cast<std::size_t>(a) >= detected_t.size() || b < 0 ||
        static_cast<std::size_t>(b) >= detected_t1.size()) {
      fail(ErrorKind::Range, "ground-truth pair (" + std::to_string(a) + "," + std::to_string(b) +
                                 ") outside detection maps");
    }
    const int da = detected_t[a], db = detected_t1[b];
    if (da < 0 || db < 0) continue;
    ++acc.detected_pairs;
    if (predicted.count({da, db})) ++acc.correct;
  }
  acc.matching = acc.detected_pairs > 0 ? static_cast<double>(acc.correct) / acc.detected_pairs : 0.0;
  acc.longitudinal = static_cast<double>(acc.correct) / acc.total_pairs;
  return acc;
}

TrackingReport summarize_tracking(std::vector<SubjectTracking> subjects) {
  TrackingReport r;
  std::vector<double> m, l;
  for (const auto& s : subjects) {
    m.push_back(s.accuracy.matching);
    l.push_back(s.accuracy.longitudinal);
  }
  r.subjects = std::move(subjects);
  r.matching = mean_std(m);
  r.longitudinal = mean_std(l);
  return r;
}

nlohmann::json to_json(const TrackingReport& report) {
  nlohmann::json subjects = nlohmann::json::array();
  for (const auto& s : report.subjects) {
    subjects.push_back({{"subject", s.subject},
                        {"matching_accuracy", s.accuracy.matching},
                        {"longitudinal_accuracy", s.accuracy.longitudinal},
                        {"correct", s.accuracy.correct},
                        {"detected_pairs", s.accuracy.detected_pairs},
                        {"total_pairs", s.accuracy.total_pairs}});
  }
  return {{"subjects", subjects},
          {"matching_accuracy", to_json(report.matching)},
          {"longitudinal_accuracy", to_json(report.longitudinal)}};
}

std::string format_table(const TrackingReport& report) {
  std::vector<std::vector<std::string>> rows{{"subject", "matching", "longitudinal", "correct/detected/total"}};
  for (const auto& s : report.subjects) {
    rows.push_back({s.subject, fmt(s.accuracy.matching), fmt(s.accuracy.longitudinal),
                    std::to_string(s.accuracy.correct) + "/" + std::to_string(s.accuracy.detected_pairs) + "/" +
                        std::to_string(s.accuracy.total_pairs)});
  }
  rows.push_back({"mean (std)", mean_std_cell(report.matching), mean_std_cell(report.longitudinal), ""});
  return render(rows);
}

}  // namespace lesiontrack

#pragma once

#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "lesiontrack/boxes.hpp"
#include "lesiontrack/tracking.hpp"

namespace lesiontrack {

enum class MatchCriterion { Iou50, Centroid };

MatchCriterion parse_criterion(const std::string& name);
const char* to_string(MatchCriterion criterion);

/// IoU >= 0.5, or mutual centroid containment.
bool criterion_match(const BoundingBox2D& gt, const BoundingBox2D& pred, MatchCriterion criterion);

struct SetMatching {
  std::vector<std::pair<int, int>> pairs;  ///< (gt index, pred index)
  std::vector<int> unmatched_gt;
  std::vector<int> unmatched_pred;  ///< among predictions kept by the threshold
  int num_pred_kept = 0;
};

/// Greedy one-to-one matching. Predictions with confidence below
/// `conf_threshold` are dropped (missing confidence counts as 1); the rest are
/// visited in `confidence_order`, each taking the best unmatched GT it matches:
/// highest IoU under Iou50, nearest centroid under Centroid, lowest index on ties.
SetMatching match_sets(const AnnotationSet& gt, const AnnotationSet& pred, MatchCriterion criterion,
                       double conf_threshold = 0.0);

struct PrecisionRecall {
  double precision = 0;
  double recall = 0;
  double f1 = 0;
};

/// Empty GT and empty predictions give (1,1,1); predictions without GT give
/// precision 0, recall 1; no predictions against non-empty GT give zeros.
PrecisionRecall prf_from_counts(int tp, int fp, int fn);

PrecisionRecall precision_recall(const AnnotationSet& gt, const AnnotationSet& pred, MatchCriterion criterion,
                                 double conf_threshold = 0.0);

enum class ApInterpolation { AllPoint, ElevenPoint };

/// Area under the interpolated precision/recall curve obtained by using every
/// distinct prediction confidence as a threshold. Empty GT scores 1 when there
/// are no predictions and 0 otherwise.
double average_precision(const AnnotationSet& gt, const AnnotationSet& pred, MatchCriterion criterion,
                         ApInterpolation interpolation = ApInterpolation::AllPoint);

struct MeanStd {
  double mean = 0;
  double std = 0;  ///< population standard deviation
};

MeanStd mean_std(const std::vector<double>& values);

struct ScanDetection {
  std::string image;
  int tp = 0, fp = 0, fn = 0;
  PrecisionRecall prf;
  double ap = 0;
};

struct DetectionReport {
  MatchCriterion criterion = MatchCriterion::Centroid;
  double conf_threshold = 0.5;
  std::vector<ScanDetection> scans;
  MeanStd precision, recall, f1, ap;
};

/// Per-scan metrics followed by mean/std over scans. Sets are paired by image
/// name when every prediction set names a GT image, otherwise by position.
DetectionReport evaluate_detection(const std::vector<AnnotationSet>& gt, const std::vector<AnnotationSet>& pred,
                                   MatchCriterion criterion, double conf_threshold = 0.5,
                                   ApInterpolation interpolation = ApInterpolation::AllPoint);

nlohmann::json to_json(const DetectionReport& report);
std::string format_table(const DetectionReport& report);

/// Annotator g as ground truth against annotator p as predictions, counts
/// pooled over images (paired by image name), centroid criterion.
std::vector<std::vector<PrecisionRecall>> pairwise_annotator_matrix(
    const std::vector<std::vector<AnnotationSet>>& annotators);

nlohmann::json annotator_matrix_json(const std::vector<std::string>& names,
                                     const std::vector<std::vector<PrecisionRecall>>& matrix);
std::string format_annotator_table(const std::vector<std::string>& names,
                                   const std::vector<std::vector<PrecisionRecall>>& matrix);

/// For every GT box, the index of the detection it was matched to, or -1.
std::vector<int> detection_map(const AnnotationSet& gt, const AnnotationSet& detections,
                               MatchCriterion criterion = MatchCriterion::Centroid, double conf_threshold = 0.0);

/// GT box pairs across two scans sharing a track id, ordered by the first scan's index.
std::vector<std::pair<int, int>> longitudinal_pairs(const AnnotationSet& gt_t, const AnnotationSet& gt_t1);

struct TrackingAccuracy {
  double matching = 0;
  double longitudinal = 0;
  int correct = 0;
  int detected_pairs = 0;
  int total_pairs = 0;
};

/// `gt_pairs` index GT lesions; `detected_t` / `detected_t1` map GT lesions to
/// the detection indices the result refers to (-1 when missed). A GT pair is
/// correct when both endpoints were detected and the result pairs them.
TrackingAccuracy tracking_accuracy(const MatchResult& result, const std::vector<std::pair<int, int>>& gt_pairs,
                                   const std::vector<int>& detected_t, const std::vector<int>& detected_t1);

struct SubjectTracking {
  std::string subject;
  TrackingAccuracy accuracy;
};

struct TrackingReport {
  std::vector<SubjectTracking> subjects;
  MeanStd matching, longitudinal;
};

TrackingReport summarize_tracking(std::vector<SubjectTracking> subjects);
nlohmann::json to_json(const TrackingReport& report);
std::string format_table(const TrackingReport& report);

}  // namespace lesiontrack

#pragma once

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "actdet/types.hpp"

namespace actdet {

struct EvalReport {
    std::optional<double> top1;
    std::optional<double> top3;
    std::optional<double> cls_map;
    std::map<double, double> det_map;                        // delta -> mAP
    std::map<std::pair<int, double>, double> per_class_ap;   // (class, delta) -> AP
};

// Temporal intersection over union; 0 for disjoint segments, 1 iff identical.
double tiou(const Segment& a, const Segment& b);

// A ground-truth instance of one class.
struct GtInstance {
    std::string video_id;
    Segment segment;
};

// Average precision for one class at TIoU threshold delta. Detections are
// ranked by score descending (ties by video id, then start); each detection
// greedily claims the unmatched same-video ground-truth instance of highest
// TIoU when that TIoU reaches delta, otherwise it counts as a false positive.
// The precision-recall curve is integrated with all-point interpolation
// (precision replaced by the maximum precision at any recall at least as
// large). Returns 0 when gt is empty.
double detection_ap(std::vector<Detection> dets, const std::vector<GtInstance>& gt,
                    double delta);

// Mean of detection_ap over classes with at least one ground-truth instance;
// classes without ground truth are excluded from the mean. Throws when no
// class has ground truth. per_class, when given, receives every (class,
// delta) AP that entered a mean.
std::map<double, double> detection_map(
    const std::vector<Detection>& detections, const GroundTruth& gt,
    const std::vector<double>& deltas,
    std::map<std::pair<int, double>, double>* per_class = nullptr);

// Fraction of videos whose top-k scored classes intersect their ground-truth
// label set. Every video in gt must have at least one label and a score
// vector in `fused`.
double topk_accuracy(const std::map<std::string, ScoreVector>& fused,
                     const GroundTruth& gt, int k);

// Per class: rank videos by that class's score, positives are the videos
// whose ground truth contains the class; mean AP over classes with at least
// one positive. Same interpolation as detection_ap.
double classification_map(const std::map<std::string, ScoreVector>& fused,
                          const GroundTruth& gt, int class_count);

}  // namespace actdet

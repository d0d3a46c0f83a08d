#include "actdet/evaluate.hpp"

#include <algorithm>
#include <cmath>

namespace actdet {

double tiou(const Segment& a, const Segment& b) {
    const double inter = std::min(a.end, b.end) - std::max(a.start, b.start);
    if (inter <= 0.0) return 0.0;
    const double uni = std::max(a.end, b.end) - std::min(a.start, b.start);
    return inter / uni;
}

namespace {

// All-point interpolated AP from ranked hit flags: precision at each rank is
// replaced by the maximum precision at that rank or later, and each true
// positive contributes one recall step of 1/n_positives.
double interpolated_ap(const std::vector<char>& is_tp, std::size_t n_positives) {
    const std::size_t n = is_tp.size();
    if (n_positives == 0 || n == 0) return 0.0;

    std::vector<double> precision(n);
    std::size_t cum_tp = 0;
    for (std::size_t i = 0; i < n; ++i) {
        cum_tp += static_cast<std::size_t>(is_tp[i]);
        precision[i] = static_cast<double>(cum_tp) / static_cast<double>(i + 1);
    }
    for (std::size_t i = n - 1; i-- > 0;)
        precision[i] = std::max(precision[i], precision[i + 1]);

    double ap = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        if (is_tp[i]) ap += precision[i];
    return ap / static_cast<double>(n_positives);
}

void sort_detections(std::vector<Detection>& dets) {
    std::stable_sort(dets.begin(), dets.end(), [](const Detection& a, const Detection& b) {
        if (a.score != b.score) return a.score > b.score;
        if (a.video_id != b.video_id) return a.video_id < b.video_id;
        return a.segment.start < b.segment.start;
    });
}

}  // namespace

double detection_ap(std::vector<Detection> dets, const std::vector<GtInstance>& gt,
                    double delta) {
    if (!(delta > 0.0) || delta > 1.0)
        throw ValidationError("detection_ap: TIoU threshold must lie in (0, 1]");
    if (gt.empty()) return 0.0;

    sort_detections(dets);

    // Per-video ground truth, ordered by start so TIoU ties resolve to the
    // earliest instance.
    std::map<std::string, std::vector<std::size_t>> gt_by_video;
    for (std::size_t i = 0; i < gt.size(); ++i)
        gt_by_video[gt[i].video_id].push_back(i);
    for (auto& [vid, idx] : gt_by_video)
        std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
            if (gt[a].segment.start != gt[b].segment.start)
                return gt[a].segment.start < gt[b].segment.start;
            return gt[a].segment.end < gt[b].segment.end;
        });

    std::vector<char> matched(gt.size(), 0);
    std::vector<char> is_tp(dets.size(), 0);
    for (std::size_t d = 0; d < dets.size(); ++d) {
        auto it = gt_by_video.find(dets[d].video_id);
        if (it == gt_by_video.end()) continue;
        double best = 0.0;
        std::size_t best_idx = gt.size();
        for (std::size_t g : it->second) {
            if (matched[g]) continue;
            const double overlap = tiou(dets[d].segment, gt[g].segment);
            if (overlap > best) {
                best = overlap;
                best_idx = g;
            }
        }
        if (best_idx < gt.size() && best >= delta) {
            matched[best_idx] = 1;
            is_tp[d] = 1;
        }
    }

    return interpolated_ap(is_tp, gt.size());
}

std::map<double, double> detection_map(
    const std::vector<Detection>& detections, const GroundTruth& gt,
    const std::vector<double>& deltas,
    std::map<std::pair<int, double>, double>* per_class) {
    std::map<int, std::vector<GtInstance>> gt_by_class;
    for (const auto& [vid, v] : gt.videos)
        for (const auto& ann : v.annotations)
            gt_by_class[ann.class_id].push_back(GtInstance{vid, ann.segment});
    if (gt_by_class.empty())
        throw ValidationError("detection_map: no class has ground-truth instances");

    std::map<int, std::vector<Detection>> dets_by_class;
    for (const auto& d : detections) dets_by_class[d.class_id].push_back(d);

    std::map<double, double> out;
    for (double delta : deltas) {
        double sum = 0.0;
        for (const auto& [cls, instances] : gt_by_class) {
            auto it = dets_by_class.find(cls);
            const double ap = detection_ap(
                it == dets_by_class.end() ? std::vector<Detection>{} : it->second,
                instances, delta);
            sum += ap;
            if (per_class) (*per_class)[{cls, delta}] = ap;
        }
        out[delta] = sum / static_cast<double>(gt_by_class.size());
    }
    return out;
}

double topk_accuracy(const std::map<std::string, ScoreVector>& fused,
                     const GroundTruth& gt, int k) {
    if (k < 1) throw ValidationError("topk_accuracy: k must be >= 1");
    if (gt.videos.empty()) throw ValidationError("topk_accuracy: empty ground truth");

    std::size_t hits = 0;
    for (const auto& [vid, v] : gt.videos) {
        if (v.annotations.empty())
            throw ValidationError("topk_accuracy: video '" + vid + "' has no labels");
        auto it = fused.find(vid);
        if (it == fused.end())
            throw ValidationError("topk_accuracy: no scores for video '" + vid + "'");

        const auto& values = it->second.values;
        std::vector<std::size_t> rank(values.size());
        for (std::size_t i = 0; i < rank.size(); ++i) rank[i] = i;
        std::stable_sort(rank.begin(), rank.end(), [&](std::size_t a, std::size_t b) {
            return values[a] > values[b];
        });

        const std::size_t take = std::min<std::size_t>(k, rank.size());
        bool hit = false;
        for (std::size_t i = 0; i < take && !hit; ++i)
            for (const auto& ann : v.annotations)
                if (ann.class_id == static_cast<int>(rank[i])) {
                    hit = true;
                    break;
                }
        hits += static_cast<std::size_t>(hit);
    }
    return static_cast<double>(hits) / static_cast<double>(gt.videos.size());
}

double classification_map(const std::map<std::string, ScoreVector>& fused,
                          const GroundTruth& gt, int class_count) {
    if (class_count < 1)
        throw ValidationError("classification_map: class_count must be >= 1");
    for (const auto& [vid, v] : gt.videos)
        if (!fused.count(vid))
            throw ValidationError("classification_map: no scores for video '" + vid + "'");

    double sum = 0.0;
    int evaluated = 0;
    for (int cls = 0; cls < class_count; ++cls) {
        // Rank every scored video by this class's score.
        std::vector<const ScoreVector*> ranked;
        ranked.reserve(fused.size());
        for (const auto& [vid, sv] : fused) {
            if (cls >= static_cast<int>(sv.values.size()))
                throw ValidationError("classification_map: score vector for '" + vid +
                                      "' is shorter than class_count");
            ranked.push_back(&sv);
        }
        std::stable_sort(ranked.begin(), ranked.end(),
                         [cls](const ScoreVector* a, const ScoreVector* b) {
                             if (a->values[cls] != b->values[cls])
                                 return a->values[cls] > b->values[cls];
                             return a->video_id < b->video_id;
                         });

        std::size_t positives = 0;
        std::vector<char> is_tp(ranked.size(), 0);
        for (std::size_t i = 0; i < ranked.size(); ++i) {
            auto it = gt.videos.find(ranked[i]->video_id);
            if (it == gt.videos.end()) continue;
            for (const auto& ann : it->second.annotations)
                if (ann.class_id == cls) {
                    is_tp[i] = 1;
                    ++positives;
                    break;
                }
        }
        if (positives == 0) continue;  // class absent from this corpus
        sum += interpolated_ap(is_tp, positives);
        ++evaluated;
    }
    if (evaluated == 0)
        throw ValidationError("classification_map: no class has a positive video");
    return sum / static_cast<double>(evaluated);
}

}  // namespace actdet

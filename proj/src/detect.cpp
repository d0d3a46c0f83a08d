#include "actdet/detect.hpp"

#include <algorithm>
#include <numeric>

namespace actdet {

void DetectConfig::validate() const {
    if (n_classes < 1) throw ValidationError("detect config: n_classes must be >= 1");
    if (n_proposals < 1) throw ValidationError("detect config: n_proposals must be >= 1");
}

std::vector<Detection> assemble_detections(const ScoreVector& fused,
                                           const std::vector<Proposal>& proposals,
                                           const DetectConfig& cfg) {
    cfg.validate();
    if (fused.values.empty())
        throw ValidationError("assemble_detections: empty fused score vector");
    if (proposals.empty()) return {};

    // Rank classes by fused score; equal scores keep ascending class order.
    std::vector<std::size_t> class_rank(fused.values.size());
    std::iota(class_rank.begin(), class_rank.end(), std::size_t{0});
    std::stable_sort(class_rank.begin(), class_rank.end(),
                     [&](std::size_t a, std::size_t b) {
                         return fused.values[a] > fused.values[b];
                     });

    const std::size_t use_classes =
        std::min<std::size_t>(cfg.n_classes, class_rank.size());
    const std::size_t use_proposals =
        std::min<std::size_t>(cfg.n_proposals, proposals.size());

    struct Ranked {
        Detection det;
        std::size_t class_rank;
        std::size_t proposal_rank;
    };
    std::vector<Ranked> ranked;
    ranked.reserve(use_classes * use_proposals);
    for (std::size_t ci = 0; ci < use_classes; ++ci) {
        const std::size_t c = class_rank[ci];
        for (std::size_t pi = 0; pi < use_proposals; ++pi) {
            const Proposal& p = proposals[pi];
            Detection d{fused.video_id, static_cast<int>(c), p.segment,
                        fused.values[c] * p.score};
            ranked.push_back(Ranked{std::move(d), ci, pi});
        }
    }

    std::stable_sort(ranked.begin(), ranked.end(), [](const Ranked& a, const Ranked& b) {
        if (a.det.score != b.det.score) return a.det.score > b.det.score;
        if (a.class_rank != b.class_rank) return a.class_rank < b.class_rank;
        return a.proposal_rank < b.proposal_rank;
    });

    std::vector<Detection> out;
    out.reserve(ranked.size());
    for (auto& r : ranked) out.push_back(std::move(r.det));
    return out;
}

}  // namespace actdet

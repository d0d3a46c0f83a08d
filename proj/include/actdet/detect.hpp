#pragma once

#include <vector>

#include "actdet/types.hpp"

namespace actdet {

struct DetectConfig {
    int n_classes = 1;    // top classes per video
    int n_proposals = 2;  // top proposals per class

    void validate() const;
};

// For each of the video's top n_classes fused classes and each of the top
// n_proposals proposals, emits a detection scored by the product of the
// fused class score and the proposal score. Output is sorted by score
// descending; ties resolve by (class rank, proposal rank). Empty proposals
// yield an empty result (a video may contain no activity).
std::vector<Detection> assemble_detections(const ScoreVector& fused,
                                           const std::vector<Proposal>& proposals,
                                           const DetectConfig& cfg);

}  // namespace actdet

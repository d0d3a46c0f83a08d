#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "actdet/types.hpp"

namespace actdet {

struct SegmenterConfig {
    double lambda = 1.0;  // scale of the pairwise term
    double alpha = 0.3;   // per-switch penalty; only the product lambda*alpha acts
    int min_proposal_frames = 2;
    int max_proposals = 2;

    double gamma() const { return lambda * alpha; }
    void validate() const;
};

// Energy of a binary labeling: sum of unaries minus gamma per label switch,
// with u(t,1) = s_t and u(t,0) = 1 - s_t. Accumulated strictly in time order
// (unary, then switch penalty, then next unary) so the DP below reproduces it
// bit for bit; the brute-force test oracle shares this function.
double labeling_energy(std::span<const std::uint8_t> labels,
                       std::span<const double> scores, double gamma);

// Exact maximization of labeling_energy over all 2^T labelings via a
// two-state forward recursion with backpointers; O(T) time and memory.
// Ties at any decision point resolve toward label 0.
Labeling dp_segment(const FrameScoreTrack& track, const SegmenterConfig& cfg);

// One proposal per maximal run of 1-labels of length >= min_proposal_frames,
// scored with the mean frame score of the run, sorted by score descending
// (earlier start wins ties) and truncated to max_proposals.
std::vector<Proposal> extract_proposals(const Labeling& labeling,
                                        const FrameScoreTrack& track,
                                        const SegmenterConfig& cfg);

// dp_segment followed by extract_proposals.
std::vector<Proposal> propose(const FrameScoreTrack& track, const SegmenterConfig& cfg);

}  // namespace actdet

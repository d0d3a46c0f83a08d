#include "actdet/segment.hpp"

#include <algorithm>
#include <cmath>

namespace actdet {

void SegmenterConfig::validate() const {
    if (!(lambda >= 0.0) || !(alpha >= 0.0))
        throw ValidationError("segmenter config: lambda and alpha must be >= 0");
    if (min_proposal_frames < 1)
        throw ValidationError("segmenter config: min_proposal_frames must be >= 1");
    if (max_proposals < 1)
        throw ValidationError("segmenter config: max_proposals must be >= 1");
}

namespace {

inline double unary(double score, std::uint8_t label) {
    return label ? score : 1.0 - score;
}

}  // namespace

double labeling_energy(std::span<const std::uint8_t> labels,
                       std::span<const double> scores, double gamma) {
    if (labels.size() != scores.size() || labels.empty())
        throw ValidationError("labeling_energy: labeling length does not match track");
    double energy = unary(scores[0], labels[0]);
    for (std::size_t t = 1; t < labels.size(); ++t) {
        if (labels[t] != labels[t - 1]) energy -= gamma;
        energy += unary(scores[t], labels[t]);
    }
    return energy;
}

Labeling dp_segment(const FrameScoreTrack& track, const SegmenterConfig& cfg) {
    cfg.validate();
    const auto& s = track.scores;
    const std::size_t T = s.size();
    const double gamma = cfg.gamma();

    // best[l] after frame t is the exact energy of the best prefix labeling
    // ending in label l, computed with the same operation order as
    // labeling_energy. prev[t][l] records the chosen predecessor label.
    double best0 = unary(s[0], 0);
    double best1 = unary(s[0], 1);
    std::vector<std::uint8_t> prev0(T), prev1(T);

    for (std::size_t t = 1; t < T; ++t) {
        const double stay0 = best0;
        const double switch0 = best1 - gamma;
        // Ties resolve toward predecessor label 0.
        const double base0 = (stay0 >= switch0) ? stay0 : switch0;
        prev0[t] = (stay0 >= switch0) ? 0 : 1;

        const double stay1 = best1;
        const double switch1 = best0 - gamma;
        const double base1 = (switch1 >= stay1) ? switch1 : stay1;
        prev1[t] = (switch1 >= stay1) ? 0 : 1;

        best0 = base0 + unary(s[t], 0);
        best1 = base1 + unary(s[t], 1);
    }

    Labeling out;
    out.labels.resize(T);
    std::uint8_t label = (best0 >= best1) ? 0 : 1;
    for (std::size_t t = T; t-- > 0;) {
        out.labels[t] = label;
        if (t > 0) label = label ? prev1[t] : prev0[t];
    }
    out.energy = labeling_energy(out.labels, s, gamma);
    return out;
}

std::vector<Proposal> extract_proposals(const Labeling& labeling,
                                        const FrameScoreTrack& track,
                                        const SegmenterConfig& cfg) {
    cfg.validate();
    const auto& labels = labeling.labels;
    const auto& s = track.scores;
    if (labels.size() != s.size())
        throw ValidationError("extract_proposals: labeling length does not match track");

    std::vector<Proposal> proposals;
    std::size_t t = 0;
    while (t < labels.size()) {
        if (!labels[t]) {
            ++t;
            continue;
        }
        const std::size_t first = t;
        double sum = 0.0;
        while (t < labels.size() && labels[t]) {
            sum += s[t];
            ++t;
        }
        const std::size_t last = t - 1;
        const std::size_t run = last - first + 1;
        if (run < static_cast<std::size_t>(cfg.min_proposal_frames)) continue;
        Proposal p;
        p.segment = frames_to_segment(first, last, track.fps);
        p.score = sum / static_cast<double>(run);
        p.first_frame = first;
        p.last_frame = last;
        proposals.push_back(p);
    }

    std::stable_sort(proposals.begin(), proposals.end(),
                     [](const Proposal& a, const Proposal& b) {
                         if (a.score != b.score) return a.score > b.score;
                         return a.first_frame < b.first_frame;
                     });
    if (proposals.size() > static_cast<std::size_t>(cfg.max_proposals))
        proposals.resize(cfg.max_proposals);
    return proposals;
}

std::vector<Proposal> propose(const FrameScoreTrack& track, const SegmenterConfig& cfg) {
    return extract_proposals(dp_segment(track, cfg), track, cfg);
}

}  // namespace actdet

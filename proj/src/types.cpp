#include "actdet/types.hpp"

#include <algorithm>

namespace actdet {

const char* to_string(ScoreKind kind) {
    switch (kind) {
        case ScoreKind::ins: return "ins";
        case ScoreKind::mbh: return "mbh";
        case ScoreKind::c3d: return "c3d";
        case ScoreKind::stacked: return "stacked";
        case ScoreKind::fused: return "fused";
    }
    return "unknown";
}

ScoreKind score_kind_from_string(const std::string& name) {
    if (name == "ins") return ScoreKind::ins;
    if (name == "mbh") return ScoreKind::mbh;
    if (name == "c3d") return ScoreKind::c3d;
    if (name == "stacked") return ScoreKind::stacked;
    if (name == "fused") return ScoreKind::fused;
    throw ValidationError("unknown score kind: " + name);
}

ScoreVector::ScoreVector(std::string id, std::vector<double> vals, ScoreKind k)
    : video_id(std::move(id)), values(std::move(vals)), kind(k) {
    if (values.empty())
        throw ValidationError("score vector for '" + video_id + "' is empty");
    for (double v : values)
        if (!std::isfinite(v))
            throw ValidationError("non-finite score in vector for '" + video_id + "'");
}

FrameScoreTrack::FrameScoreTrack(std::string id, std::vector<double> s, double rate)
    : video_id(std::move(id)), scores(std::move(s)), fps(rate) {
    if (scores.empty())
        throw ValidationError("frame score track for '" + video_id + "' is empty");
    if (!(fps > 0.0))
        throw ValidationError("frame score track for '" + video_id + "' has non-positive fps");
    for (double v : scores)
        if (!std::isfinite(v) || v < 0.0 || v > 1.0)
            throw ValidationError("frame score outside [0,1] in track for '" + video_id + "'");
}

FeatureMatrix::FeatureMatrix(std::string id, std::size_t r, std::size_t c,
                             std::vector<double> d)
    : video_id(std::move(id)), rows(r), cols(c), data(std::move(d)) {
    if (rows < 1 || cols < 1)
        throw ValidationError("feature matrix for '" + video_id + "' must be at least 1x1");
    if (data.size() != rows * cols)
        throw ValidationError("feature matrix for '" + video_id + "' has inconsistent size");
    for (double v : data)
        if (!std::isfinite(v))
            throw ValidationError("non-finite value in feature matrix for '" + video_id + "'");
}

Segment::Segment(double s, double e) : start(s), end(e) {
    if (!std::isfinite(start) || !std::isfinite(end))
        throw ValidationError("segment bounds must be finite");
    if (start < 0.0 || !(start < end))
        throw ValidationError("segment requires 0 <= start < end");
}

int label_id(const LabelTable& table, const std::string& label) {
    auto it = std::lower_bound(table.begin(), table.end(), label);
    if (it == table.end() || *it != label) return -1;
    return static_cast<int>(it - table.begin());
}

Segment frames_to_segment(std::size_t first, std::size_t last, double fps) {
    return Segment(frame_start_seconds(first, fps), frame_end_seconds(last, fps));
}

}  // namespace actdet

#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace actdet {

// Bad input from the outside world: unreadable files, malformed JSON/CSV,
// broken configuration. CLI maps this to exit code 2.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Data that violates a documented invariant (scores out of range, dimension
// mismatches, degenerate inputs). CLI maps this to exit code 1.
struct ValidationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Which stage of the score pipeline a vector belongs to. The first three are
// the per-modality one-vs-rest SVM scores, `stacked` is their concatenation
// (and the meta classifier's raw output), `fused` is the top-k normalised
// final vector.
enum class ScoreKind { ins, mbh, c3d, stacked, fused };

const char* to_string(ScoreKind kind);
ScoreKind score_kind_from_string(const std::string& name);

// Per-class real-valued classifier scores for one video.
struct ScoreVector {
    std::string video_id;
    std::vector<double> values;
    ScoreKind kind = ScoreKind::ins;

    ScoreVector() = default;
    ScoreVector(std::string video_id, std::vector<double> values, ScoreKind kind);
};

// Binary-classifier positive scores s_t for the frames of one video, sampled
// at a fixed rate. Every score lies in [0,1].
struct FrameScoreTrack {
    std::string video_id;
    std::vector<double> scores;
    double fps = 2.0;

    FrameScoreTrack() = default;
    FrameScoreTrack(std::string video_id, std::vector<double> scores, double fps);

    std::size_t frame_count() const { return scores.size(); }
};

// Dense row-major matrix of per-frame features (or a single row for
// video-level features). All entries finite.
struct FeatureMatrix {
    std::string video_id;
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    FeatureMatrix() = default;
    FeatureMatrix(std::string video_id, std::size_t rows, std::size_t cols,
                  std::vector<double> data);

    const double* row(std::size_t r) const { return data.data() + r * cols; }
    double at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
};

// Temporal interval in seconds, 0 <= start < end.
struct Segment {
    double start = 0.0;
    double end = 0.0;

    Segment() = default;
    Segment(double start, double end);

    double length() const { return end - start; }
};

// A candidate activity interval: a maximal run of positive frame labels,
// scored with the mean of its frame scores.
struct Proposal {
    Segment segment;
    double score = 0.0;              // mean frame score over the run
    std::size_t first_frame = 0;     // inclusive
    std::size_t last_frame = 0;      // inclusive
};

// A labeled, scored temporal detection for one video.
struct Detection {
    std::string video_id;
    int class_id = 0;
    Segment segment;
    double score = 0.0;
};

struct Annotation {
    int class_id = 0;
    Segment segment;
};

struct VideoGroundTruth {
    double duration = 0.0;
    std::string subset = "validation";
    std::vector<Annotation> annotations;
};

struct GroundTruth {
    std::map<std::string, VideoGroundTruth> videos;
};

// class_id -> label string; ids are assigned by lexicographic label order.
using LabelTable = std::vector<std::string>;

// Index of `label` in the table, or -1 when absent.
int label_id(const LabelTable& table, const std::string& label);

// A binary frame labeling together with its achieved segmentation energy.
struct Labeling {
    std::vector<std::uint8_t> labels;
    double energy = 0.0;
};

// Frame/seconds conventions: frame t of a track at rate fps covers the
// half-open interval [t/fps, (t+1)/fps). A run of frames [first, last]
// therefore spans [first/fps, (last+1)/fps) seconds.
inline double frame_start_seconds(std::size_t frame, double fps) {
    return static_cast<double>(frame) / fps;
}

inline double frame_end_seconds(std::size_t frame, double fps) {
    return static_cast<double>(frame + 1) / fps;
}

Segment frames_to_segment(std::size_t first, std::size_t last, double fps);

// True when the frame's whole span lies inside the segment.
inline bool frame_inside(std::size_t frame, const Segment& seg, double fps) {
    return frame_start_seconds(frame, fps) >= seg.start &&
           frame_end_seconds(frame, fps) <= seg.end;
}

}  // namespace actdet

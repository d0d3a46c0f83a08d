#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>

#include "actdet/types.hpp"

namespace actdet {

struct SynthConfig {
    int n_videos = 50;
    int n_classes = 5;
    double duration_min = 20.0;  // seconds
    double duration_max = 40.0;
    int segments_min = 1;  // activity instances per video
    int segments_max = 2;
    double segment_len_min = 3.0;  // seconds
    double segment_len_max = 8.0;
    double fps = 2.0;
    double in_score_mean = 0.85;
    double out_score_mean = 0.15;
    double score_sigma = 0.05;
    int feature_dim = 16;
    double feature_noise_sigma = 0.05;
    std::uint64_t seed = 7;

    void validate() const;
};

struct Corpus {
    GroundTruth gt;
    LabelTable labels;
    std::map<std::string, FrameScoreTrack> tracks;
    std::map<std::string, FeatureMatrix> features;
};

// The frame-score construction used by the generators: one frame per
// 1/fps seconds (at least one), Gaussian noise around in_mean for frames
// whose span lies inside a segment and around out_mean elsewhere, clipped
// to [0,1]. sigma == 0 yields an exactly two-valued track.
std::vector<double> synth_track_scores(double duration, double fps,
                                       const std::vector<Segment>& segments,
                                       double in_mean, double out_mean, double sigma,
                                       std::uint64_t seed);

// One synthetic video per index: a class and duration are drawn, ground-truth
// segments are placed without overlap (at least 1 s apart) by rejection
// sampling, frame scores are Gaussian around in/out means clipped to [0,1],
// and the video feature is the class's one-hot prototype plus noise.
// Per-video seeds derive from the master seed, so output is reproducible and
// order-independent.
Corpus generate_corpus(const SynthConfig& cfg);

// A single video reproducing the known failure mode: two ground-truth
// instances but in-mean scores across the whole duration, so segmentation
// cannot separate them.
Corpus saturated_video(const SynthConfig& cfg);

// Writes gt.json, manifest.json (video features), tracks_manifest.json
// (frame-score tracks) and the per-video CSVs under out_dir.
void write_corpus(const Corpus& corpus, const SynthConfig& cfg,
                  const std::filesystem::path& out_dir);

SynthConfig synth_config_from_file(const std::filesystem::path& path);

}  // namespace actdet

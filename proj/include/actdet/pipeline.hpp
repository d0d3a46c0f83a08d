#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "actdet/classify.hpp"
#include "actdet/detect.hpp"
#include "actdet/evaluate.hpp"
#include "actdet/segment.hpp"
#include "actdet/types.hpp"

namespace actdet {

struct PipelineConfig {
    std::filesystem::path gt;
    std::filesystem::path features_manifest;
    std::filesystem::path tracks_manifest;
    std::filesystem::path model_dir = "models";
    std::filesystem::path results_dir = "results";
    TrainConfig train;
    SegmenterConfig segmenter;
    DetectConfig detect;
    std::vector<double> tiou_thresholds = {0.1, 0.2, 0.3, 0.4, 0.5};
    int topk = 3;

    // JSON config; relative paths resolve against the config file's directory.
    static PipelineConfig from_file(const std::filesystem::path& path);
};

// The trained model set the detect/score stages consume.
struct Models {
    LinearSvmModel ins;
    LinearSvmModel mbh;
    LinearSvmModel c3d;
    LinearSvmModel meta;
    RandomForestModel rf;
};

Models load_models(const std::filesystem::path& model_dir);

// Pools the video's features, scores the three base classifiers, stacks,
// applies the meta classifier and top-k normalizes.
ScoreVector fuse_video_scores(const Models& models, const FeatureMatrix& features,
                              const std::string& video_id, int k);

// Trains the three base one-vs-rest SVMs, the meta SVM on stacked scores and
// the frame random forest; writes them under model_dir and logs training
// accuracy per model.
void cmd_train(const PipelineConfig& cfg, std::ostream& log);

// Writes per-video fused score vectors to results_dir/scores.json.
void cmd_score(const PipelineConfig& cfg, std::ostream& log);

// Runs segmentation on raw score tracks and writes one JSON object per
// proposal to `out` (JSON lines).
void cmd_propose(const PipelineConfig& cfg, const std::filesystem::path& out,
                 std::ostream& log);

// Full detection pass: fused classification, forest-rescored tracks, DP
// proposals, assembled detections; writes results_dir/results.json.
void cmd_detect(const PipelineConfig& cfg, std::ostream& log);

// Classification metrics (TOP-1 / TOP-3 / mAP) from a scores file against
// the ground truth; prints the table and writes the report JSON. Empty paths
// default to results_dir/scores.json and results_dir/eval_cls.json.
EvalReport cmd_eval_cls(const PipelineConfig& cfg, std::ostream& log,
                        std::filesystem::path scores_file = {},
                        std::filesystem::path report_file = {});

// Detection mAP at each configured TIoU threshold from a results file;
// prints the table and writes the report JSON. Empty paths default to
// results_dir/results.json and results_dir/eval_det.json.
EvalReport cmd_eval_det(const PipelineConfig& cfg, std::ostream& log,
                        std::filesystem::path results_file = {},
                        std::filesystem::path report_file = {});

// Renders the timeline plot for one video to `svg` plus a CSV sidecar that
// swaps the extension for .csv.
void cmd_plot(const PipelineConfig& cfg, const std::string& video_id,
              const std::filesystem::path& svg, std::ostream& log);

// Reader for the scores.json written by cmd_score.
std::map<std::string, ScoreVector> load_fused_scores(const std::filesystem::path& path,
                                                     LabelTable* labels = nullptr);

}  // namespace actdet

#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "actdet/types.hpp"

namespace actdet {

struct GroundTruthFile {
    GroundTruth gt;
    LabelTable labels;
};

// Ground truth JSON:
//   {"database": {"<vid>": {"duration": s, "subset": "...",
//                           "annotations": [{"label": "...", "segment": [a,b]}]}}}
// Labels are interned to contiguous ids in lexicographic order.
GroundTruthFile load_ground_truth(const std::filesystem::path& path);
void write_ground_truth(const GroundTruth& gt, const LabelTable& labels,
                        const std::filesystem::path& path);

// Headerless CSV, one frame per row, comma-separated reals. Rejects ragged
// rows and non-finite cells (error names the 0-based row/col).
FeatureMatrix load_feature_matrix(const std::filesystem::path& path);
void write_feature_matrix(const FeatureMatrix& m, const std::filesystem::path& path);

struct ManifestEntry {
    std::string path;  // relative paths resolve against the manifest directory
    double fps = 2.0;
    double duration = 0.0;
};

// Manifest JSON: {"<vid>": {"path": "...", "fps": r, "duration": s}}
std::map<std::string, ManifestEntry> load_manifest(const std::filesystem::path& path);
void write_manifest(const std::map<std::string, ManifestEntry>& entries,
                    const std::filesystem::path& path);

std::map<std::string, FeatureMatrix> load_features(const std::filesystem::path& manifest_path);

// Loads single-column score CSVs referenced by a manifest into tracks.
std::map<std::string, FrameScoreTrack> load_tracks(const std::filesystem::path& manifest_path);

// Results JSON in submission form, keys in the order version/results/external_data,
// numbers rounded to at most 6 fractional digits:
//   {"version": "1.0",
//    "results": {"<vid>": [{"label": "...", "score": s, "segment": [a,b]}]},
//    "external_data": {}}
void save_detections(const std::vector<Detection>& detections, const LabelTable& labels,
                     const std::filesystem::path& path);
std::vector<Detection> load_detections(const std::filesystem::path& path,
                                       const LabelTable& labels);

// Write-temp-then-rename so partially written files are never observed.
void atomic_write_text(const std::filesystem::path& path, const std::string& text);

// Round to 6 fractional digits, ties away from zero.
double round6(double v);

}  // namespace actdet

#pragma once

#include <filesystem>
#include <vector>

#include "actdet/types.hpp"

namespace actdet {

// Inputs for one video's timeline plot.
struct PlotData {
    std::string video_id;
    double duration = 0.0;
    FrameScoreTrack track;
    std::vector<Annotation> ground_truth;
    std::vector<Proposal> proposals;
};

// Writes a standalone SVG showing ground-truth occupancy (blue steps), the
// frame-score polyline (red) and the piecewise-constant proposals (green
// plateaus at their score), with a legend and a seconds axis. A CSV sidecar
// with columns time,gt,score,proposal gets one row per frame.
void render_plot(const PlotData& data, const std::filesystem::path& svg_path,
                 const std::filesystem::path& csv_path);

}  // namespace actdet

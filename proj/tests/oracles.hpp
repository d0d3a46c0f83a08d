// Independent reference implementations used by the unit and acceptance
// suites. These deliberately avoid the library's code paths: the DP oracle
// enumerates every labeling, and the AP oracle rebuilds the precision-recall
// curve by re-matching each ranked prefix from scratch.
#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <unistd.h>
#include <vector>

#include "actdet/evaluate.hpp"
#include "actdet/segment.hpp"
#include "actdet/types.hpp"

namespace oracles {

struct BruteForceResult {
    double energy = 0.0;
    std::vector<std::vector<std::uint8_t>> argmax;  // every labeling achieving it
};

// Exhaustive maximum of the segmentation energy over all 2^T labelings,
// scored with the library's shared energy evaluator.
inline BruteForceResult brute_force_segment(const std::vector<double>& scores,
                                            double gamma) {
    const std::size_t T = scores.size();
    BruteForceResult best;
    std::vector<std::uint8_t> labels(T);
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << T); ++mask) {
        for (std::size_t t = 0; t < T; ++t) labels[t] = (mask >> t) & 1;
        const double e = actdet::labeling_energy(labels, scores, gamma);
        if (best.argmax.empty() || e > best.energy) {
            best.energy = e;
            best.argmax.clear();
            best.argmax.push_back(labels);
        } else if (e == best.energy) {
            best.argmax.push_back(labels);
        }
    }
    return best;
}

inline std::size_t count_switches(const std::vector<std::uint8_t>& labels) {
    std::size_t n = 0;
    for (std::size_t t = 1; t < labels.size(); ++t) n += labels[t] != labels[t - 1];
    return n;
}

// Reference AP: rank detections, then for every prefix length recompute the
// greedy matching from scratch to get a (recall, precision) point, and
// integrate the all-point interpolated curve over recall levels.
inline double brute_force_ap(std::vector<actdet::Detection> dets,
                             const std::vector<actdet::GtInstance>& gt, double delta) {
    if (gt.empty()) return 0.0;
    std::stable_sort(dets.begin(), dets.end(),
                     [](const actdet::Detection& a, const actdet::Detection& b) {
                         if (a.score != b.score) return a.score > b.score;
                         if (a.video_id != b.video_id) return a.video_id < b.video_id;
                         return a.segment.start < b.segment.start;
                     });

    auto match_prefix = [&](std::size_t prefix) {
        std::vector<bool> used(gt.size(), false);
        std::size_t tp = 0;
        for (std::size_t d = 0; d < prefix; ++d) {
            double best = 0.0;
            std::size_t best_g = gt.size();
            for (std::size_t g = 0; g < gt.size(); ++g) {
                if (used[g] || gt[g].video_id != dets[d].video_id) continue;
                const double o = actdet::tiou(dets[d].segment, gt[g].segment);
                // Earliest-start instance wins ties, matching a stable scan
                // over instances sorted by start.
                const bool earlier =
                    best_g < gt.size() &&
                    (gt[g].segment.start < gt[best_g].segment.start ||
                     (gt[g].segment.start == gt[best_g].segment.start &&
                      gt[g].segment.end < gt[best_g].segment.end));
                if (o > best || (o == best && o > 0.0 && earlier)) {
                    best = o;
                    best_g = g;
                }
            }
            if (best_g < gt.size() && best >= delta) {
                used[best_g] = true;
                ++tp;
            }
        }
        return tp;
    };

    struct PrPoint {
        double recall;
        double precision;
    };
    std::vector<PrPoint> curve;
    for (std::size_t prefix = 1; prefix <= dets.size(); ++prefix) {
        const std::size_t tp = match_prefix(prefix);
        curve.push_back(PrPoint{static_cast<double>(tp) / static_cast<double>(gt.size()),
                                static_cast<double>(tp) / static_cast<double>(prefix)});
    }

    double ap = 0.0;
    double prev_recall = 0.0;
    for (const auto& point : curve) {
        if (point.recall <= prev_recall) continue;
        double interp = 0.0;
        for (const auto& other : curve)
            if (other.recall >= point.recall) interp = std::max(interp, other.precision);
        ap += (point.recall - prev_recall) * interp;
        prev_recall = point.recall;
    }
    return ap;
}

// Minimal XML well-formedness check: tags balance, attributes are quoted.
inline bool xml_well_formed(const std::string& text) {
    std::vector<std::string> stack;
    std::size_t i = 0;
    while (i < text.size()) {
        if (text[i] != '<') {
            ++i;
            continue;
        }
        std::size_t close = text.find('>', i);
        if (close == std::string::npos) return false;
        std::string tag = text.substr(i + 1, close - i - 1);
        i = close + 1;
        if (tag.empty()) return false;
        if (tag[0] == '?' || tag[0] == '!') continue;  // declaration / comment
        // Quotes must pair up inside the tag.
        if (std::count(tag.begin(), tag.end(), '"') % 2 != 0) return false;
        if (tag[0] == '/') {
            if (stack.empty()) return false;
            if (stack.back() != tag.substr(1)) return false;
            stack.pop_back();
            continue;
        }
        const bool self_closing = tag.back() == '/';
        if (self_closing) tag.pop_back();
        const std::string name = tag.substr(0, tag.find_first_of(" \t\n"));
        if (name.empty()) return false;
        if (!self_closing) stack.push_back(name);
    }
    return stack.empty();
}

inline std::filesystem::path fresh_dir(const std::string& name) {
    const auto dir = std::filesystem::temp_directory_path() /
                     ("actdet_test_" + name + "_" + std::to_string(::getpid()));
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

inline std::string slurp(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

}  // namespace oracles

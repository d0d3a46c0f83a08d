#include "actdet/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include <json.hpp>

#include "actdet/io.hpp"
#include "actdet/random.hpp"

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

namespace actdet {

void SynthConfig::validate() const {
    if (n_videos < 1) throw ValidationError("synth config: n_videos must be >= 1");
    if (n_classes < 2) throw ValidationError("synth config: n_classes must be >= 2");
    if (!(duration_min > 0.0) || duration_max < duration_min)
        throw ValidationError("synth config: invalid duration range");
    if (segments_min < 0 || segments_max < segments_min)
        throw ValidationError("synth config: invalid segments_per_video range");
    if (!(segment_len_min > 0.0) || segment_len_max < segment_len_min)
        throw ValidationError("synth config: invalid segment length range");
    if (!(fps > 0.0)) throw ValidationError("synth config: fps must be > 0");
    if (!(0.0 <= out_score_mean && out_score_mean < in_score_mean && in_score_mean <= 1.0))
        throw ValidationError("synth config: need 0 <= out_score_mean < in_score_mean <= 1");
    if (score_sigma < 0.0) throw ValidationError("synth config: score_sigma must be >= 0");
    if (feature_dim < n_classes)
        throw ValidationError("synth config: feature_dim must be >= n_classes");
    if (feature_noise_sigma < 0.0)
        throw ValidationError("synth config: feature_noise_sigma must be >= 0");
}

namespace {

std::string video_name(int index) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "v%03d", index);
    return buf;
}

std::string class_name(int index) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "act_%02d", index);
    return buf;
}

double clip01(double v) { return std::min(1.0, std::max(0.0, v)); }

// Non-overlapping segments at least 1 s apart, by whole-set rejection.
std::vector<Segment> place_segments(int count, double duration, double len_min,
                                    double len_max, std::mt19937_64& rng) {
    if (count == 0) return {};
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int attempt = 0; attempt < 1000; ++attempt) {
        std::vector<Segment> segs;
        bool ok = true;
        for (int i = 0; i < count && ok; ++i) {
            const double len =
                std::min(len_min + (len_max - len_min) * unit(rng), duration * 0.9);
            const double start = (duration - len) * unit(rng);
            Segment cand(start, start + len);
            for (const auto& s : segs)
                if (cand.start < s.end + 1.0 && s.start < cand.end + 1.0) {
                    ok = false;
                    break;
                }
            if (ok) segs.push_back(cand);
        }
        if (ok) {
            std::sort(segs.begin(), segs.end(),
                      [](const Segment& a, const Segment& b) { return a.start < b.start; });
            return segs;
        }
    }
    throw ValidationError(
        "synth: could not place " + std::to_string(count) +
        " non-overlapping segments after 1000 attempts; loosen the duration or "
        "segment length configuration");
}

std::vector<double> track_scores_impl(double duration, double fps,
                                      const std::vector<Segment>& segments,
                                      double in_mean, double out_mean, double sigma,
                                      std::mt19937_64& rng) {
    const std::size_t frames =
        std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(duration * fps)));
    std::vector<double> scores(frames);
    for (std::size_t t = 0; t < frames; ++t) {
        bool inside = false;
        for (const auto& s : segments)
            if (frame_inside(t, s, fps)) {
                inside = true;
                break;
            }
        const double mean = inside ? in_mean : out_mean;
        scores[t] = clip01(mean + sigma * standard_normal(rng));
    }
    return scores;
}

std::vector<double> make_features(int cls, int dim, double noise_sigma,
                                  std::mt19937_64& rng) {
    std::vector<double> x(dim, 0.0);
    x[cls] = 1.0;
    for (double& v : x) v += noise_sigma * standard_normal(rng);
    return x;
}

}  // namespace

std::vector<double> synth_track_scores(double duration, double fps,
                                       const std::vector<Segment>& segments,
                                       double in_mean, double out_mean, double sigma,
                                       std::uint64_t seed) {
    auto rng = make_rng(seed, 0);
    return track_scores_impl(duration, fps, segments, in_mean, out_mean, sigma, rng);
}

Corpus generate_corpus(const SynthConfig& cfg) {
    cfg.validate();
    Corpus corpus;
    for (int c = 0; c < cfg.n_classes; ++c) corpus.labels.push_back(class_name(c));

    for (int v = 0; v < cfg.n_videos; ++v) {
        auto rng = make_rng(cfg.seed, static_cast<std::uint64_t>(v));
        const std::string vid = video_name(v);

        std::uniform_int_distribution<int> class_pick(0, cfg.n_classes - 1);
        std::uniform_int_distribution<int> seg_count_pick(cfg.segments_min, cfg.segments_max);
        const int cls = class_pick(rng);
        std::uniform_real_distribution<double> dur_pick(cfg.duration_min, cfg.duration_max);
        const double duration = dur_pick(rng);
        const int n_segments = seg_count_pick(rng);

        std::vector<Segment> segments = place_segments(
            n_segments, duration, cfg.segment_len_min, cfg.segment_len_max, rng);

        VideoGroundTruth gt_video;
        gt_video.duration = duration;
        for (const auto& s : segments) gt_video.annotations.push_back(Annotation{cls, s});
        corpus.gt.videos.emplace(vid, std::move(gt_video));

        corpus.tracks.emplace(
            vid, FrameScoreTrack(vid,
                                 track_scores_impl(duration, cfg.fps, segments,
                                                   cfg.in_score_mean, cfg.out_score_mean,
                                                   cfg.score_sigma, rng),
                                 cfg.fps));

        std::vector<double> feat =
            make_features(cls, cfg.feature_dim, cfg.feature_noise_sigma, rng);
        corpus.features.emplace(
            vid, FeatureMatrix(vid, 1, cfg.feature_dim, std::move(feat)));
    }
    return corpus;
}

Corpus saturated_video(const SynthConfig& cfg) {
    cfg.validate();
    Corpus corpus;
    for (int c = 0; c < cfg.n_classes; ++c) corpus.labels.push_back(class_name(c));

    auto rng = make_rng(cfg.seed, 0x5a7'0000);
    const std::string vid = "v_saturated";
    const double duration = 0.5 * (cfg.duration_min + cfg.duration_max);
    const int cls = std::uniform_int_distribution<int>(0, cfg.n_classes - 1)(rng);

    // Two well-separated instances, each ~28% of the video, so a whole-video
    // proposal overlaps either one by well under a TIoU of 0.5.
    const Segment first(0.10 * duration, 0.38 * duration);
    const Segment second(0.55 * duration, 0.83 * duration);

    VideoGroundTruth gt_video;
    gt_video.duration = duration;
    gt_video.annotations = {Annotation{cls, first}, Annotation{cls, second}};
    corpus.gt.videos.emplace(vid, std::move(gt_video));

    // High scores everywhere: the classifier sees activity for the whole video.
    const Segment everywhere(0.0, duration + 1.0);
    corpus.tracks.emplace(
        vid, FrameScoreTrack(vid,
                             track_scores_impl(duration, cfg.fps, {everywhere},
                                               cfg.in_score_mean, cfg.out_score_mean,
                                               cfg.score_sigma, rng),
                             cfg.fps));

    std::vector<double> feat =
        make_features(cls, cfg.feature_dim, cfg.feature_noise_sigma, rng);
    corpus.features.emplace(vid, FeatureMatrix(vid, 1, cfg.feature_dim, std::move(feat)));
    return corpus;
}

void write_corpus(const Corpus& corpus, const SynthConfig& cfg, const fs::path& out_dir) {
    fs::create_directories(out_dir / "features");
    fs::create_directories(out_dir / "tracks");

    write_ground_truth(corpus.gt, corpus.labels, out_dir / "gt.json");

    std::map<std::string, ManifestEntry> feature_entries;
    for (const auto& [vid, features] : corpus.features) {
        const std::string rel = "features/" + vid + ".csv";
        write_feature_matrix(features, out_dir / rel);
        const auto& gt_video = corpus.gt.videos.at(vid);
        feature_entries.emplace(vid, ManifestEntry{rel, cfg.fps, gt_video.duration});
    }
    write_manifest(feature_entries, out_dir / "manifest.json");

    std::map<std::string, ManifestEntry> track_entries;
    for (const auto& [vid, track] : corpus.tracks) {
        const std::string rel = "tracks/" + vid + ".csv";
        FeatureMatrix column(vid, track.scores.size(), 1, track.scores);
        write_feature_matrix(column, out_dir / rel);
        const auto& gt_video = corpus.gt.videos.at(vid);
        track_entries.emplace(vid, ManifestEntry{rel, track.fps, gt_video.duration});
    }
    write_manifest(track_entries, out_dir / "tracks_manifest.json");
}

SynthConfig synth_config_from_file(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open synth config: " + path.string());
    ordered_json j;
    try {
        in >> j;
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }

    SynthConfig cfg;
    auto read_int = [&](const char* key, int& out) {
        if (j.contains(key)) out = j.at(key).get<int>();
    };
    auto read_double = [&](const char* key, double& out) {
        if (j.contains(key)) out = j.at(key).get<double>();
    };
    auto read_range = [&](const char* key, double& lo, double& hi) {
        if (!j.contains(key)) return;
        const auto& r = j.at(key);
        if (!r.is_array() || r.size() != 2)
            throw ConfigError(path.string() + ": \"" + key + "\" must be [min, max]");
        lo = r[0].get<double>();
        hi = r[1].get<double>();
    };

    read_int("n_videos", cfg.n_videos);
    read_int("n_classes", cfg.n_classes);
    read_range("duration", cfg.duration_min, cfg.duration_max);
    if (j.contains("segments_per_video")) {
        const auto& r = j.at("segments_per_video");
        if (!r.is_array() || r.size() != 2)
            throw ConfigError(path.string() + ": \"segments_per_video\" must be [min, max]");
        cfg.segments_min = r[0].get<int>();
        cfg.segments_max = r[1].get<int>();
    }
    read_range("segment_len", cfg.segment_len_min, cfg.segment_len_max);
    read_double("fps", cfg.fps);
    read_double("in_score_mean", cfg.in_score_mean);
    read_double("out_score_mean", cfg.out_score_mean);
    read_double("score_sigma", cfg.score_sigma);
    read_int("feature_dim", cfg.feature_dim);
    read_double("feature_noise_sigma", cfg.feature_noise_sigma);
    if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
    try {
        cfg.validate();
    } catch (const ValidationError& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
    return cfg;
}

}  // namespace actdet

#include "actdet/pipeline.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <set>

#include <json.hpp>

#include "actdet/io.hpp"
#include "actdet/plot.hpp"
#include "actdet/random.hpp"

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

namespace actdet {

namespace {

// Seed streams for the five trained models.
constexpr std::uint64_t kSeedIns = 0x101;
constexpr std::uint64_t kSeedMbh = 0x102;
constexpr std::uint64_t kSeedC3d = 0x103;
constexpr std::uint64_t kSeedMeta = 0x104;
constexpr std::uint64_t kSeedForest = 0x105;

fs::path resolve(const fs::path& base, const fs::path& p) {
    if (p.empty() || p.is_absolute()) return p;
    return base / p;
}

std::string pct(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%6.2f%%", 100.0 * v);
    return buf;
}

std::string short_num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%g", v);
    return buf;
}

// The class trained and evaluated for a video: its most frequent annotation
// label, ties toward the smaller id.
int video_class(const VideoGroundTruth& v) {
    std::map<int, int> counts;
    for (const auto& ann : v.annotations) ++counts[ann.class_id];
    int best = -1, best_count = 0;
    for (const auto& [cls, count] : counts)
        if (count > best_count) {
            best = cls;
            best_count = count;
        }
    return best;
}

struct TrainingSet {
    FeatureMatrix X;           // one pooled row per labeled video
    std::vector<int> y;        // video class ids
    std::vector<std::string> video_ids;
};

TrainingSet build_training_set(const GroundTruthFile& gtf,
                               const std::map<std::string, FeatureMatrix>& features,
                               std::ostream& log) {
    std::vector<double> rows;
    std::vector<int> y;
    std::vector<std::string> ids;
    std::size_t dim = 0;
    for (const auto& [vid, v] : gtf.gt.videos) {
        if (v.annotations.empty()) continue;
        auto it = features.find(vid);
        if (it == features.end()) {
            log << "warning: video '" << vid << "' has no features, skipping for training\n";
            continue;
        }
        std::vector<double> pooled = mean_pool_l1(it->second);
        if (dim == 0) dim = pooled.size();
        if (pooled.size() != dim)
            throw ValidationError("training features for '" + vid +
                                  "' have inconsistent dimension");
        rows.insert(rows.end(), pooled.begin(), pooled.end());
        y.push_back(video_class(v));
        ids.push_back(vid);
    }
    if (y.empty())
        throw ValidationError("no labeled videos with features available for training");

    std::set<int> present(y.begin(), y.end());
    for (std::size_t c = 0; c < gtf.labels.size(); ++c)
        if (!present.count(static_cast<int>(c)))
            throw ValidationError("class '" + gtf.labels[c] + "' has no training videos");

    return TrainingSet{FeatureMatrix("training", y.size(), dim, std::move(rows)),
                       std::move(y), std::move(ids)};
}

double top1_accuracy(const LinearSvmModel& model, const FeatureMatrix& X,
                     const std::vector<int>& y) {
    std::size_t hits = 0;
    for (std::size_t i = 0; i < X.rows; ++i) {
        ScoreVector s = svm_scores(model, {X.row(i), X.cols});
        const auto arg = std::max_element(s.values.begin(), s.values.end());
        hits += (static_cast<int>(arg - s.values.begin()) == y[i]);
    }
    return static_cast<double>(hits) / static_cast<double>(X.rows);
}

// Frame dataset for the forest: feature is the single raw track score,
// label is ground-truth occupancy of that frame.
struct FrameSet {
    FeatureMatrix X;
    std::vector<int> y;
};

FrameSet build_frame_set(const GroundTruthFile& gtf,
                         const std::map<std::string, FrameScoreTrack>& tracks) {
    std::vector<double> values;
    std::vector<int> y;
    for (const auto& [vid, track] : tracks) {
        auto it = gtf.gt.videos.find(vid);
        if (it == gtf.gt.videos.end()) continue;
        for (std::size_t t = 0; t < track.frame_count(); ++t) {
            values.push_back(track.scores[t]);
            int label = 0;
            for (const auto& ann : it->second.annotations)
                if (frame_inside(t, ann.segment, track.fps)) {
                    label = 1;
                    break;
                }
            y.push_back(label);
        }
    }
    if (values.empty())
        throw ValidationError("no track frames available for forest training");
    const std::size_t n = values.size();
    return FrameSet{FeatureMatrix("frames", n, 1, std::move(values)), std::move(y)};
}

ScoreVector meta_margins(const Models& models, const FeatureMatrix& features,
                         const std::string& video_id) {
    const std::vector<double> pooled = mean_pool_l1(features);
    const std::vector<ScoreVector> parts = {
        svm_scores(models.ins, pooled, video_id, ScoreKind::ins),
        svm_scores(models.mbh, pooled, video_id, ScoreKind::mbh),
        svm_scores(models.c3d, pooled, video_id, ScoreKind::c3d)};
    const ScoreVector stacked = stack_scores(parts);
    return svm_scores(models.meta, stacked.values, video_id, ScoreKind::stacked);
}

FrameScoreTrack forest_rescore(const RandomForestModel& rf, const FrameScoreTrack& raw) {
    std::vector<double> scores(raw.frame_count());
    for (std::size_t t = 0; t < raw.frame_count(); ++t) {
        const double x[1] = {raw.scores[t]};
        scores[t] = rf_positive_score(rf, x);
    }
    return FrameScoreTrack(raw.video_id, std::move(scores), raw.fps);
}

void write_eval_report(const EvalReport& report, const LabelTable& labels,
                       const fs::path& path) {
    ordered_json j;
    if (report.top1) j["top1"] = *report.top1;
    if (report.top3) j["top3"] = *report.top3;
    if (report.cls_map) j["cls_map"] = *report.cls_map;
    if (!report.det_map.empty()) {
        ordered_json m = ordered_json::object();
        for (const auto& [delta, v] : report.det_map) m[short_num(delta)] = v;
        j["det_map"] = std::move(m);

        ordered_json per_class = ordered_json::object();
        for (const auto& [key, ap] : report.per_class_ap) {
            const auto& [cls, delta] = key;
            const std::string label = (cls >= 0 && cls < static_cast<int>(labels.size()))
                                          ? labels[cls]
                                          : std::to_string(cls);
            per_class[short_num(delta)][label] = ap;
        }
        j["per_class_ap"] = std::move(per_class);
    }
    atomic_write_text(path, j.dump(2) + "\n");
}

}  // namespace

PipelineConfig PipelineConfig::from_file(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open pipeline config: " + path.string());
    ordered_json j;
    try {
        in >> j;
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
    const fs::path base = path.parent_path();

    PipelineConfig cfg;
    auto read_path = [&](const char* key, fs::path& out) {
        if (j.contains(key)) out = resolve(base, j.at(key).get<std::string>());
    };
    read_path("gt", cfg.gt);
    read_path("features_manifest", cfg.features_manifest);
    read_path("tracks_manifest", cfg.tracks_manifest);
    cfg.model_dir = resolve(base, "models");
    cfg.results_dir = resolve(base, "results");
    read_path("model_dir", cfg.model_dir);
    read_path("results_dir", cfg.results_dir);

    if (j.contains("train")) {
        const auto& t = j.at("train");
        if (t.contains("epochs")) cfg.train.epochs = t.at("epochs").get<int>();
        if (t.contains("lambda")) cfg.train.lambda = t.at("lambda").get<double>();
        if (t.contains("seed")) cfg.train.seed = t.at("seed").get<std::uint64_t>();
        if (t.contains("n_trees")) cfg.train.n_trees = t.at("n_trees").get<int>();
        if (t.contains("max_depth")) cfg.train.max_depth = t.at("max_depth").get<int>();
        if (t.contains("feature_subsample"))
            cfg.train.feature_subsample = t.at("feature_subsample").get<int>();
    }
    if (j.contains("segmenter")) {
        const auto& s = j.at("segmenter");
        if (s.contains("lambda")) cfg.segmenter.lambda = s.at("lambda").get<double>();
        if (s.contains("alpha")) cfg.segmenter.alpha = s.at("alpha").get<double>();
        if (s.contains("min_proposal_frames"))
            cfg.segmenter.min_proposal_frames = s.at("min_proposal_frames").get<int>();
        if (s.contains("max_proposals"))
            cfg.segmenter.max_proposals = s.at("max_proposals").get<int>();
    }
    if (j.contains("detect")) {
        const auto& d = j.at("detect");
        if (d.contains("n_classes")) cfg.detect.n_classes = d.at("n_classes").get<int>();
        if (d.contains("n_proposals")) cfg.detect.n_proposals = d.at("n_proposals").get<int>();
    }
    if (j.contains("eval")) {
        const auto& e = j.at("eval");
        if (e.contains("tiou"))
            cfg.tiou_thresholds = e.at("tiou").get<std::vector<double>>();
        if (e.contains("topk")) cfg.topk = e.at("topk").get<int>();
    }
    try {
        cfg.train.validate();
        cfg.segmenter.validate();
        cfg.detect.validate();
    } catch (const ValidationError& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
    return cfg;
}

Models load_models(const fs::path& model_dir) {
    Models m;
    m.ins = load_svm(model_dir / "svm_ins.json");
    m.mbh = load_svm(model_dir / "svm_mbh.json");
    m.c3d = load_svm(model_dir / "svm_c3d.json");
    m.meta = load_svm(model_dir / "svm_meta.json");
    m.rf = load_forest(model_dir / "rf.json");
    return m;
}

ScoreVector fuse_video_scores(const Models& models, const FeatureMatrix& features,
                              const std::string& video_id, int k) {
    return topk_normalize(meta_margins(models, features, video_id), k);
}

void cmd_train(const PipelineConfig& cfg, std::ostream& log) {
    cfg.train.validate();
    const GroundTruthFile gtf = load_ground_truth(cfg.gt);
    const auto features = load_features(cfg.features_manifest);
    const auto tracks = load_tracks(cfg.tracks_manifest);
    const TrainingSet ts = build_training_set(gtf, features, log);

    fs::create_directories(cfg.model_dir);

    Models models;
    const struct {
        const char* name;
        LinearSvmModel* slot;
        std::uint64_t stream;
    } base[] = {{"ins", &models.ins, kSeedIns},
                {"mbh", &models.mbh, kSeedMbh},
                {"c3d", &models.c3d, kSeedC3d}};
    for (const auto& entry : base) {
        TrainConfig tc = cfg.train;
        tc.seed = mix_seed(cfg.train.seed, entry.stream);
        *entry.slot = train_svm_ovr(ts.X, ts.y, tc);
        save_svm(*entry.slot, tc,
                 cfg.model_dir / (std::string("svm_") + entry.name + ".json"));
        log << "svm_" << entry.name << ": training top-1 "
            << pct(top1_accuracy(*entry.slot, ts.X, ts.y)) << "\n";
    }

    // Meta classifier on stacked base scores.
    const std::size_t C = models.ins.class_count();
    std::vector<double> stacked_rows;
    for (std::size_t i = 0; i < ts.X.rows; ++i) {
        const std::vector<ScoreVector> parts = {
            svm_scores(models.ins, {ts.X.row(i), ts.X.cols}, ts.video_ids[i], ScoreKind::ins),
            svm_scores(models.mbh, {ts.X.row(i), ts.X.cols}, ts.video_ids[i], ScoreKind::mbh),
            svm_scores(models.c3d, {ts.X.row(i), ts.X.cols}, ts.video_ids[i], ScoreKind::c3d)};
        const ScoreVector stacked = stack_scores(parts);
        stacked_rows.insert(stacked_rows.end(), stacked.values.begin(), stacked.values.end());
    }
    const FeatureMatrix stacked_X("stacked", ts.X.rows, 3 * C, std::move(stacked_rows));
    TrainConfig meta_cfg = cfg.train;
    meta_cfg.seed = mix_seed(cfg.train.seed, kSeedMeta);
    models.meta = train_svm_ovr(stacked_X, ts.y, meta_cfg);
    save_svm(models.meta, meta_cfg, cfg.model_dir / "svm_meta.json");
    log << "svm_meta: training top-1 " << pct(top1_accuracy(models.meta, stacked_X, ts.y))
        << "\n";

    // Frame-level forest on raw track scores vs ground-truth occupancy.
    const FrameSet fs_set = build_frame_set(gtf, tracks);
    TrainConfig rf_cfg = cfg.train;
    rf_cfg.seed = mix_seed(cfg.train.seed, kSeedForest);
    models.rf = train_random_forest(fs_set.X, fs_set.y, rf_cfg);
    save_forest(models.rf, rf_cfg, cfg.model_dir / "rf.json");
    std::size_t hits = 0;
    for (std::size_t i = 0; i < fs_set.X.rows; ++i) {
        const double score = rf_positive_score(models.rf, {fs_set.X.row(i), 1});
        hits += ((score >= 0.5) == (fs_set.y[i] == 1));
    }
    log << "rf: training frame accuracy "
        << pct(static_cast<double>(hits) / static_cast<double>(fs_set.X.rows)) << "\n";
}

void cmd_score(const PipelineConfig& cfg, std::ostream& log) {
    const GroundTruthFile gtf = load_ground_truth(cfg.gt);
    const auto features = load_features(cfg.features_manifest);
    const Models models = load_models(cfg.model_dir);

    ordered_json scores = ordered_json::object();
    for (const auto& [vid, feats] : features) {
        const ScoreVector fused = fuse_video_scores(models, feats, vid, cfg.topk);
        scores[vid] = fused.values;
    }

    ordered_json j;
    j["format"] = 1;
    j["labels"] = gtf.labels;
    j["k"] = cfg.topk;
    j["scores"] = std::move(scores);
    fs::create_directories(cfg.results_dir);
    atomic_write_text(cfg.results_dir / "scores.json", j.dump(2) + "\n");
    log << "wrote fused scores for " << features.size() << " videos\n";
}

std::map<std::string, ScoreVector> load_fused_scores(const fs::path& path,
                                                     LabelTable* labels) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open scores file: " + path.string());
    ordered_json j;
    try {
        in >> j;
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
    if (labels) *labels = j.at("labels").get<LabelTable>();
    std::map<std::string, ScoreVector> out;
    for (const auto& [vid, values] : j.at("scores").items())
        out.emplace(vid, ScoreVector(vid, values.get<std::vector<double>>(),
                                     ScoreKind::fused));
    return out;
}

void cmd_propose(const PipelineConfig& cfg, const fs::path& out, std::ostream& log) {
    cfg.segmenter.validate();
    const auto tracks = load_tracks(cfg.tracks_manifest);
    std::string lines;
    std::size_t count = 0;
    for (const auto& [vid, track] : tracks) {
        for (const Proposal& p : propose(track, cfg.segmenter)) {
            ordered_json j = {{"video_id", vid},
                              {"start", round6(p.segment.start)},
                              {"end", round6(p.segment.end)},
                              {"score", round6(p.score)}};
            lines += j.dump() + "\n";
            ++count;
        }
    }
    atomic_write_text(out, lines);
    log << "wrote " << count << " proposals for " << tracks.size() << " videos\n";
}

void cmd_detect(const PipelineConfig& cfg, std::ostream& log) {
    cfg.segmenter.validate();
    cfg.detect.validate();
    const GroundTruthFile gtf = load_ground_truth(cfg.gt);
    const auto features = load_features(cfg.features_manifest);
    const auto tracks = load_tracks(cfg.tracks_manifest);
    const Models models = load_models(cfg.model_dir);

    std::vector<Detection> detections;
    std::size_t videos = 0;
    for (const auto& [vid, track] : tracks) {
        auto fit = features.find(vid);
        if (fit == features.end())
            throw ValidationError("video '" + vid + "' has a track but no features");
        const ScoreVector fused = fuse_video_scores(models, fit->second, vid, cfg.topk);
        const FrameScoreTrack rescored = forest_rescore(models.rf, track);
        const std::vector<Proposal> proposals = propose(rescored, cfg.segmenter);
        std::vector<Detection> dets = assemble_detections(fused, proposals, cfg.detect);
        detections.insert(detections.end(), dets.begin(), dets.end());
        ++videos;
    }
    fs::create_directories(cfg.results_dir);
    save_detections(detections, gtf.labels, cfg.results_dir / "results.json");
    log << "wrote " << detections.size() << " detections for " << videos << " videos\n";
}

EvalReport cmd_eval_cls(const PipelineConfig& cfg, std::ostream& log,
                        fs::path scores_file, fs::path report_file) {
    if (scores_file.empty()) scores_file = cfg.results_dir / "scores.json";
    if (report_file.empty()) report_file = cfg.results_dir / "eval_cls.json";
    const GroundTruthFile gtf = load_ground_truth(cfg.gt);
    const auto fused = load_fused_scores(scores_file);

    GroundTruth labeled;
    for (const auto& [vid, v] : gtf.gt.videos) {
        if (v.annotations.empty()) {
            log << "warning: video '" << vid << "' has no labels, excluded from "
                   "classification metrics\n";
            continue;
        }
        labeled.videos.emplace(vid, v);
    }

    EvalReport report;
    report.top1 = topk_accuracy(fused, labeled, 1);
    report.top3 = topk_accuracy(fused, labeled, 3);
    report.cls_map = classification_map(fused, labeled,
                                        static_cast<int>(gtf.labels.size()));

    log << "Untrimmed classification\n";
    log << "   TOP-1    TOP-3      mAP\n";
    log << " " << pct(*report.top1) << "  " << pct(*report.top3) << "  "
        << pct(*report.cls_map) << "\n";
    write_eval_report(report, gtf.labels, report_file);
    return report;
}

EvalReport cmd_eval_det(const PipelineConfig& cfg, std::ostream& log,
                        fs::path results_file, fs::path report_file) {
    if (results_file.empty()) results_file = cfg.results_dir / "results.json";
    if (report_file.empty()) report_file = cfg.results_dir / "eval_det.json";
    const GroundTruthFile gtf = load_ground_truth(cfg.gt);
    const auto detections = load_detections(results_file, gtf.labels);

    std::set<std::string> with_results;
    for (const auto& d : detections) with_results.insert(d.video_id);
    for (const auto& [vid, v] : gtf.gt.videos)
        if (!v.annotations.empty() && !with_results.count(vid))
            log << "warning: no detections for video '" << vid << "'\n";

    EvalReport report;
    report.det_map = detection_map(detections, gtf.gt, cfg.tiou_thresholds,
                                   &report.per_class_ap);

    log << "Activity detection\n";
    log << "TIoU threshold |";
    for (const auto& [delta, v] : report.det_map) {
        char buf[16];
        std::snprintf(buf, sizeof(buf), "%8s", short_num(delta).c_str());
        log << buf;
    }
    log << "\n           mAP |";
    for (const auto& [delta, v] : report.det_map) log << " " << pct(v);
    log << "\n";
    write_eval_report(report, gtf.labels, report_file);
    return report;
}

void cmd_plot(const PipelineConfig& cfg, const std::string& video_id, const fs::path& svg,
              std::ostream& log) {
    cfg.segmenter.validate();
    const GroundTruthFile gtf = load_ground_truth(cfg.gt);
    const auto tracks = load_tracks(cfg.tracks_manifest);

    auto git = gtf.gt.videos.find(video_id);
    auto tit = tracks.find(video_id);
    if (git == gtf.gt.videos.end() || tit == tracks.end())
        throw ValidationError("unknown video id: '" + video_id + "'");

    PlotData data;
    data.video_id = video_id;
    data.duration = git->second.duration;
    data.track = tit->second;
    data.ground_truth = git->second.annotations;
    data.proposals = propose(tit->second, cfg.segmenter);

    fs::path csv = svg;
    csv.replace_extension(".csv");
    render_plot(data, svg, csv);
    log << "wrote " << svg.string() << " and " << csv.string() << "\n";
}

}  // namespace actdet

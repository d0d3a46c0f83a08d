#include <cstdint>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "actdet/io.hpp"
#include "actdet/pipeline.hpp"
#include "actdet/synth.hpp"

namespace fs = std::filesystem;
using namespace actdet;

namespace {

// Shared override flags. --gamma collapses the pairwise scale into a single
// effective switch penalty (lambda = gamma, alpha = 1).
struct Overrides {
    std::string config;
    std::string gt;
    std::string features_manifest;
    std::string tracks_manifest;
    std::string model_dir;
    std::string results_dir;
    std::uint64_t seed = 0;
    bool seed_set = false;
    int topk = 0;
    double gamma = -1.0;
    std::vector<double> tiou;
};

void add_common_flags(CLI::App* cmd, Overrides& ov) {
    cmd->add_option("--config", ov.config, "pipeline config JSON");
    cmd->add_option("--gt", ov.gt, "ground truth JSON (overrides config)");
    cmd->add_option("--features", ov.features_manifest,
                    "video feature manifest (overrides config)");
    cmd->add_option("--tracks", ov.tracks_manifest,
                    "score track manifest (overrides config)");
    cmd->add_option("--models", ov.model_dir, "model directory (overrides config)");
    cmd->add_option("--results-dir", ov.results_dir,
                    "results directory (overrides config)");
    cmd->add_option("--seed", ov.seed, "master training seed")
        ->each([&ov](const std::string&) { ov.seed_set = true; });
    cmd->add_option("--topk", ov.topk, "k for top-k score normalization");
    cmd->add_option("--gamma", ov.gamma, "effective label-switch penalty");
    cmd->add_option("--tiou", ov.tiou, "TIoU thresholds")->delimiter(',');
}

PipelineConfig make_config(const Overrides& ov) {
    PipelineConfig cfg;
    if (!ov.config.empty()) cfg = PipelineConfig::from_file(ov.config);
    if (!ov.gt.empty()) cfg.gt = ov.gt;
    if (!ov.features_manifest.empty()) cfg.features_manifest = ov.features_manifest;
    if (!ov.tracks_manifest.empty()) cfg.tracks_manifest = ov.tracks_manifest;
    if (!ov.model_dir.empty()) cfg.model_dir = ov.model_dir;
    if (!ov.results_dir.empty()) cfg.results_dir = ov.results_dir;
    if (ov.seed_set) cfg.train.seed = ov.seed;
    if (ov.topk > 0) cfg.topk = ov.topk;
    if (ov.gamma >= 0.0) {
        cfg.segmenter.lambda = ov.gamma;
        cfg.segmenter.alpha = 1.0;
    }
    if (!ov.tiou.empty()) cfg.tiou_thresholds = ov.tiou;
    return cfg;
}

void require_path(const fs::path& p, const char* what) {
    if (p.empty())
        throw ConfigError(std::string("missing required path: ") + what +
                          " (set it via --config or the matching flag)");
    if (!fs::exists(p))
        throw ConfigError(std::string(what) + " not found: " + p.string());
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"temporal activity detection pipeline for untrimmed videos"};
    app.require_subcommand(1);

    Overrides ov;
    std::string out_path;
    std::string video_id;
    std::string synth_config;
    std::string scores_path;
    std::string results_path;
    std::string report_path;
    bool saturated = false;

    auto* synth_cmd = app.add_subcommand(
        "synth", "generate a seeded synthetic corpus (gt, features, score tracks)");
    synth_cmd->add_option("--config", synth_config, "synth config JSON");
    synth_cmd->add_option("--out", out_path, "output directory")->required();
    synth_cmd->add_option("--seed", ov.seed, "corpus seed")
        ->each([&ov](const std::string&) { ov.seed_set = true; });
    synth_cmd->add_flag("--saturated", saturated,
                        "emit the single saturated-score failure-mode video");

    auto* train_cmd =
        app.add_subcommand("train", "train base SVMs, meta SVM and frame forest");
    add_common_flags(train_cmd, ov);

    auto* score_cmd =
        app.add_subcommand("score", "write fused per-video classification scores");
    add_common_flags(score_cmd, ov);

    auto* propose_cmd = app.add_subcommand(
        "propose", "segment raw score tracks into activity proposals (JSON lines)");
    add_common_flags(propose_cmd, ov);
    propose_cmd->add_option("--out", out_path, "output JSONL path");

    auto* detect_cmd =
        app.add_subcommand("detect", "run classification + segmentation into results JSON");
    add_common_flags(detect_cmd, ov);

    auto* eval_cls_cmd =
        app.add_subcommand("eval-cls", "classification metrics (TOP-1, TOP-3, mAP)");
    add_common_flags(eval_cls_cmd, ov);
    eval_cls_cmd->add_option("--scores", scores_path, "fused scores JSON");
    eval_cls_cmd->add_option("--report", report_path, "report JSON output path");

    auto* eval_det_cmd =
        app.add_subcommand("eval-det", "detection mAP at TIoU thresholds");
    add_common_flags(eval_det_cmd, ov);
    eval_det_cmd->add_option("--results", results_path, "detection results JSON");
    eval_det_cmd->add_option("--report", report_path, "report JSON output path");

    auto* plot_cmd = app.add_subcommand(
        "plot", "render ground truth, scores and proposals for one video as SVG + CSV");
    add_common_flags(plot_cmd, ov);
    plot_cmd->add_option("--video", video_id, "video id")->required();
    plot_cmd->add_option("--out", out_path, "output SVG path")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help
        app.exit(e);
        return 2;
    }

    try {
        if (synth_cmd->parsed()) {
            SynthConfig cfg;
            if (!synth_config.empty()) cfg = synth_config_from_file(synth_config);
            if (ov.seed_set) cfg.seed = ov.seed;
            const Corpus corpus = saturated ? saturated_video(cfg) : generate_corpus(cfg);
            write_corpus(corpus, cfg, out_path);
            std::cout << "wrote corpus with " << corpus.gt.videos.size() << " videos to "
                      << out_path << "\n";
        } else if (train_cmd->parsed()) {
            PipelineConfig cfg = make_config(ov);
            require_path(cfg.gt, "ground truth");
            require_path(cfg.features_manifest, "features manifest");
            require_path(cfg.tracks_manifest, "tracks manifest");
            cmd_train(cfg, std::cout);
        } else if (score_cmd->parsed()) {
            PipelineConfig cfg = make_config(ov);
            require_path(cfg.gt, "ground truth");
            require_path(cfg.features_manifest, "features manifest");
            cmd_score(cfg, std::cout);
        } else if (propose_cmd->parsed()) {
            PipelineConfig cfg = make_config(ov);
            require_path(cfg.tracks_manifest, "tracks manifest");
            fs::path out = out_path.empty() ? cfg.results_dir / "proposals.jsonl"
                                            : fs::path(out_path);
            cmd_propose(cfg, out, std::cout);
        } else if (detect_cmd->parsed()) {
            PipelineConfig cfg = make_config(ov);
            require_path(cfg.gt, "ground truth");
            require_path(cfg.features_manifest, "features manifest");
            require_path(cfg.tracks_manifest, "tracks manifest");
            cmd_detect(cfg, std::cout);
        } else if (eval_cls_cmd->parsed()) {
            PipelineConfig cfg = make_config(ov);
            require_path(cfg.gt, "ground truth");
            cmd_eval_cls(cfg, std::cout, scores_path, report_path);
        } else if (eval_det_cmd->parsed()) {
            PipelineConfig cfg = make_config(ov);
            require_path(cfg.gt, "ground truth");
            cmd_eval_det(cfg, std::cout, results_path, report_path);
        } else if (plot_cmd->parsed()) {
            PipelineConfig cfg = make_config(ov);
            require_path(cfg.gt, "ground truth");
            require_path(cfg.tracks_manifest, "tracks manifest");
            cmd_plot(cfg, video_id, out_path, std::cout);
        }
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}

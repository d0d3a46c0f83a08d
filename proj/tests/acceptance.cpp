// Acceptance suite: end-to-end checks of the library against independent
// oracles and the synthetic corpus. Prints one PASS/FAIL line per criterion
// and exits nonzero when any criterion fails.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <vector>

#include "actdet/classify.hpp"
#include "actdet/evaluate.hpp"
#include "actdet/io.hpp"
#include "actdet/pipeline.hpp"
#include "actdet/segment.hpp"
#include "actdet/synth.hpp"
#include "oracles.hpp"

using namespace actdet;
namespace fs = std::filesystem;

namespace {

struct Failure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

void expect(bool condition, const std::string& what) {
    if (!condition) throw Failure(what);
}

void expect_close(double actual, double expected, double tol, const std::string& what) {
    if (!(std::fabs(actual - expected) <= tol))
        throw Failure(what + ": got " + std::to_string(actual) + ", expected " +
                      std::to_string(expected));
}

double elapsed_seconds(const std::chrono::steady_clock::time_point& start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

// ---- criterion bodies ------------------------------------------------------

void dp_oracle_equivalence() {
    const auto start = std::chrono::steady_clock::now();
    std::mt19937_64 rng(20240001);
    std::uniform_int_distribution<std::size_t> len(1, 14);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<double> scores(len(rng));
        for (double& s : scores) s = unit(rng);
        const FrameScoreTrack track("t", scores, 2.0);
        for (double gamma : {0.0, 0.1, 0.3, 1.0, 10.0}) {
            SegmenterConfig cfg;
            cfg.lambda = gamma;
            cfg.alpha = 1.0;
            const Labeling l = dp_segment(track, cfg);
            const auto oracle = oracles::brute_force_segment(scores, gamma);
            expect(l.energy == oracle.energy,
                   "dp energy differs from exhaustive maximum (T=" +
                       std::to_string(scores.size()) + ", gamma=" + std::to_string(gamma) +
                       ")");
        }
    }
    const double secs = elapsed_seconds(start);
    expect(secs < 5.0, "dp oracle sweep took " + std::to_string(secs) + "s (budget 5s)");
}

void tiou_analytic_suite() {
    expect_close(tiou(Segment(2, 5), Segment(2, 5)), 1.0, 1e-12, "identity TIoU");
    expect_close(tiou(Segment(0, 1), Segment(2, 3)), 0.0, 1e-12, "disjoint TIoU");
    expect_close(tiou(Segment(0, 10), Segment(5, 15)), 1.0 / 3.0, 1e-12, "overlap TIoU");
}

void detection_ap_fixtures() {
    const std::vector<GtInstance> one = {{"v1", Segment(2, 5)}};
    expect_close(detection_ap({{"v1", 0, Segment(2, 5), 0.9}}, one, 0.5), 1.0, 1e-12,
                 "perfect detection AP");

    const std::vector<Detection> miss_then_hit = {{"v1", 0, Segment(20, 25), 0.9},
                                                  {"v1", 0, Segment(2, 5), 0.5}};
    expect_close(detection_ap(miss_then_hit, one, 0.5), 0.5, 1e-12, "miss-then-hit AP");

    const std::vector<GtInstance> two = {{"v1", Segment(2, 5)}, {"v1", Segment(10, 15)}};
    const std::vector<Detection> duplicate = {{"v1", 0, Segment(2, 5), 0.9},
                                              {"v1", 0, Segment(2.1, 5.1), 0.8}};
    expect_close(detection_ap(duplicate, two, 0.5), 0.5, 1e-12, "duplicate-match AP");

    std::mt19937_64 rng(20240003);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int trial = 0; trial < 100; ++trial) {
        const int n_gt = std::uniform_int_distribution<int>(1, 3)(rng);
        const int n_det = std::uniform_int_distribution<int>(0, 4)(rng);
        std::vector<GtInstance> gt;
        for (int g = 0; g < n_gt; ++g) {
            const double s = 10.0 * unit(rng);
            gt.push_back({unit(rng) < 0.7 ? "v1" : "v2",
                          Segment(s, s + 0.5 + 5.0 * unit(rng))});
        }
        std::vector<Detection> dets;
        for (int d = 0; d < n_det; ++d) {
            const double s = 10.0 * unit(rng);
            dets.push_back({unit(rng) < 0.7 ? "v1" : "v2", 0,
                            Segment(s, s + 0.5 + 5.0 * unit(rng)), unit(rng)});
        }
        for (double delta : {0.1, 0.25, 0.5, 0.75}) {
            const double expected = oracles::brute_force_ap(dets, gt, delta);
            expect_close(detection_ap(dets, gt, delta), expected, 1e-12,
                         "micro-case AP vs brute-force oracle");
        }
    }
}

struct PipelineRun {
    PipelineConfig cfg;
    EvalReport det;
    EvalReport cls;
};

PipelineRun run_full_pipeline(const fs::path& dir, std::uint64_t seed) {
    SynthConfig synth;  // defaults: 50 videos, 5 classes
    synth.seed = seed;
    write_corpus(generate_corpus(synth), synth, dir / "corpus");

    PipelineConfig cfg;
    cfg.gt = dir / "corpus/gt.json";
    cfg.features_manifest = dir / "corpus/manifest.json";
    cfg.tracks_manifest = dir / "corpus/tracks_manifest.json";
    cfg.model_dir = dir / "models";
    cfg.results_dir = dir / "results";
    cfg.train.seed = seed;

    std::ostringstream log;
    cmd_train(cfg, log);
    cmd_detect(cfg, log);
    cmd_score(cfg, log);
    PipelineRun run;
    run.det = cmd_eval_det(cfg, log);
    run.cls = cmd_eval_cls(cfg, log);
    run.cfg = cfg;
    return run;
}

void synthetic_end_to_end() {
    const auto start = std::chrono::steady_clock::now();
    const auto dir = oracles::fresh_dir("acceptance_e2e");
    const PipelineRun run = run_full_pipeline(dir, 7);

    const double map50 = run.det.det_map.at(0.5);
    expect(map50 >= 0.80,
           "detection mAP@0.5 = " + std::to_string(map50) + " below 0.80");
    expect(run.cls.top1.value() >= 0.90,
           "classification top-1 = " + std::to_string(run.cls.top1.value()) +
               " below 0.90");
    const double secs = elapsed_seconds(start);
    expect(secs < 60.0, "pipeline took " + std::to_string(secs) + "s (budget 60s)");
}

void switch_count_monotonicity() {
    std::mt19937_64 rng(20240005);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::uniform_int_distribution<std::size_t> len(2, 80);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<double> scores(len(rng));
        for (double& s : scores) s = unit(rng);
        const FrameScoreTrack track("t", scores, 2.0);
        std::size_t prev = scores.size() + 1;
        for (double gamma : {0.0, 0.1, 0.5, 2.0, 10.0}) {
            SegmenterConfig cfg;
            cfg.lambda = gamma;
            cfg.alpha = 1.0;
            const std::size_t switches =
                oracles::count_switches(dp_segment(track, cfg).labels);
            expect(switches <= prev, "switch count increased from " +
                                         std::to_string(prev) + " to " +
                                         std::to_string(switches) + " at gamma=" +
                                         std::to_string(gamma));
            prev = switches;
        }
    }
}

void topk_ranking_invariance() {
    std::mt19937_64 rng(20240006);
    std::uniform_real_distribution<double> value(-10.0, 10.0);
    std::uniform_int_distribution<int> size(2, 16);
    for (int trial = 0; trial < 1000; ++trial) {
        const int C = size(rng);
        std::vector<double> values(C);
        for (double& v : values) v = value(rng);
        if (trial % 7 == 1)
            for (double& v : values) v = -std::fabs(v) - 0.5;  // all negative
        if (trial % 7 == 2)
            std::fill(values.begin(), values.end(), values[0]);  // all equal
        const int k = std::uniform_int_distribution<int>(1, C)(rng);
        const ScoreVector in("v", values, ScoreKind::stacked);
        const auto out = topk_normalize(in, k).values;

        const std::size_t in_argmax =
            std::max_element(values.begin(), values.end()) - values.begin();
        const double out_max = *std::max_element(out.begin(), out.end());
        expect(out[in_argmax] == out_max, "argmax moved under top-k normalization");
        for (int i = 0; i < C; ++i)
            for (int j = 0; j < C; ++j) {
                if (values[i] < values[j])
                    expect(out[i] <= out[j], "ranking violated by top-k normalization");
                if (values[i] == values[j])
                    expect(out[i] == out[j], "tie broken by top-k normalization");
            }
    }
}

void pipeline_determinism() {
    const auto dir_a = oracles::fresh_dir("acceptance_det_a");
    const auto dir_b = oracles::fresh_dir("acceptance_det_b");
    const PipelineRun a = run_full_pipeline(dir_a, 7);
    const PipelineRun b = run_full_pipeline(dir_b, 7);

    const char* model_files[] = {"svm_ins.json", "svm_mbh.json", "svm_c3d.json",
                                 "svm_meta.json", "rf.json"};
    for (const char* name : model_files)
        expect(oracles::slurp(a.cfg.model_dir / name) ==
                   oracles::slurp(b.cfg.model_dir / name),
               std::string("model file differs between runs: ") + name);
    const char* result_files[] = {"results.json", "scores.json", "eval_det.json",
                                  "eval_cls.json"};
    for (const char* name : result_files)
        expect(oracles::slurp(a.cfg.results_dir / name) ==
                   oracles::slurp(b.cfg.results_dir / name),
               std::string("result file differs between runs: ") + name);
}

void saturated_failure_mode() {
    SynthConfig cfg;
    const Corpus corpus = saturated_video(cfg);
    const auto& [vid, video] = *corpus.gt.videos.begin();
    expect(video.annotations.size() == 2, "saturated video must carry two instances");

    SegmenterConfig seg;  // default gamma
    const auto proposals = propose(corpus.tracks.at(vid), seg);
    expect(proposals.size() == 1,
           "expected exactly 1 proposal, got " + std::to_string(proposals.size()));
    for (const auto& ann : video.annotations) {
        const double overlap = tiou(proposals[0].segment, ann.segment);
        expect(overlap < 0.5, "proposal TIoU vs instance is " + std::to_string(overlap) +
                                  ", expected < 0.5");
    }
}

void format_fidelity() {
    const auto dir = oracles::fresh_dir("acceptance_format");
    const PipelineRun run = run_full_pipeline(dir, 7);

    // Submission schema: key order and per-entry structure.
    const std::string text = oracles::slurp(run.cfg.results_dir / "results.json");
    const auto version_pos = text.find("\"version\"");
    const auto results_pos = text.find("\"results\"");
    const auto external_pos = text.find("\"external_data\"");
    expect(version_pos != std::string::npos && results_pos != std::string::npos &&
               external_pos != std::string::npos,
           "results JSON is missing a required top-level key");
    expect(version_pos < results_pos && results_pos < external_pos,
           "results JSON top-level keys are out of order");

    const GroundTruthFile gtf = load_ground_truth(run.cfg.gt);
    const auto dets = load_detections(run.cfg.results_dir / "results.json", gtf.labels);
    expect(!dets.empty(), "no detections in results JSON");
    for (const auto& d : dets) {
        expect(d.score >= 0.0, "detection score must be nonnegative");
        expect(d.segment.end > d.segment.start, "detection segment must be ordered");
    }

    // Table shapes, via the CLI.
    const std::string eval_det_cmd =
        std::string(ACTDET_CLI_BIN) + " eval-det --gt " + run.cfg.gt.string() +
        " --results-dir " + run.cfg.results_dir.string() +
        " --tiou 0.1,0.2,0.3,0.4,0.5 2>&1";
    FILE* pipe = popen(eval_det_cmd.c_str(), "r");
    expect(pipe != nullptr, "could not spawn CLI");
    std::string out;
    char buf[512];
    while (fgets(buf, sizeof(buf), pipe)) out += buf;
    expect(pclose(pipe) == 0, "eval-det exited nonzero");
    expect(out.find("TIoU threshold") != std::string::npos, "missing TIoU header");
    for (const char* col : {"0.1", "0.2", "0.3", "0.4", "0.5"})
        expect(out.find(col) != std::string::npos,
               std::string("missing TIoU column ") + col);

    const std::string eval_cls_cmd =
        std::string(ACTDET_CLI_BIN) + " eval-cls --gt " + run.cfg.gt.string() +
        " --results-dir " + run.cfg.results_dir.string() + " 2>&1";
    pipe = popen(eval_cls_cmd.c_str(), "r");
    expect(pipe != nullptr, "could not spawn CLI");
    out.clear();
    while (fgets(buf, sizeof(buf), pipe)) out += buf;
    expect(pclose(pipe) == 0, "eval-cls exited nonzero");
    for (const char* col : {"TOP-1", "TOP-3", "mAP"})
        expect(out.find(col) != std::string::npos,
               std::string("missing classification column ") + col);
}

}  // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<void()>>> criteria = {
        {"1. DP oracle equivalence (200 random tracks, exact energies)",
         dp_oracle_equivalence},
        {"2. TIoU analytic suite", tiou_analytic_suite},
        {"3. detection AP fixtures and brute-force oracle", detection_ap_fixtures},
        {"4. synthetic end-to-end (mAP@0.5 >= 0.80, top-1 >= 0.90)",
         synthetic_end_to_end},
        {"5. switch-count monotonicity in gamma", switch_count_monotonicity},
        {"6. top-k normalization ranking invariance (1000 vectors)",
         topk_ranking_invariance},
        {"7. pipeline determinism (byte-identical reruns)", pipeline_determinism},
        {"8. saturated-video failure-mode regression", saturated_failure_mode},
        {"9. format fidelity (submission schema, table columns)", format_fidelity},
    };

    int failures = 0;
    for (const auto& [name, body] : criteria) {
        try {
            body();
            std::cout << "[PASS] " << name << "\n";
        } catch (const std::exception& e) {
            ++failures;
            std::cout << "[FAIL] " << name << ": " << e.what() << "\n";
        }
    }
    if (failures) std::cout << failures << " criterion(s) failed\n";
    return failures == 0 ? 0 : 1;
}

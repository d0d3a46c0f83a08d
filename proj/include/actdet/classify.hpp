#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <utility>
#include <vector>

#include "actdet/types.hpp"

namespace actdet {

struct TrainConfig {
    int epochs = 30;
    double lambda = 0.01;       // L2 regularization strength
    std::uint64_t seed = 7;
    int n_trees = 20;           // forest parameters
    int max_depth = 6;
    int feature_subsample = 1;  // features tried per split

    void validate() const;
};

// One-versus-rest linear classifier, one weight row and bias per class.
// Scores are raw margins, not probabilities.
struct LinearSvmModel {
    std::vector<std::vector<double>> weights;  // [C][D]
    std::vector<double> biases;                // [C]

    std::size_t class_count() const { return weights.size(); }
    std::size_t dim() const { return weights.empty() ? 0 : weights[0].size(); }
    void validate() const;
};

// Binary random forest. Trees are stored flat; node 0 is the root, leaves
// carry the positive-label fraction of their training samples.
struct RandomForestModel {
    struct Node {
        int feature = -1;  // -1 marks a leaf
        double threshold = 0.0;
        int left = -1;
        int right = -1;
        double positive_fraction = 0.0;

        bool is_leaf() const { return feature < 0; }
    };
    struct Tree {
        std::vector<Node> nodes;
    };

    std::vector<Tree> trees;
    std::size_t dim = 0;

    void validate() const;
};

// Columnwise mean over frames followed by L1 normalization. Throws on an
// all-zero mean (the normalizer is undefined).
std::vector<double> mean_pool_l1(const FeatureMatrix& frames);

// Trains one Pegasos-style hinge-loss subgradient problem per class.
// Rows of X are samples, y holds class ids. Bit-deterministic given the seed;
// per-class seeds derive from the master so class order cannot matter.
LinearSvmModel train_svm_ovr(const FeatureMatrix& X, const std::vector<int>& y,
                             const TrainConfig& cfg);

// Raw per-class margins w_c . x + b_c.
ScoreVector svm_scores(const LinearSvmModel& model, std::span<const double> x,
                       std::string video_id = {}, ScoreKind kind = ScoreKind::ins);

// Scores every frame and mean-pools per class into a video-level vector.
std::pair<std::vector<std::vector<double>>, ScoreVector>
frame_scores(const FeatureMatrix& frames, const LinearSvmModel& model,
             ScoreKind pooled_kind = ScoreKind::c3d);

// Concatenates exactly (ins, mbh, c3d) parts of one video into a 3C vector.
ScoreVector stack_scores(const std::vector<ScoreVector>& parts);

// Shifts the vector so its minimum is zero, then divides by the sum of the
// k largest shifted entries. All-equal vectors fall back to uniform 1/C.
// Ranking (in particular the argmax) is preserved.
ScoreVector topk_normalize(const ScoreVector& s, int k);

// Regularized hinge objective of one class's binary problem; exposed so the
// training curve can be audited.
double svm_objective(const LinearSvmModel& model, const FeatureMatrix& X,
                     const std::vector<int>& y, int cls, double lambda);

// Grows n_trees trees on bootstrap samples; splits minimize weighted Gini
// impurity over feature_subsample randomly drawn features. y must be {0,1}
// with both classes present.
RandomForestModel train_random_forest(const FeatureMatrix& X, const std::vector<int>& y,
                                      const TrainConfig& cfg);

// Mean over trees of the reached leaf's positive fraction; always in [0,1].
double rf_positive_score(const RandomForestModel& model, std::span<const double> x);

// Model files are single JSON documents with a "format": 1 marker and the
// training config embedded.
void save_svm(const LinearSvmModel& model, const TrainConfig& cfg,
              const std::filesystem::path& path);
LinearSvmModel load_svm(const std::filesystem::path& path);
void save_forest(const RandomForestModel& model, const TrainConfig& cfg,
                 const std::filesystem::path& path);
RandomForestModel load_forest(const std::filesystem::path& path);

}  // namespace actdet

#include "actdet/classify.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>

#include <json.hpp>

#include "actdet/io.hpp"
#include "actdet/random.hpp"

using ordered_json = nlohmann::ordered_json;

namespace actdet {

void TrainConfig::validate() const {
    if (epochs < 1) throw ValidationError("train config: epochs must be >= 1");
    if (!(lambda > 0.0)) throw ValidationError("train config: lambda must be > 0");
    if (n_trees < 1) throw ValidationError("train config: n_trees must be >= 1");
    if (max_depth < 1) throw ValidationError("train config: max_depth must be >= 1");
    if (feature_subsample < 1)
        throw ValidationError("train config: feature_subsample must be >= 1");
}

void LinearSvmModel::validate() const {
    if (weights.size() < 2)
        throw ValidationError("svm model: needs at least 2 classes");
    if (biases.size() != weights.size())
        throw ValidationError("svm model: bias count must match class count");
    const std::size_t d = weights[0].size();
    for (const auto& row : weights) {
        if (row.size() != d || d == 0)
            throw ValidationError("svm model: inconsistent weight dimensions");
        for (double w : row)
            if (!std::isfinite(w)) throw ValidationError("svm model: non-finite weight");
    }
    for (double b : biases)
        if (!std::isfinite(b)) throw ValidationError("svm model: non-finite bias");
}

void RandomForestModel::validate() const {
    if (trees.empty()) throw ValidationError("forest model: no trees");
    for (const auto& tree : trees) {
        if (tree.nodes.empty()) throw ValidationError("forest model: empty tree");
        for (const auto& n : tree.nodes) {
            if (n.is_leaf()) {
                if (n.positive_fraction < 0.0 || n.positive_fraction > 1.0)
                    throw ValidationError("forest model: leaf fraction outside [0,1]");
            } else {
                if (n.feature >= static_cast<int>(dim))
                    throw ValidationError("forest model: split feature index out of range");
                if (n.left < 0 || n.right < 0 ||
                    n.left >= static_cast<int>(tree.nodes.size()) ||
                    n.right >= static_cast<int>(tree.nodes.size()))
                    throw ValidationError("forest model: dangling child index");
            }
        }
    }
}

std::vector<double> mean_pool_l1(const FeatureMatrix& frames) {
    std::vector<double> mean(frames.cols, 0.0);
    for (std::size_t r = 0; r < frames.rows; ++r)
        for (std::size_t c = 0; c < frames.cols; ++c)
            mean[c] += frames.at(r, c);
    for (double& v : mean) v /= static_cast<double>(frames.rows);

    double l1 = 0.0;
    for (double v : mean) l1 += std::fabs(v);
    if (l1 == 0.0)
        throw ValidationError("degenerate feature: all-zero mean for '" +
                              frames.video_id + "'");
    for (double& v : mean) v /= l1;
    return mean;
}

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

// One binary Pegasos problem: decreasing step 1/(lambda*t), L2 shrink on the
// weights, unregularized bias.
void train_binary_pegasos(const FeatureMatrix& X, const std::vector<int>& binary_y,
                          double lambda, int epochs, std::mt19937_64& rng,
                          std::vector<double>& w, double& b) {
    const std::size_t n = X.rows;
    const std::size_t d = X.cols;
    w.assign(d, 0.0);
    b = 0.0;

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});

    std::uint64_t t = 0;
    for (int epoch = 0; epoch < epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng);
        for (std::size_t idx : order) {
            ++t;
            const double eta = 1.0 / (lambda * static_cast<double>(t));
            const double y = binary_y[idx] ? 1.0 : -1.0;
            const double margin = y * (dot(w, {X.row(idx), d}) + b);
            const double shrink = 1.0 - eta * lambda;  // = 1 - 1/t
            for (double& wi : w) wi *= shrink;
            if (margin < 1.0) {
                const double* x = X.row(idx);
                for (std::size_t j = 0; j < d; ++j) w[j] += eta * y * x[j];
                b += eta * y;
            }
        }
    }
}

}  // namespace

LinearSvmModel train_svm_ovr(const FeatureMatrix& X, const std::vector<int>& y,
                             const TrainConfig& cfg) {
    cfg.validate();
    if (y.size() != X.rows)
        throw ValidationError("svm training: label count does not match sample count");

    int max_class = -1;
    for (int c : y) {
        if (c < 0) throw ValidationError("svm training: negative class id");
        max_class = std::max(max_class, c);
    }
    const int n_classes = max_class + 1;
    std::set<int> distinct(y.begin(), y.end());
    if (distinct.size() < 2)
        throw ValidationError("svm training: needs at least 2 distinct classes");

    LinearSvmModel model;
    model.weights.resize(n_classes);
    model.biases.resize(n_classes);
    std::vector<int> binary(y.size());
    for (int c = 0; c < n_classes; ++c) {
        for (std::size_t i = 0; i < y.size(); ++i) binary[i] = (y[i] == c) ? 1 : 0;
        auto rng = make_rng(cfg.seed, static_cast<std::uint64_t>(c));
        train_binary_pegasos(X, binary, cfg.lambda, cfg.epochs, rng,
                             model.weights[c], model.biases[c]);
    }
    model.validate();
    return model;
}

ScoreVector svm_scores(const LinearSvmModel& model, std::span<const double> x,
                       std::string video_id, ScoreKind kind) {
    if (x.size() != model.dim())
        throw ValidationError("svm scoring: feature dimension " + std::to_string(x.size()) +
                              " does not match model dimension " + std::to_string(model.dim()));
    std::vector<double> values(model.class_count());
    for (std::size_t c = 0; c < model.class_count(); ++c)
        values[c] = dot(model.weights[c], x) + model.biases[c];
    return ScoreVector(std::move(video_id), std::move(values), kind);
}

std::pair<std::vector<std::vector<double>>, ScoreVector>
frame_scores(const FeatureMatrix& frames, const LinearSvmModel& model,
             ScoreKind pooled_kind) {
    if (frames.cols != model.dim())
        throw ValidationError("frame scoring: feature dimension does not match model");
    const std::size_t C = model.class_count();
    std::vector<std::vector<double>> per_frame(frames.rows);
    std::vector<double> pooled(C, 0.0);
    for (std::size_t t = 0; t < frames.rows; ++t) {
        ScoreVector row = svm_scores(model, {frames.row(t), frames.cols});
        for (std::size_t c = 0; c < C; ++c) pooled[c] += row.values[c];
        per_frame[t] = std::move(row.values);
    }
    for (double& v : pooled) v /= static_cast<double>(frames.rows);
    return {std::move(per_frame),
            ScoreVector(frames.video_id, std::move(pooled), pooled_kind)};
}

ScoreVector stack_scores(const std::vector<ScoreVector>& parts) {
    static constexpr ScoreKind expected[] = {ScoreKind::ins, ScoreKind::mbh, ScoreKind::c3d};
    if (parts.size() != 3)
        throw ValidationError("stack: expected exactly 3 parts (ins, mbh, c3d), got " +
                              std::to_string(parts.size()));
    for (std::size_t i = 0; i < 3; ++i) {
        if (parts[i].kind != expected[i])
            throw ValidationError(std::string("stack: part ") + std::to_string(i) +
                                  " must have kind '" + to_string(expected[i]) + "', got '" +
                                  to_string(parts[i].kind) + "'");
        if (parts[i].video_id != parts[0].video_id)
            throw ValidationError("stack: mismatched video ids '" + parts[0].video_id +
                                  "' vs '" + parts[i].video_id + "'");
        if (parts[i].values.size() != parts[0].values.size())
            throw ValidationError("stack: mismatched class counts");
    }
    std::vector<double> values;
    values.reserve(3 * parts[0].values.size());
    for (const auto& p : parts)
        values.insert(values.end(), p.values.begin(), p.values.end());
    return ScoreVector(parts[0].video_id, std::move(values), ScoreKind::stacked);
}

ScoreVector topk_normalize(const ScoreVector& s, int k) {
    const std::size_t C = s.values.size();
    if (k < 1 || static_cast<std::size_t>(k) > C)
        throw ValidationError("topk_normalize: k=" + std::to_string(k) +
                              " outside [1, " + std::to_string(C) + "]");

    const double lo = *std::min_element(s.values.begin(), s.values.end());
    std::vector<double> shifted(C);
    for (std::size_t i = 0; i < C; ++i) shifted[i] = s.values[i] - lo;

    const double hi = *std::max_element(shifted.begin(), shifted.end());
    if (hi == 0.0) {
        // All entries equal; the divisor would be zero.
        std::vector<double> uniform(C, 1.0 / static_cast<double>(C));
        return ScoreVector(s.video_id, std::move(uniform), ScoreKind::fused);
    }

    std::vector<double> sorted = shifted;
    std::sort(sorted.begin(), sorted.end(), std::greater<double>());
    double denom = 0.0;
    for (int i = 0; i < k; ++i) denom += sorted[i];

    for (double& v : shifted) v /= denom;
    return ScoreVector(s.video_id, std::move(shifted), ScoreKind::fused);
}

double svm_objective(const LinearSvmModel& model, const FeatureMatrix& X,
                     const std::vector<int>& y, int cls, double lambda) {
    if (cls < 0 || cls >= static_cast<int>(model.class_count()))
        throw ValidationError("svm objective: class out of range");
    const auto& w = model.weights[cls];
    double reg = 0.0;
    for (double wi : w) reg += wi * wi;
    reg *= 0.5 * lambda;
    double hinge = 0.0;
    for (std::size_t i = 0; i < X.rows; ++i) {
        const double label = (y[i] == cls) ? 1.0 : -1.0;
        const double margin = label * (dot(w, {X.row(i), X.cols}) + model.biases[cls]);
        hinge += std::max(0.0, 1.0 - margin);
    }
    return reg + hinge / static_cast<double>(X.rows);
}

namespace {

double gini(std::size_t positives, std::size_t total) {
    if (total == 0) return 0.0;
    const double p = static_cast<double>(positives) / static_cast<double>(total);
    return 1.0 - p * p - (1.0 - p) * (1.0 - p);
}

struct SplitChoice {
    bool found = false;
    int feature = -1;
    double threshold = 0.0;
    double impurity = 0.0;

    // Ordering used for tie-breaking: impurity, then feature, then threshold.
    bool better_than(const SplitChoice& other) const {
        if (!other.found) return found;
        if (impurity != other.impurity) return impurity < other.impurity;
        if (feature != other.feature) return feature < other.feature;
        return threshold < other.threshold;
    }
};

struct TreeGrower {
    const FeatureMatrix& X;
    const std::vector<int>& y;
    int max_depth;
    int mtry;
    std::mt19937_64& rng;
    RandomForestModel::Tree& tree;

    int grow(std::vector<std::size_t>& samples, int depth) {
        std::size_t positives = 0;
        for (std::size_t i : samples) positives += static_cast<std::size_t>(y[i]);

        const bool pure = positives == 0 || positives == samples.size();
        if (depth >= max_depth || pure || samples.size() < 2)
            return make_leaf(positives, samples.size());

        SplitChoice best = pick_split(samples);
        if (!best.found)
            return make_leaf(positives, samples.size());

        std::vector<std::size_t> left, right;
        for (std::size_t i : samples) {
            if (X.at(i, best.feature) <= best.threshold)
                left.push_back(i);
            else
                right.push_back(i);
        }

        const int node_index = static_cast<int>(tree.nodes.size());
        tree.nodes.push_back(RandomForestModel::Node{best.feature, best.threshold, -1, -1, 0.0});
        samples.clear();
        samples.shrink_to_fit();
        tree.nodes[node_index].left = grow(left, depth + 1);
        tree.nodes[node_index].right = grow(right, depth + 1);
        return node_index;
    }

    int make_leaf(std::size_t positives, std::size_t total) {
        RandomForestModel::Node leaf;
        leaf.positive_fraction = static_cast<double>(positives) / static_cast<double>(total);
        tree.nodes.push_back(leaf);
        return static_cast<int>(tree.nodes.size()) - 1;
    }

    SplitChoice pick_split(const std::vector<std::size_t>& samples) {
        // Draw mtry distinct candidate features.
        std::vector<int> features(X.cols);
        std::iota(features.begin(), features.end(), 0);
        for (int i = 0; i < mtry; ++i) {
            std::uniform_int_distribution<int> pick(i, static_cast<int>(X.cols) - 1);
            std::swap(features[i], features[pick(rng)]);
        }
        features.resize(mtry);

        SplitChoice best;
        std::vector<double> values;
        for (int f : features) {
            values.clear();
            for (std::size_t i : samples) values.push_back(X.at(i, f));
            std::sort(values.begin(), values.end());
            values.erase(std::unique(values.begin(), values.end()), values.end());
            for (std::size_t v = 0; v + 1 < values.size(); ++v) {
                const double thr = 0.5 * (values[v] + values[v + 1]);
                std::size_t nl = 0, pl = 0, nr = 0, pr = 0;
                for (std::size_t i : samples) {
                    if (X.at(i, f) <= thr) {
                        ++nl;
                        pl += static_cast<std::size_t>(y[i]);
                    } else {
                        ++nr;
                        pr += static_cast<std::size_t>(y[i]);
                    }
                }
                if (nl == 0 || nr == 0) continue;
                const double impurity =
                    (static_cast<double>(nl) * gini(pl, nl) +
                     static_cast<double>(nr) * gini(pr, nr)) /
                    static_cast<double>(samples.size());
                SplitChoice cand{true, f, thr, impurity};
                if (cand.better_than(best)) best = cand;
            }
        }
        return best;
    }
};

}  // namespace

RandomForestModel train_random_forest(const FeatureMatrix& X, const std::vector<int>& y,
                                      const TrainConfig& cfg) {
    cfg.validate();
    if (y.size() != X.rows)
        throw ValidationError("forest training: label count does not match sample count");
    std::size_t positives = 0;
    for (int v : y) {
        if (v != 0 && v != 1)
            throw ValidationError("forest training: labels must be binary 0/1");
        positives += static_cast<std::size_t>(v);
    }
    if (positives == 0 || positives == y.size())
        throw ValidationError("forest training: both classes must be present");

    RandomForestModel model;
    model.dim = X.cols;
    model.trees.resize(cfg.n_trees);
    const int mtry = std::min<int>(cfg.feature_subsample, static_cast<int>(X.cols));
    for (int t = 0; t < cfg.n_trees; ++t) {
        auto rng = make_rng(cfg.seed, 0x4000 + static_cast<std::uint64_t>(t));
        std::vector<std::size_t> bootstrap(X.rows);
        std::uniform_int_distribution<std::size_t> pick(0, X.rows - 1);
        for (auto& s : bootstrap) s = pick(rng);
        TreeGrower grower{X, y, cfg.max_depth, mtry, rng, model.trees[t]};
        grower.grow(bootstrap, 0);
    }
    model.validate();
    return model;
}

double rf_positive_score(const RandomForestModel& model, std::span<const double> x) {
    if (x.size() != model.dim)
        throw ValidationError("forest scoring: feature dimension " + std::to_string(x.size()) +
                              " does not match model dimension " + std::to_string(model.dim));
    double total = 0.0;
    for (const auto& tree : model.trees) {
        int node = 0;
        while (!tree.nodes[node].is_leaf()) {
            const auto& n = tree.nodes[node];
            node = (x[n.feature] <= n.threshold) ? n.left : n.right;
        }
        total += tree.nodes[node].positive_fraction;
    }
    return total / static_cast<double>(model.trees.size());
}

namespace {

ordered_json config_to_json(const TrainConfig& cfg) {
    return {{"epochs", cfg.epochs},       {"lambda", cfg.lambda},
            {"seed", cfg.seed},           {"n_trees", cfg.n_trees},
            {"max_depth", cfg.max_depth}, {"feature_subsample", cfg.feature_subsample}};
}

ordered_json load_model_json(const std::filesystem::path& path, const char* expected_type) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open model file: " + path.string());
    ordered_json j;
    try {
        in >> j;
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
    if (!j.contains("format") || j.at("format").get<int>() != 1)
        throw ConfigError(path.string() + ": unsupported model format");
    if (j.at("type").get<std::string>() != expected_type)
        throw ConfigError(path.string() + ": expected model type '" +
                          std::string(expected_type) + "'");
    return j;
}

}  // namespace

void save_svm(const LinearSvmModel& model, const TrainConfig& cfg,
              const std::filesystem::path& path) {
    model.validate();
    ordered_json j;
    j["format"] = 1;
    j["type"] = "linear_svm_ovr";
    j["config"] = config_to_json(cfg);
    j["weights"] = model.weights;
    j["biases"] = model.biases;
    atomic_write_text(path, j.dump(2) + "\n");
}

LinearSvmModel load_svm(const std::filesystem::path& path) {
    const ordered_json j = load_model_json(path, "linear_svm_ovr");
    LinearSvmModel model;
    model.weights = j.at("weights").get<std::vector<std::vector<double>>>();
    model.biases = j.at("biases").get<std::vector<double>>();
    model.validate();
    return model;
}

void save_forest(const RandomForestModel& model, const TrainConfig& cfg,
                 const std::filesystem::path& path) {
    model.validate();
    ordered_json trees = ordered_json::array();
    for (const auto& tree : model.trees) {
        ordered_json nodes = ordered_json::array();
        for (const auto& n : tree.nodes)
            nodes.push_back({{"feature", n.feature},
                             {"threshold", n.threshold},
                             {"left", n.left},
                             {"right", n.right},
                             {"positive_fraction", n.positive_fraction}});
        trees.push_back(std::move(nodes));
    }
    ordered_json j;
    j["format"] = 1;
    j["type"] = "random_forest";
    j["config"] = config_to_json(cfg);
    j["dim"] = model.dim;
    j["trees"] = std::move(trees);
    atomic_write_text(path, j.dump(2) + "\n");
}

RandomForestModel load_forest(const std::filesystem::path& path) {
    const ordered_json j = load_model_json(path, "random_forest");
    RandomForestModel model;
    model.dim = j.at("dim").get<std::size_t>();
    for (const auto& tree_json : j.at("trees")) {
        RandomForestModel::Tree tree;
        for (const auto& n : tree_json)
            tree.nodes.push_back(RandomForestModel::Node{
                n.at("feature").get<int>(), n.at("threshold").get<double>(),
                n.at("left").get<int>(), n.at("right").get<int>(),
                n.at("positive_fraction").get<double>()});
        model.trees.push_back(std::move(tree));
    }
    model.validate();
    return model;
}

}  // namespace actdet

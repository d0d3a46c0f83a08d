#include <doctest.h>

#include <random>

#include "actdet/classify.hpp"
#include "actdet/io.hpp"
#include "oracles.hpp"

using namespace actdet;

namespace {

// Two separable 2D blobs around (-2, 0) and (+2, 0), ten points each,
// offsets within +-0.5 so the class gap is at least 1.
void make_blobs(FeatureMatrix& X, std::vector<int>& y) {
    std::mt19937_64 rng(42);
    std::uniform_real_distribution<double> off(-0.5, 0.5);
    std::vector<double> rows;
    y.clear();
    for (int cls = 0; cls < 2; ++cls) {
        const double cx = cls == 0 ? -2.0 : 2.0;
        for (int i = 0; i < 10; ++i) {
            rows.push_back(cx + off(rng));
            rows.push_back(off(rng));
            y.push_back(cls);
        }
    }
    X = FeatureMatrix("blobs", 20, 2, std::move(rows));
}

int predict(const LinearSvmModel& model, std::span<const double> x) {
    const ScoreVector s = svm_scores(model, x);
    return static_cast<int>(std::max_element(s.values.begin(), s.values.end()) -
                            s.values.begin());
}

LinearSvmModel identity_model() {
    LinearSvmModel m;
    m.weights = {{1.0, 0.0}, {0.0, 1.0}};
    m.biases = {0.0, 0.0};
    return m;
}

}  // namespace

TEST_SUITE("classify") {

TEST_CASE("mean pooling with L1 normalization") {
    const FeatureMatrix m("v", 2, 2, {1, 3, 3, 1});
    CHECK(mean_pool_l1(m) == std::vector<double>{0.5, 0.5});

    const FeatureMatrix single("v", 1, 2, {0, -2});
    CHECK(mean_pool_l1(single) == std::vector<double>{0.0, -1.0});

    const FeatureMatrix zero("v", 2, 2, {0, 0, 0, 0});
    CHECK_THROWS_WITH_AS(mean_pool_l1(zero), doctest::Contains("degenerate"),
                         ValidationError);
}

TEST_CASE("svm separates blobs with full training accuracy") {
    FeatureMatrix X;
    std::vector<int> y;
    make_blobs(X, y);
    TrainConfig cfg;
    cfg.epochs = 20;
    cfg.lambda = 0.1;
    cfg.seed = 7;
    const LinearSvmModel model = train_svm_ovr(X, y, cfg);
    for (std::size_t i = 0; i < X.rows; ++i)
        CHECK(predict(model, {X.row(i), 2}) == y[i]);
}

TEST_CASE("svm training is bit-deterministic given the seed") {
    FeatureMatrix X;
    std::vector<int> y;
    make_blobs(X, y);
    TrainConfig cfg;
    cfg.seed = 11;
    const LinearSvmModel a = train_svm_ovr(X, y, cfg);
    const LinearSvmModel b = train_svm_ovr(X, y, cfg);
    CHECK(a.weights == b.weights);
    CHECK(a.biases == b.biases);
}

TEST_CASE("svm rejects degenerate inputs") {
    const FeatureMatrix X("v", 4, 1, {1, 2, 3, 4});
    CHECK_THROWS_AS(train_svm_ovr(X, {0, 0, 0, 0}, TrainConfig{}), ValidationError);
    CHECK_THROWS_AS(train_svm_ovr(X, {0, 1}, TrainConfig{}), ValidationError);
}

TEST_CASE("svm scores are raw margins") {
    const LinearSvmModel m = identity_model();
    const std::vector<double> x = {3.0, -1.0};
    const ScoreVector s = svm_scores(m, x);
    CHECK(s.values == std::vector<double>{3.0, -1.0});

    LinearSvmModel biased = m;
    biased.biases = {0.25, -0.75};
    const std::vector<double> zero = {0.0, 0.0};
    CHECK(svm_scores(biased, zero).values == biased.biases);

    const std::vector<double> wrong = {1.0, 2.0, 3.0};
    CHECK_THROWS_AS(svm_scores(m, wrong), ValidationError);
}

TEST_CASE("single-class svm models are rejected at validation") {
    LinearSvmModel m;
    m.weights = {{1.0, 0.0}};
    m.biases = {0.0};
    CHECK_THROWS_AS(m.validate(), ValidationError);
}

TEST_CASE("frame scores pool per class") {
    const LinearSvmModel m = identity_model();
    const FeatureMatrix frames("v", 2, 2, {1, 0, 3, 2});
    const auto [rows, pooled] = frame_scores(frames, m);
    REQUIRE(rows.size() == 2);
    CHECK(rows[0] == std::vector<double>{1.0, 0.0});
    CHECK(rows[1] == std::vector<double>{3.0, 2.0});
    CHECK(pooled.values == std::vector<double>{2.0, 1.0});
    CHECK(pooled.kind == ScoreKind::c3d);

    const FeatureMatrix one("v", 1, 2, {4, 5});
    const auto [single_rows, single_pooled] = frame_scores(one, m);
    CHECK(single_pooled.values == single_rows[0]);

    const FeatureMatrix constant("v", 3, 2, {2, 7, 2, 7, 2, 7});
    const auto [const_rows, const_pooled] = frame_scores(constant, m);
    CHECK(const_pooled.values == const_rows[0]);
}

TEST_CASE("stacking concatenates the three parts in kind order") {
    const ScoreVector ins("v", {1, 2}, ScoreKind::ins);
    const ScoreVector mbh("v", {3, 4}, ScoreKind::mbh);
    const ScoreVector c3d("v", {5, 6}, ScoreKind::c3d);
    const ScoreVector stacked = stack_scores({ins, mbh, c3d});
    CHECK(stacked.values == std::vector<double>{1, 2, 3, 4, 5, 6});
    CHECK(stacked.kind == ScoreKind::stacked);
    CHECK(stacked.video_id == "v");

    CHECK_THROWS_AS(stack_scores({ins, c3d, c3d}), ValidationError);  // mbh missing
    CHECK_THROWS_AS(stack_scores({ins, mbh}), ValidationError);
    const ScoreVector other("w", {3, 4}, ScoreKind::mbh);
    CHECK_THROWS_AS(stack_scores({ins, other, c3d}), ValidationError);
    const ScoreVector shorter("v", {3.0}, ScoreKind::mbh);
    CHECK_THROWS_AS(stack_scores({ins, shorter, c3d}), ValidationError);
}

TEST_CASE("top-k normalization matches the worked example") {
    const ScoreVector s("v", {0.5, 0.3, 0.2, 0.1}, ScoreKind::stacked);
    const ScoreVector out = topk_normalize(s, 3);
    REQUIRE(out.values.size() == 4);
    CHECK(out.values[0] == doctest::Approx(0.4 / 0.7).epsilon(1e-12));
    CHECK(out.values[1] == doctest::Approx(0.2 / 0.7).epsilon(1e-12));
    CHECK(out.values[2] == doctest::Approx(0.1 / 0.7).epsilon(1e-12));
    CHECK(out.values[3] == 0.0);
    CHECK(out.kind == ScoreKind::fused);
}

TEST_CASE("top-k normalization degenerate and negative cases") {
    const ScoreVector equal("v", {5, 5, 5}, ScoreKind::stacked);
    const auto uniform = topk_normalize(equal, 3).values;
    for (double v : uniform) CHECK(v == doctest::Approx(1.0 / 3).epsilon(1e-15));

    const ScoreVector negative("v", {-1, -3}, ScoreKind::stacked);
    CHECK(topk_normalize(negative, 1).values == std::vector<double>{1.0, 0.0});

    CHECK_THROWS_AS(topk_normalize(negative, 0), ValidationError);
    CHECK_THROWS_AS(topk_normalize(negative, 3), ValidationError);
}

TEST_CASE("top-k normalization preserves ranking") {
    std::mt19937_64 rng(123);
    std::uniform_real_distribution<double> value(-10.0, 10.0);
    std::uniform_int_distribution<int> size(2, 12);
    for (int trial = 0; trial < 200; ++trial) {
        const int C = size(rng);
        std::vector<double> values(C);
        for (double& v : values) v = value(rng);
        if (trial % 5 == 0)
            for (double& v : values) v = -std::fabs(v);  // all negative
        const ScoreVector s("v", values, ScoreKind::stacked);
        const int k = std::uniform_int_distribution<int>(1, C)(rng);
        const auto out = topk_normalize(s, k).values;
        for (int i = 0; i < C; ++i)
            for (int j = 0; j < C; ++j) {
                if (values[i] < values[j]) CHECK(out[i] < out[j]);
                if (values[i] == values[j]) CHECK(out[i] == out[j]);
            }
    }
}

TEST_CASE("top-k of a min-zero vector sums to one over the top entries") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> value(0.0, 1.0);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<double> values(6);
        for (double& v : values) v = value(rng);
        values[trial % 6] = 0.0;  // min is zero, so no shift happens
        const int k = 3;
        const auto out = topk_normalize(ScoreVector("v", values, ScoreKind::stacked), k);
        std::vector<double> sorted = out.values;
        std::sort(sorted.begin(), sorted.end(), std::greater<double>());
        double top = 0.0;
        for (int i = 0; i < k; ++i) top += sorted[i];
        CHECK(top == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("svm objective is non-increasing over epochs") {
    FeatureMatrix X;
    std::vector<int> y;
    make_blobs(X, y);
    TrainConfig cfg;
    cfg.lambda = 0.1;
    cfg.seed = 3;
    double prev0 = -1.0, prev1 = -1.0;
    for (int epochs = 1; epochs <= 8; ++epochs) {
        cfg.epochs = epochs;
        const LinearSvmModel model = train_svm_ovr(X, y, cfg);
        const double obj0 = svm_objective(model, X, y, 0, cfg.lambda);
        const double obj1 = svm_objective(model, X, y, 1, cfg.lambda);
        if (epochs > 1) {
            CHECK(obj0 <= prev0 + 1e-9);
            CHECK(obj1 <= prev1 + 1e-9);
        }
        prev0 = obj0;
        prev1 = obj1;
    }
}

TEST_CASE("random forest fits 1D threshold data") {
    // x < 0 -> 0, x > 0 -> 1, with a gap at zero.
    std::vector<double> xs;
    std::vector<int> y;
    for (int i = 0; i < 10; ++i) {
        xs.push_back(-1.0 - 0.1 * i);
        y.push_back(0);
        xs.push_back(1.0 + 0.1 * i);
        y.push_back(1);
    }
    const FeatureMatrix X("f", 20, 1, xs);
    TrainConfig cfg;
    cfg.n_trees = 10;
    cfg.max_depth = 3;
    cfg.seed = 5;
    const RandomForestModel forest = train_random_forest(X, y, cfg);

    for (std::size_t i = 0; i < X.rows; ++i) {
        const double score = rf_positive_score(forest, {X.row(i), 1});
        CHECK((score >= 0.5) == (y[i] == 1));
        CHECK(score >= 0.0);
        CHECK(score <= 1.0);
    }
    const double far = 2.0;
    CHECK(rf_positive_score(forest, {&far, 1}) >= 0.9);

    const RandomForestModel again = train_random_forest(X, y, cfg);
    REQUIRE(again.trees.size() == forest.trees.size());
    for (std::size_t t = 0; t < forest.trees.size(); ++t) {
        REQUIRE(again.trees[t].nodes.size() == forest.trees[t].nodes.size());
        for (std::size_t n = 0; n < forest.trees[t].nodes.size(); ++n) {
            CHECK(again.trees[t].nodes[n].feature == forest.trees[t].nodes[n].feature);
            CHECK(again.trees[t].nodes[n].threshold == forest.trees[t].nodes[n].threshold);
            CHECK(again.trees[t].nodes[n].positive_fraction ==
                  forest.trees[t].nodes[n].positive_fraction);
        }
    }

    CHECK_THROWS_AS(train_random_forest(X, std::vector<int>(20, 1), cfg), ValidationError);
}

TEST_CASE("forest score is the mean leaf fraction") {
    RandomForestModel m;
    m.dim = 1;
    RandomForestModel::Tree pos, neg;
    pos.nodes.push_back(RandomForestModel::Node{-1, 0, -1, -1, 1.0});
    neg.nodes.push_back(RandomForestModel::Node{-1, 0, -1, -1, 0.0});

    m.trees = {pos, pos, pos};
    const double x = 0.3;
    CHECK(rf_positive_score(m, {&x, 1}) == 1.0);

    m.trees = {pos, neg, pos, neg};
    CHECK(rf_positive_score(m, {&x, 1}) == 0.5);

    const std::vector<double> wrong = {1.0, 2.0};
    CHECK_THROWS_AS(rf_positive_score(m, wrong), ValidationError);
}

TEST_CASE("model files round-trip through JSON") {
    const auto dir = oracles::fresh_dir("models");
    FeatureMatrix X;
    std::vector<int> y;
    make_blobs(X, y);
    TrainConfig cfg;
    cfg.epochs = 5;
    const LinearSvmModel svm = train_svm_ovr(X, y, cfg);
    save_svm(svm, cfg, dir / "svm.json");
    const LinearSvmModel svm2 = load_svm(dir / "svm.json");
    CHECK(svm2.weights == svm.weights);
    CHECK(svm2.biases == svm.biases);
    CHECK(oracles::slurp(dir / "svm.json").find("\"format\": 1") != std::string::npos);

    std::vector<double> xs;
    std::vector<int> fy;
    for (int i = 0; i < 8; ++i) {
        xs.push_back(i < 4 ? -1.0 - i : 1.0 + i);
        fy.push_back(i < 4 ? 0 : 1);
    }
    const RandomForestModel forest =
        train_random_forest(FeatureMatrix("f", 8, 1, xs), fy, cfg);
    save_forest(forest, cfg, dir / "rf.json");
    const RandomForestModel forest2 = load_forest(dir / "rf.json");
    const double probe = 1.5;
    CHECK(rf_positive_score(forest2, {&probe, 1}) ==
          rf_positive_score(forest, {&probe, 1}));
}

}  // TEST_SUITE

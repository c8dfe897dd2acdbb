#include "doctest.h"

#include <cmath>
#include <string>
#include <variant>
#include <vector>

#include "stepcast/core.hpp"
#include "stepcast/model_io.hpp"

namespace {

using stepcast::Error;
using stepcast::ErrorKind;
using stepcast::Matrix;
using stepcast::Rng;
using namespace stepcast::models;

// Awkward doubles on purpose: negative zero, denormals, huge magnitudes and
// values with no short decimal form all have to survive the round trip.
const double kAwkward[] = {0.0, -0.0, 1.0 / 3.0, 5e-324, 1.7976931348623157e308,
                           -2.2250738585072014e-308, 0.1, 123456789.123456789};

LassoModel sample_lasso() {
    LassoModel model;
    model.weights = {kAwkward[1], kAwkward[2], kAwkward[3], kAwkward[7]};
    model.intercept = kAwkward[6];
    model.alpha = 0.015625;
    model.n_iterations_run = 37;
    model.converged = true;
    return model;
}

SvmModel sample_svm() {
    SvmModel model;
    model.weights = {kAwkward[4], kAwkward[5], 3.5};
    model.bias = kAwkward[2];
    model.bias_aug = -1.25;
    model.C = 100.0;
    model.dual_objective = kAwkward[7];
    model.n_epochs_run = 12;
    model.converged = false;
    model.alphas = {0.0, 0.5, 100.0};
    return model;
}

CentroidModel sample_centroid() {
    CentroidModel model;
    model.class_centroids = Matrix(2, 3);
    for (std::size_t i = 0; i < 2; ++i)
        for (std::size_t j = 0; j < 3; ++j)
            model.class_centroids.at(i, j) = kAwkward[(i * 3 + j) % 8];
    model.metric = CentroidMetric::Cosine;
    model.shrink_threshold = 0.3;
    model.classes = {0, 1};
    return model;
}

PcaModel sample_pca() {
    PcaModel model;
    model.components = Matrix(2, 4);
    Rng rng(9);
    for (auto& v : model.components.data) v = rng.normal();
    model.explained_variance = {2.5, kAwkward[2]};
    model.explained_variance_ratio = {0.8, 0.2};
    model.mean = {1.0, -2.0, kAwkward[3], 0.0};
    model.clamped = true;
    return model;
}

TreeEnsembleModel sample_tree() {
    TreeEnsembleModel model;
    Tree tree;
    TreeNode split;
    split.feature = 2;
    split.threshold = kAwkward[7];
    split.left = 1;
    split.right = 2;
    TreeNode left;
    left.label = 0;
    TreeNode right;
    right.label = 1;
    tree.nodes = {split, left, right};
    model.trees = {tree, tree};
    model.importances = {0.0, 0.25, 0.75};
    model.n_estimators = 2;
    model.seed = 0xDEADBEEFCAFEF00DULL;
    model.classes = {0, 1};
    return model;
}

}  // namespace

TEST_CASE("every model type survives serialization bit for bit") {
    std::vector<AnyModel> models = {sample_lasso(), sample_svm(), sample_centroid(),
                                    sample_pca(), sample_tree()};
    std::vector<std::string> names = {"lasso", "svm", "centroid", "pca", "tree_ensemble"};

    for (std::size_t m = 0; m < models.size(); ++m) {
        CHECK(model_type_name(models[m]) == names[m]);
        std::string text = serialize_model(models[m]);
        AnyModel back = deserialize_model(text);
        CHECK(model_type_name(back) == names[m]);
        // Re-serializing the reparsed model must reproduce the text exactly;
        // with hex-float encoding that pins every bit of every double.
        CHECK(serialize_model(back) == text);
    }
}

TEST_CASE("deserialized lasso models compare field for field") {
    LassoModel original = sample_lasso();
    AnyModel back = deserialize_model(serialize_model(original));
    REQUIRE(std::holds_alternative<LassoModel>(back));
    const auto& model = std::get<LassoModel>(back);

    REQUIRE(model.weights.size() == original.weights.size());
    for (std::size_t j = 0; j < model.weights.size(); ++j) {
        // Bit-level equality, so -0.0 keeps its sign and denormals survive.
        CHECK(std::signbit(model.weights[j]) == std::signbit(original.weights[j]));
        CHECK(model.weights[j] == original.weights[j]);
    }
    CHECK(model.intercept == original.intercept);
    CHECK(model.alpha == original.alpha);
    CHECK(model.n_iterations_run == original.n_iterations_run);
    CHECK(model.converged == original.converged);
}

TEST_CASE("deserialized svm and centroid models keep their structure") {
    AnyModel svm_back = deserialize_model(serialize_model(sample_svm()));
    REQUIRE(std::holds_alternative<SvmModel>(svm_back));
    const auto& svm = std::get<SvmModel>(svm_back);
    CHECK(svm.alphas == sample_svm().alphas);
    CHECK(svm.C == 100.0);
    CHECK_FALSE(svm.converged);

    AnyModel centroid_back = deserialize_model(serialize_model(sample_centroid()));
    REQUIRE(std::holds_alternative<CentroidModel>(centroid_back));
    const auto& centroid = std::get<CentroidModel>(centroid_back);
    CHECK(centroid.metric == CentroidMetric::Cosine);
    REQUIRE(centroid.shrink_threshold.has_value());
    CHECK(*centroid.shrink_threshold == 0.3);
    CHECK(centroid.class_centroids.rows == 2);
    CHECK(centroid.class_centroids.cols == 3);
    CHECK(centroid.class_centroids.data == sample_centroid().class_centroids.data);

    CentroidModel no_shrink = sample_centroid();
    no_shrink.shrink_threshold.reset();
    AnyModel no_shrink_back = deserialize_model(serialize_model(no_shrink));
    CHECK_FALSE(std::get<CentroidModel>(no_shrink_back).shrink_threshold.has_value());
}

TEST_CASE("deserialized tree ensembles keep every node") {
    TreeEnsembleModel original = sample_tree();
    AnyModel back = deserialize_model(serialize_model(original));
    REQUIRE(std::holds_alternative<TreeEnsembleModel>(back));
    const auto& model = std::get<TreeEnsembleModel>(back);

    CHECK(model.seed == original.seed);
    CHECK(model.importances == original.importances);
    REQUIRE(model.trees.size() == 2);
    for (const auto& tree : model.trees) {
        REQUIRE(tree.nodes.size() == 3);
        CHECK(tree.nodes[0].feature == 2);
        CHECK(tree.nodes[0].threshold == original.trees[0].nodes[0].threshold);
        CHECK(tree.nodes[0].left == 1);
        CHECK(tree.nodes[0].right == 2);
        CHECK(tree.nodes[1].label == 0);
        CHECK(tree.nodes[2].label == 1);
    }
}

TEST_CASE("bundles carry model, schema, config and scaler through the round trip") {
    PredictorBundle bundle;
    bundle.model = sample_svm();
    bundle.config.cutoff_hour = 13;
    bundle.config.window = stepcast::features::Window::Last4Hours;
    bundle.config.include_cumulative = false;
    bundle.config.include_yesterday = true;
    bundle.config.include_weekday = false;
    bundle.config.include_weather = true;
    bundle.config.goal_override = 12500;
    bundle.scaler.means = {kAwkward[2], 5.0, 0.0};
    bundle.scaler.scales = {1.0, kAwkward[7], 2.0};
    bundle.columns = {"steps_h10", "steps_h11", "steps_h12"};

    std::string text = serialize_bundle(bundle);
    PredictorBundle back = deserialize_bundle(text);

    CHECK(model_type_name(back.model) == "svm");
    CHECK(back.config.cutoff_hour == 13);
    CHECK(back.config.window == stepcast::features::Window::Last4Hours);
    CHECK(back.config.include_yesterday);
    CHECK(back.config.include_weather);
    REQUIRE(back.config.goal_override.has_value());
    CHECK(*back.config.goal_override == 12500);
    CHECK(back.scaler.means == bundle.scaler.means);
    CHECK(back.scaler.scales == bundle.scaler.scales);
    CHECK(back.columns == bundle.columns);
    CHECK(serialize_bundle(back) == text);
}

TEST_CASE("malformed model documents raise typed errors") {
    try {
        deserialize_model("this is not json");
        FAIL("expected a parse rejection");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::MalformedDocument);
    }

    try {
        deserialize_model(R"({"type": "perceptron"})");
        FAIL("expected an unknown-type rejection");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::MalformedDocument);
    }

    // A structurally valid document with a missing field.
    try {
        deserialize_model(R"({"type": "lasso", "weights": ["0x1p+0"]})");
        FAIL("expected a missing-field rejection");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::MalformedDocument);
    }

    try {
        deserialize_bundle(R"({"model": {}})");
        FAIL("expected a bundle rejection");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::MalformedDocument);
    }
}

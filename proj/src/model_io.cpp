#include "stepcast/model_io.hpp"

#include "json.hpp"

namespace stepcast::models {

using nlohmann::json;

namespace {

json hex_array(const std::vector<double>& values) {
    json arr = json::array();
    for (double v : values) arr.push_back(double_to_hex(v));
    return arr;
}

std::vector<double> parse_hex_array(const json& arr, const char* what) {
    if (!arr.is_array()) fail(ErrorKind::MalformedDocument, std::string(what) + " must be an array");
    std::vector<double> out;
    out.reserve(arr.size());
    for (const auto& item : arr) {
        if (!item.is_string())
            fail(ErrorKind::MalformedDocument, std::string(what) + " entries must be hex strings");
        out.push_back(double_from_hex(item.get<std::string>()));
    }
    return out;
}

json matrix_to_json(const Matrix& m) {
    return json{{"rows", m.rows}, {"cols", m.cols}, {"data", hex_array(m.data)}};
}

Matrix matrix_from_json(const json& j, const char* what) {
    if (!j.is_object() || !j.contains("rows") || !j.contains("cols") || !j.contains("data"))
        fail(ErrorKind::MalformedDocument, std::string(what) + " must carry rows/cols/data");
    Matrix m(j.at("rows").get<std::size_t>(), j.at("cols").get<std::size_t>());
    std::vector<double> data = parse_hex_array(j.at("data"), what);
    if (data.size() != m.rows * m.cols)
        fail(ErrorKind::MalformedDocument, std::string(what) + " data length mismatch");
    m.data = std::move(data);
    return m;
}

json to_json(const LassoModel& m) {
    return json{{"type", "lasso"},
                {"alpha", double_to_hex(m.alpha)},
                {"intercept", double_to_hex(m.intercept)},
                {"weights", hex_array(m.weights)},
                {"n_iterations_run", m.n_iterations_run},
                {"converged", m.converged}};
}

json to_json(const PcaModel& m) {
    return json{{"type", "pca"},
                {"mean", hex_array(m.mean)},
                {"components", matrix_to_json(m.components)},
                {"explained_variance", hex_array(m.explained_variance)},
                {"explained_variance_ratio", hex_array(m.explained_variance_ratio)},
                {"clamped", m.clamped}};
}

json to_json(const TreeEnsembleModel& m) {
    json trees = json::array();
    for (const auto& tree : m.trees) {
        json nodes = json::array();
        for (const auto& node : tree.nodes)
            nodes.push_back(json::array(
                {node.feature, double_to_hex(node.threshold), node.left, node.right, node.label}));
        trees.push_back(std::move(nodes));
    }
    return json{{"type", "tree_ensemble"},
                {"n_estimators", m.n_estimators},
                {"seed", m.seed},
                {"classes", m.classes},
                {"importances", hex_array(m.importances)},
                {"trees", std::move(trees)}};
}

json to_json(const CentroidModel& m) {
    json j{{"type", "centroid"},
           {"metric", to_string(m.metric)},
           {"classes", m.classes},
           {"centroids", matrix_to_json(m.class_centroids)}};
    j["shrink_threshold"] =
        m.shrink_threshold ? json(double_to_hex(*m.shrink_threshold)) : json(nullptr);
    return j;
}

json to_json(const SvmModel& m) {
    return json{{"type", "svm"},
                {"C", double_to_hex(m.C)},
                {"bias", double_to_hex(m.bias)},
                {"bias_aug", double_to_hex(m.bias_aug)},
                {"dual_objective", double_to_hex(m.dual_objective)},
                {"weights", hex_array(m.weights)},
                {"alphas", hex_array(m.alphas)},
                {"n_epochs_run", m.n_epochs_run},
                {"converged", m.converged}};
}

json model_to_json(const AnyModel& model) {
    return std::visit([](const auto& m) { return to_json(m); }, model);
}

AnyModel model_from_json(const json& j) {
    if (!j.is_object() || !j.contains("type"))
        fail(ErrorKind::MalformedDocument, "model document needs a type tag");
    std::string type = j.at("type").get<std::string>();
    if (type == "lasso") {
        LassoModel m;
        m.alpha = double_from_hex(j.at("alpha").get<std::string>());
        m.intercept = double_from_hex(j.at("intercept").get<std::string>());
        m.weights = parse_hex_array(j.at("weights"), "weights");
        m.n_iterations_run = j.at("n_iterations_run").get<int>();
        m.converged = j.at("converged").get<bool>();
        return m;
    }
    if (type == "pca") {
        PcaModel m;
        m.mean = parse_hex_array(j.at("mean"), "mean");
        m.components = matrix_from_json(j.at("components"), "components");
        m.explained_variance = parse_hex_array(j.at("explained_variance"), "explained_variance");
        m.explained_variance_ratio =
            parse_hex_array(j.at("explained_variance_ratio"), "explained_variance_ratio");
        m.clamped = j.at("clamped").get<bool>();
        return m;
    }
    if (type == "tree_ensemble") {
        TreeEnsembleModel m;
        m.n_estimators = j.at("n_estimators").get<int>();
        m.seed = j.at("seed").get<std::uint64_t>();
        m.classes = j.at("classes").get<std::vector<int>>();
        m.importances = parse_hex_array(j.at("importances"), "importances");
        for (const auto& tree_json : j.at("trees")) {
            Tree tree;
            for (const auto& node_json : tree_json) {
                if (!node_json.is_array() || node_json.size() != 5)
                    fail(ErrorKind::MalformedDocument, "tree node must be a 5-tuple");
                TreeNode node;
                node.feature = node_json[0].get<int>();
                node.threshold = double_from_hex(node_json[1].get<std::string>());
                node.left = node_json[2].get<int>();
                node.right = node_json[3].get<int>();
                node.label = node_json[4].get<int>();
                tree.nodes.push_back(node);
            }
            m.trees.push_back(std::move(tree));
        }
        return m;
    }
    if (type == "centroid") {
        CentroidModel m;
        auto metric = parse_centroid_metric(j.at("metric").get<std::string>());
        if (!metric) fail(ErrorKind::MalformedDocument, "unknown centroid metric");
        m.metric = *metric;
        m.classes = j.at("classes").get<std::vector<int>>();
        m.class_centroids = matrix_from_json(j.at("centroids"), "centroids");
        const auto& t = j.at("shrink_threshold");
        if (!t.is_null()) m.shrink_threshold = double_from_hex(t.get<std::string>());
        return m;
    }
    if (type == "svm") {
        SvmModel m;
        m.C = double_from_hex(j.at("C").get<std::string>());
        m.bias = double_from_hex(j.at("bias").get<std::string>());
        m.bias_aug = double_from_hex(j.at("bias_aug").get<std::string>());
        m.dual_objective = double_from_hex(j.at("dual_objective").get<std::string>());
        m.weights = parse_hex_array(j.at("weights"), "weights");
        m.alphas = parse_hex_array(j.at("alphas"), "alphas");
        m.n_epochs_run = j.at("n_epochs_run").get<int>();
        m.converged = j.at("converged").get<bool>();
        return m;
    }
    fail(ErrorKind::MalformedDocument, "unknown model type " + type);
}

json config_to_json(const features::FeatureConfig& config) {
    json j{{"cutoff_hour", config.cutoff_hour},
           {"window", config.window == features::Window::Last4Hours ? "last4" : "all"},
           {"include_cumulative", config.include_cumulative},
           {"include_yesterday", config.include_yesterday},
           {"include_weekday", config.include_weekday},
           {"include_weather", config.include_weather},
           {"include_place", config.include_place}};
    j["goal_override"] = config.goal_override ? json(*config.goal_override) : json(nullptr);
    return j;
}

features::FeatureConfig config_from_json(const json& j) {
    features::FeatureConfig config;
    config.cutoff_hour = j.at("cutoff_hour").get<int>();
    std::string window = j.at("window").get<std::string>();
    if (window == "last4")
        config.window = features::Window::Last4Hours;
    else if (window == "all")
        config.window = features::Window::AllHoursToCutoff;
    else
        fail(ErrorKind::MalformedDocument, "unknown window " + window);
    config.include_cumulative = j.at("include_cumulative").get<bool>();
    config.include_yesterday = j.at("include_yesterday").get<bool>();
    config.include_weekday = j.at("include_weekday").get<bool>();
    config.include_weather = j.at("include_weather").get<bool>();
    config.include_place = j.at("include_place").get<bool>();
    const auto& goal = j.at("goal_override");
    if (!goal.is_null()) config.goal_override = goal.get<std::uint32_t>();
    return config;
}

}  // namespace

std::string model_type_name(const AnyModel& model) {
    return std::visit(
        [](const auto& m) -> std::string {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, LassoModel>) return "lasso";
            if constexpr (std::is_same_v<T, PcaModel>) return "pca";
            if constexpr (std::is_same_v<T, TreeEnsembleModel>) return "tree_ensemble";
            if constexpr (std::is_same_v<T, CentroidModel>) return "centroid";
            if constexpr (std::is_same_v<T, SvmModel>) return "svm";
        },
        model);
}

std::string serialize_model(const AnyModel& model) { return model_to_json(model).dump(2) + "\n"; }

AnyModel deserialize_model(const std::string& text) {
    json j = json::parse(text, nullptr, false);
    if (j.is_discarded()) fail(ErrorKind::MalformedDocument, "model document is not valid JSON");
    try {
        return model_from_json(j);
    } catch (const json::exception& e) {
        fail(ErrorKind::MalformedDocument, std::string("model document: ") + e.what());
    }
}

std::string serialize_bundle(const PredictorBundle& bundle) {
    json j{{"kind", "predictor_bundle"},
           {"model", model_to_json(bundle.model)},
           {"feature_config", config_to_json(bundle.config)},
           {"scaler", json{{"means", hex_array(bundle.scaler.means)},
                           {"scales", hex_array(bundle.scaler.scales)}}},
           {"columns", bundle.columns}};
    return j.dump(2) + "\n";
}

PredictorBundle deserialize_bundle(const std::string& text) {
    json j = json::parse(text, nullptr, false);
    if (j.is_discarded()) fail(ErrorKind::MalformedDocument, "bundle is not valid JSON");
    try {
        if (j.value("kind", "") != "predictor_bundle")
            fail(ErrorKind::MalformedDocument, "not a predictor bundle");
        PredictorBundle bundle;
        bundle.model = model_from_json(j.at("model"));
        bundle.config = config_from_json(j.at("feature_config"));
        bundle.scaler.means = parse_hex_array(j.at("scaler").at("means"), "scaler means");
        bundle.scaler.scales = parse_hex_array(j.at("scaler").at("scales"), "scaler scales");
        bundle.columns = j.at("columns").get<std::vector<std::string>>();
        return bundle;
    } catch (const json::exception& e) {
        fail(ErrorKind::MalformedDocument, std::string("bundle: ") + e.what());
    }
}

}  // namespace stepcast::models

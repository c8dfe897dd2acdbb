#pragma once

#include <string>
#include <variant>
#include <vector>

#include "stepcast/centroid.hpp"
#include "stepcast/features.hpp"
#include "stepcast/lasso.hpp"
#include "stepcast/pca.hpp"
#include "stepcast/svm.hpp"
#include "stepcast/tree.hpp"

namespace stepcast::models {

using AnyModel = std::variant<LassoModel, PcaModel, TreeEnsembleModel, CentroidModel, SvmModel>;

// Type tag used in the JSON documents: lasso, pca, tree_ensemble, centroid, svm.
std::string model_type_name(const AnyModel& model);

// JSON text with every double encoded as a hex-float string, so a serialize/
// deserialize round trip reproduces the model bit for bit.
std::string serialize_model(const AnyModel& model);
AnyModel deserialize_model(const std::string& text);

// Everything needed to score a raw day later: the fitted model plus the
// feature schema and scaling that were in effect at training time.
struct PredictorBundle {
    AnyModel model;
    features::FeatureConfig config;
    features::Scaler scaler;
    std::vector<std::string> columns;
};

std::string serialize_bundle(const PredictorBundle& bundle);
PredictorBundle deserialize_bundle(const std::string& text);

}  // namespace stepcast::models

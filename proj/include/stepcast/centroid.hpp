#pragma once

#include <optional>
#include <span>
#include <vector>

#include "stepcast/core.hpp"

namespace stepcast::models {

enum class CentroidMetric { Euclidean, Cosine, Manhattan };

const char* to_string(CentroidMetric metric);
std::optional<CentroidMetric> parse_centroid_metric(const std::string& name);

// Nearest-centroid classifier with optional soft-threshold shrinkage toward
// the overall mean.
struct CentroidModel {
    Matrix class_centroids;  // one row per entry of classes
    CentroidMetric metric = CentroidMetric::Euclidean;
    std::optional<double> shrink_threshold;
    std::vector<int> classes;  // ascending
};

// Per-class arithmetic means. With a positive shrink_threshold t, each
// centroid coordinate moves toward the overall mean:
//   c'_kj = m_j + sign(c_kj - m_j) * max(|c_kj - m_j| - t * (s_j + s0), 0)
// where s_j is the pooled within-class standard deviation of feature j and
// s0 is the median of the s_j (keeps constant features well defined).
// A threshold of exactly 0 (or none) leaves the centroids bit-identical to
// the unshrunk means. `class_list` forces the class set; a listed class with
// no rows raises EmptyClass.
CentroidModel centroid_fit(const Matrix& X, const std::vector<int>& y_class,
                           CentroidMetric metric = CentroidMetric::Euclidean,
                           std::optional<double> shrink_threshold = std::nullopt,
                           const std::vector<int>* class_list = nullptr);

// Nearest centroid under model.metric; cosine distance is 1 - similarity and
// rejects a zero query or zero centroid. Ties go to the class listed first.
int centroid_predict(const CentroidModel& model, std::span<const double> x);

}  // namespace stepcast::models

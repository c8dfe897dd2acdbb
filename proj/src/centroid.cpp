#include "stepcast/centroid.hpp"

#include <algorithm>
#include <cmath>

namespace stepcast::models {

const char* to_string(CentroidMetric metric) {
    switch (metric) {
        case CentroidMetric::Euclidean: return "euclidean";
        case CentroidMetric::Cosine: return "cosine";
        case CentroidMetric::Manhattan: return "manhattan";
    }
    return "?";
}

std::optional<CentroidMetric> parse_centroid_metric(const std::string& name) {
    if (name == "euclidean") return CentroidMetric::Euclidean;
    if (name == "cosine") return CentroidMetric::Cosine;
    if (name == "manhattan") return CentroidMetric::Manhattan;
    return std::nullopt;
}

CentroidModel centroid_fit(const Matrix& X, const std::vector<int>& y_class,
                           CentroidMetric metric, std::optional<double> shrink_threshold,
                           const std::vector<int>* class_list) {
    if (X.rows == 0) fail(ErrorKind::EmptyInput, "centroid_fit needs at least one row");
    if (y_class.size() != X.rows) fail(ErrorKind::DimensionMismatch, "label length mismatch");
    if (shrink_threshold && *shrink_threshold < 0.0)
        fail(ErrorKind::InvalidValue, "shrink_threshold must be non-negative");

    CentroidModel model;
    model.metric = metric;
    model.shrink_threshold = shrink_threshold;
    if (class_list) {
        model.classes = *class_list;
        std::sort(model.classes.begin(), model.classes.end());
        model.classes.erase(std::unique(model.classes.begin(), model.classes.end()),
                            model.classes.end());
    } else {
        model.classes = y_class;
        std::sort(model.classes.begin(), model.classes.end());
        model.classes.erase(std::unique(model.classes.begin(), model.classes.end()),
                            model.classes.end());
    }

    std::size_t k = model.classes.size();
    std::size_t d = X.cols;
    auto class_index = [&](int label) -> std::size_t {
        auto it = std::lower_bound(model.classes.begin(), model.classes.end(), label);
        if (it == model.classes.end() || *it != label)
            fail(ErrorKind::InvalidValue,
                 "label " + std::to_string(label) + " is not in the class list");
        return static_cast<std::size_t>(it - model.classes.begin());
    };

    model.class_centroids = Matrix(k, d);
    std::vector<std::size_t> counts(k, 0);
    for (std::size_t i = 0; i < X.rows; ++i) {
        std::size_t c = class_index(y_class[i]);
        ++counts[c];
        auto row = X.row(i);
        for (std::size_t j = 0; j < d; ++j) model.class_centroids.at(c, j) += row[j];
    }
    for (std::size_t c = 0; c < k; ++c) {
        if (counts[c] == 0)
            fail(ErrorKind::EmptyClass,
                 "class " + std::to_string(model.classes[c]) + " has no rows");
        for (std::size_t j = 0; j < d; ++j)
            model.class_centroids.at(c, j) /= static_cast<double>(counts[c]);
    }

    if (!shrink_threshold || *shrink_threshold == 0.0) return model;

    std::vector<double> overall(d, 0.0);
    for (std::size_t i = 0; i < X.rows; ++i) {
        auto row = X.row(i);
        for (std::size_t j = 0; j < d; ++j) overall[j] += row[j];
    }
    for (auto& v : overall) v /= static_cast<double>(X.rows);

    // Pooled within-class standard deviation per feature. With n == k every
    // class is a single point and the pooled scatter is defined as zero.
    std::vector<double> pooled(d, 0.0);
    if (X.rows > k) {
        for (std::size_t i = 0; i < X.rows; ++i) {
            std::size_t c = class_index(y_class[i]);
            auto row = X.row(i);
            for (std::size_t j = 0; j < d; ++j) {
                double dev = row[j] - model.class_centroids.at(c, j);
                pooled[j] += dev * dev;
            }
        }
        double denom = static_cast<double>(X.rows - k);
        for (auto& v : pooled) v = std::sqrt(v / denom);
    }
    std::vector<double> sorted = pooled;
    std::sort(sorted.begin(), sorted.end());
    double median = d % 2 == 1 ? sorted[d / 2] : 0.5 * (sorted[d / 2 - 1] + sorted[d / 2]);

    double t = *shrink_threshold;
    for (std::size_t c = 0; c < k; ++c) {
        for (std::size_t j = 0; j < d; ++j) {
            double dev = model.class_centroids.at(c, j) - overall[j];
            double slack = std::abs(dev) - t * (pooled[j] + median);
            double shrunk = slack > 0.0 ? (dev > 0.0 ? slack : -slack) : 0.0;
            model.class_centroids.at(c, j) = overall[j] + shrunk;
        }
    }
    return model;
}

namespace {

double squared_euclidean(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) {
        double diff = a[j] - b[j];
        s += diff * diff;
    }
    return s;
}

double manhattan(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) s += std::abs(a[j] - b[j]);
    return s;
}

double norm(std::span<const double> a) { return std::sqrt(dot(a, a)); }

}  // namespace

int centroid_predict(const CentroidModel& model, std::span<const double> x) {
    std::size_t k = model.classes.size();
    if (k == 0) fail(ErrorKind::EmptyInput, "model has no classes");
    if (x.size() != model.class_centroids.cols)
        fail(ErrorKind::DimensionMismatch, "query length does not match centroids");

    double x_norm = 0.0;
    if (model.metric == CentroidMetric::Cosine) {
        x_norm = norm(x);
        if (x_norm == 0.0) fail(ErrorKind::ZeroVector, "cosine distance undefined for zero query");
        for (std::size_t c = 0; c < k; ++c)
            if (norm(model.class_centroids.row(c)) == 0.0)
                fail(ErrorKind::ZeroVector,
                     "cosine distance undefined for zero centroid of class " +
                         std::to_string(model.classes[c]));
    }

    std::size_t best = 0;
    double best_distance = 0.0;
    for (std::size_t c = 0; c < k; ++c) {
        auto centroid = model.class_centroids.row(c);
        double distance = 0.0;
        switch (model.metric) {
            case CentroidMetric::Euclidean: distance = squared_euclidean(x, centroid); break;
            case CentroidMetric::Manhattan: distance = manhattan(x, centroid); break;
            case CentroidMetric::Cosine:
                distance = 1.0 - dot(x, centroid) / (x_norm * norm(centroid));
                break;
        }
        if (c == 0 || distance < best_distance) {  // strict: ties keep the earlier class
            best = c;
            best_distance = distance;
        }
    }
    return model.classes[best];
}

}  // namespace stepcast::models

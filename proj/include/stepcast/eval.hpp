#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "stepcast/centroid.hpp"
#include "stepcast/features.hpp"
#include "stepcast/svm.hpp"

namespace stepcast::eval {

// Partition of row indices into k folds. Unshuffled folds are contiguous
// blocks (the first n mod k folds get the extra row); shuffled mode applies
// a seeded permutation first.
struct FoldSpec {
    std::size_t n_rows = 0;
    int k = 5;
    std::vector<int> assignment;  // row index -> fold id
    bool shuffled = false;
    std::optional<std::uint64_t> seed;
};

FoldSpec kfold(std::size_t n_rows, int k = 5, bool shuffled = false, std::uint64_t seed = 0);

// Keeps all rows of one group (user) in one fold, assigning groups round
// robin in first-appearance order. Fold sizes may differ by more than one.
FoldSpec kfold_grouped(const std::vector<std::string>& row_groups, int k = 5);

enum class ModelFamily { Lasso, Centroid, Svm };

const char* to_string(ModelFamily family);
std::optional<ModelFamily> parse_model_family(const std::string& name);

// One concrete model configuration. Only the fields of the named family are
// meaningful; the rest keep their defaults.
struct ModelSpec {
    ModelFamily family = ModelFamily::Svm;
    double alpha = 1.0;  // lasso
    double C = 1.0;      // svm
    bool shrinking = true;
    models::KernelType kernel = models::KernelType::Linear;
    models::CentroidMetric metric = models::CentroidMetric::Euclidean;
    std::optional<double> shrink_threshold;  // centroid
    std::uint64_t seed = 0;

    // Semicolon-separated key=value list, e.g. "C=1;kernel=linear;shrinking=true".
    std::string param_summary() const;
};

struct CVReport {
    ModelSpec model_spec;
    int cutoff_hour = -1;
    std::vector<double> fold_scores;
    double mean_score = 0.0;
    std::vector<int> degenerate_folds;  // folds scored as a flagged baseline
};

// Per fold: fit the scaler and the model on training rows only, then score
// the held-out rows. Classification folds score accuracy; lasso folds score
// R^2 against the held-out targets. A training split with a single class is
// scored as the majority-class baseline and flagged; a held-out split with a
// constant regression target is flagged with score 0.
CVReport cv_score(const features::FeatureMatrix& matrix, const ModelSpec& spec,
                  const FoldSpec& folds);

struct DatasetFingerprint {
    std::size_t n_rows = 0;
    std::size_t n_positive = 0;
    std::size_t rows_dropped_no_history = 0;
};

struct SweepReport {
    std::vector<CVReport> rows;  // ordered by (hour, spec declaration order)
    DatasetFingerprint fingerprint;
    features::FeatureConfig config_template;
    int k = 5;
    bool shuffled = false;
    std::uint64_t seed = 0;
    bool grouped = false;
};

// Builds one matrix per cutoff hour from the config template and runs
// cv_score for every (hour, spec) pair. `jobs` > 1 evaluates cells in
// parallel; results are placed by index so output is identical to a serial
// run.
SweepReport hourly_sweep(const std::vector<bucketing::HourlyDay>& days,
                         const std::map<std::string, ingest::UserProfile>& profiles,
                         const std::vector<int>& hours, const std::vector<ModelSpec>& specs,
                         const features::FeatureConfig& config_template, int k = 5,
                         bool shuffled = false, std::uint64_t seed = 0, bool grouped = false,
                         int jobs = 1);

// Hyperparameter lists per family; empty lists fall back to the family
// default. Cells expand in declaration order (first list outermost).
struct ParamGrid {
    std::vector<double> C;                              // svm
    std::vector<models::KernelType> kernels;            // svm
    std::vector<bool> shrinking;                        // svm
    std::vector<models::CentroidMetric> metrics;        // centroid
    std::vector<std::optional<double>> shrink_thresholds;  // centroid
    std::vector<double> alphas;                         // lasso
};

struct GridSearchReport {
    std::vector<CVReport> rows;
    std::size_t best_index = 0;
};

// Exhaustive search. Ties on mean score prefer the stronger regularization
// (smaller C, larger shrink_threshold, larger alpha), then the earlier cell.
GridSearchReport grid_search(const features::FeatureMatrix& matrix, ModelFamily family,
                             const ParamGrid& grid, const FoldSpec& folds);

// CSV: hour,model,params,fold1..foldK,mean with scores at 8 decimal places.
std::string report_to_csv(const std::vector<CVReport>& rows, int k);
std::string sweep_to_csv(const SweepReport& report);
std::string sweep_to_json(const SweepReport& report);
std::string grid_to_csv(const GridSearchReport& report, int k);
std::string grid_to_json(const GridSearchReport& report);

}  // namespace stepcast::eval

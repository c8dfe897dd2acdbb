#include "stepcast/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <future>
#include <map>
#include <numeric>
#include <sstream>

#include "json.hpp"

#include "stepcast/lasso.hpp"

namespace stepcast::eval {

using nlohmann::json;

const char* to_string(ModelFamily family) {
    switch (family) {
        case ModelFamily::Lasso: return "lasso";
        case ModelFamily::Centroid: return "centroid";
        case ModelFamily::Svm: return "svm";
    }
    return "?";
}

std::optional<ModelFamily> parse_model_family(const std::string& name) {
    if (name == "lasso") return ModelFamily::Lasso;
    if (name == "centroid") return ModelFamily::Centroid;
    if (name == "svm") return ModelFamily::Svm;
    return std::nullopt;
}

std::string ModelSpec::param_summary() const {
    switch (family) {
        case ModelFamily::Lasso: return "alpha=" + format_double(alpha);
        case ModelFamily::Centroid:
            return std::string("metric=") + models::to_string(metric) + ";shrink=" +
                   (shrink_threshold ? format_double(*shrink_threshold) : std::string("none"));
        case ModelFamily::Svm:
            return "C=" + format_double(C) + ";kernel=" + models::to_string(kernel) +
                   ";shrinking=" + (shrinking ? "true" : "false");
    }
    return "";
}

FoldSpec kfold(std::size_t n_rows, int k, bool shuffled, std::uint64_t seed) {
    if (k < 2) fail(ErrorKind::InvalidValue, "k must be at least 2");
    if (n_rows < static_cast<std::size_t>(k))
        fail(ErrorKind::TooFewRows, std::to_string(n_rows) + " rows cannot fill " +
                                        std::to_string(k) + " folds");
    FoldSpec spec;
    spec.n_rows = n_rows;
    spec.k = k;
    spec.shuffled = shuffled;
    spec.assignment.resize(n_rows);

    std::vector<std::size_t> order(n_rows);
    std::iota(order.begin(), order.end(), std::size_t{0});
    if (shuffled) {
        spec.seed = seed;
        Rng rng(seed);
        rng.shuffle(order);
    }

    std::size_t base = n_rows / static_cast<std::size_t>(k);
    std::size_t extra = n_rows % static_cast<std::size_t>(k);
    std::size_t pos = 0;
    for (int f = 0; f < k; ++f) {
        std::size_t size = base + (static_cast<std::size_t>(f) < extra ? 1 : 0);
        for (std::size_t i = 0; i < size; ++i) spec.assignment[order[pos++]] = f;
    }
    return spec;
}

FoldSpec kfold_grouped(const std::vector<std::string>& row_groups, int k) {
    if (k < 2) fail(ErrorKind::InvalidValue, "k must be at least 2");
    std::map<std::string, int> fold_of_group;
    std::vector<std::string> appearance;
    for (const auto& g : row_groups)
        if (fold_of_group.emplace(g, -1).second) appearance.push_back(g);
    if (appearance.size() < static_cast<std::size_t>(k))
        fail(ErrorKind::TooFewRows, std::to_string(appearance.size()) +
                                        " groups cannot fill " + std::to_string(k) + " folds");
    for (std::size_t i = 0; i < appearance.size(); ++i)
        fold_of_group[appearance[i]] = static_cast<int>(i % static_cast<std::size_t>(k));

    FoldSpec spec;
    spec.n_rows = row_groups.size();
    spec.k = k;
    spec.assignment.reserve(row_groups.size());
    for (const auto& g : row_groups) spec.assignment.push_back(fold_of_group[g]);
    return spec;
}

namespace {

Matrix take_rows(const Matrix& X, const std::vector<std::size_t>& idx) {
    Matrix out(idx.size(), X.cols);
    for (std::size_t i = 0; i < idx.size(); ++i) {
        auto src = X.row(idx[i]);
        std::copy(src.begin(), src.end(), out.row(i).begin());
    }
    return out;
}

// Majority label of the training split; ties go to the smaller label.
int majority_label(const std::vector<int>& labels) {
    std::map<int, std::size_t> counts;
    for (int l : labels) ++counts[l];
    int best = labels.front();
    std::size_t best_count = 0;
    for (const auto& [label, count] : counts) {
        if (count > best_count) {
            best = label;
            best_count = count;
        }
    }
    return best;
}

double fold_score(const features::FeatureMatrix& matrix, const Matrix& X, const ModelSpec& spec,
                  const std::vector<std::size_t>& train_idx,
                  const std::vector<std::size_t>& test_idx, bool& degenerate) {
    features::Scaler scaler = features::fit_scaler(matrix, train_idx);
    Matrix x_train = take_rows(X, train_idx);
    Matrix x_test = take_rows(X, test_idx);
    scaler.apply(x_train);
    scaler.apply(x_test);

    if (spec.family == ModelFamily::Lasso) {
        std::vector<double> y_train;
        y_train.reserve(train_idx.size());
        for (auto i : train_idx) y_train.push_back(matrix.rows[i].y_reg);
        std::vector<double> y_test;
        y_test.reserve(test_idx.size());
        for (auto i : test_idx) y_test.push_back(matrix.rows[i].y_reg);

        double mean = 0.0;
        for (double v : y_test) mean += v;
        mean /= static_cast<double>(y_test.size());
        double ss_tot = 0.0;
        for (double v : y_test) ss_tot += (v - mean) * (v - mean);
        if (ss_tot == 0.0) {
            degenerate = true;  // R^2 undefined on a constant held-out target
            return 0.0;
        }

        auto model = models::lasso_fit(x_train, y_train, spec.alpha);
        double ss_res = 0.0;
        for (std::size_t i = 0; i < test_idx.size(); ++i) {
            double r = y_test[i] - models::lasso_predict(model, x_test.row(i));
            ss_res += r * r;
        }
        return 1.0 - ss_res / ss_tot;
    }

    std::vector<int> y_train;
    y_train.reserve(train_idx.size());
    for (auto i : train_idx) y_train.push_back(matrix.rows[i].y_class ? 1 : 0);
    std::vector<int> y_test;
    y_test.reserve(test_idx.size());
    for (auto i : test_idx) y_test.push_back(matrix.rows[i].y_class ? 1 : 0);

    bool single_class =
        std::all_of(y_train.begin(), y_train.end(), [&](int l) { return l == y_train.front(); });
    if (single_class) {
        degenerate = true;
        int majority = majority_label(y_train);
        std::size_t hits = 0;
        for (int l : y_test)
            if (l == majority) ++hits;
        return static_cast<double>(hits) / static_cast<double>(y_test.size());
    }

    std::size_t hits = 0;
    if (spec.family == ModelFamily::Centroid) {
        auto model = models::centroid_fit(x_train, y_train, spec.metric, spec.shrink_threshold);
        for (std::size_t i = 0; i < test_idx.size(); ++i)
            if (models::centroid_predict(model, x_test.row(i)) == y_test[i]) ++hits;
    } else {
        std::vector<int> y_signed;
        y_signed.reserve(y_train.size());
        for (int l : y_train) y_signed.push_back(l == 1 ? 1 : -1);
        models::SvmParams params;
        params.C = spec.C;
        params.shrinking = spec.shrinking;
        params.kernel = spec.kernel;
        params.seed = spec.seed;
        auto model = models::svm_fit(x_train, y_signed, params);
        for (std::size_t i = 0; i < test_idx.size(); ++i) {
            int predicted = models::svm_predict(model, x_test.row(i)) == 1 ? 1 : 0;
            if (predicted == y_test[i]) ++hits;
        }
    }
    return static_cast<double>(hits) / static_cast<double>(y_test.size());
}

}  // namespace

CVReport cv_score(const features::FeatureMatrix& matrix, const ModelSpec& spec,
                  const FoldSpec& folds) {
    if (matrix.rows.size() != folds.n_rows)
        fail(ErrorKind::DimensionMismatch, "fold spec covers " + std::to_string(folds.n_rows) +
                                               " rows, matrix has " +
                                               std::to_string(matrix.rows.size()));
    Matrix X = matrix.design();

    CVReport report;
    report.model_spec = spec;
    report.cutoff_hour = matrix.config.cutoff_hour;
    report.fold_scores.resize(static_cast<std::size_t>(folds.k));

    for (int f = 0; f < folds.k; ++f) {
        std::vector<std::size_t> train_idx;
        std::vector<std::size_t> test_idx;
        for (std::size_t i = 0; i < folds.n_rows; ++i)
            (folds.assignment[i] == f ? test_idx : train_idx).push_back(i);
        bool degenerate = false;
        report.fold_scores[static_cast<std::size_t>(f)] =
            fold_score(matrix, X, spec, train_idx, test_idx, degenerate);
        if (degenerate) report.degenerate_folds.push_back(f);
    }

    double sum = 0.0;
    for (double s : report.fold_scores) sum += s;
    report.mean_score = sum / static_cast<double>(folds.k);
    return report;
}

SweepReport hourly_sweep(const std::vector<bucketing::HourlyDay>& days,
                         const std::map<std::string, ingest::UserProfile>& profiles,
                         const std::vector<int>& hours, const std::vector<ModelSpec>& specs,
                         const features::FeatureConfig& config_template, int k, bool shuffled,
                         std::uint64_t seed, bool grouped, int jobs) {
    for (int h : hours)
        if (h < 0 || h > 23)
            fail(ErrorKind::InvalidValue, "hour " + std::to_string(h) + " outside 0..23");

    std::vector<int> ordered_hours = hours;
    std::sort(ordered_hours.begin(), ordered_hours.end());
    ordered_hours.erase(std::unique(ordered_hours.begin(), ordered_hours.end()),
                        ordered_hours.end());

    SweepReport report;
    report.config_template = config_template;
    report.k = k;
    report.shuffled = shuffled;
    report.seed = seed;
    report.grouped = grouped;
    if (ordered_hours.empty()) return report;

    auto run_hour = [&](int hour) {
        features::FeatureConfig config = config_template;
        config.cutoff_hour = hour;
        features::FeatureMatrix matrix = features::build_matrix(days, profiles, config);
        FoldSpec folds;
        if (grouped) {
            std::vector<std::string> groups;
            groups.reserve(matrix.rows.size());
            for (const auto& row : matrix.rows) groups.push_back(row.user_id);
            folds = kfold_grouped(groups, k);
        } else {
            folds = kfold(matrix.rows.size(), k, shuffled, seed);
        }
        std::vector<CVReport> rows;
        rows.reserve(specs.size());
        for (const auto& spec : specs) rows.push_back(cv_score(matrix, spec, folds));
        return std::pair{rows, matrix};
    };

    std::vector<std::vector<CVReport>> per_hour(ordered_hours.size());
    bool have_fingerprint = false;
    auto note_fingerprint = [&](const features::FeatureMatrix& matrix) {
        if (have_fingerprint) return;
        have_fingerprint = true;
        report.fingerprint.n_rows = matrix.rows.size();
        report.fingerprint.rows_dropped_no_history = matrix.diagnostics.rows_dropped_no_history;
        for (const auto& row : matrix.rows)
            if (row.y_class) ++report.fingerprint.n_positive;
    };

    if (jobs <= 1) {
        for (std::size_t i = 0; i < ordered_hours.size(); ++i) {
            auto [rows, matrix] = run_hour(ordered_hours[i]);
            per_hour[i] = std::move(rows);
            note_fingerprint(matrix);
        }
    } else {
        std::size_t next = 0;
        while (next < ordered_hours.size()) {
            std::size_t batch = std::min<std::size_t>(static_cast<std::size_t>(jobs),
                                                      ordered_hours.size() - next);
            std::vector<std::future<std::pair<std::vector<CVReport>, features::FeatureMatrix>>>
                futures;
            futures.reserve(batch);
            for (std::size_t b = 0; b < batch; ++b)
                futures.push_back(
                    std::async(std::launch::async, run_hour, ordered_hours[next + b]));
            for (std::size_t b = 0; b < batch; ++b) {
                auto [rows, matrix] = futures[b].get();
                per_hour[next + b] = std::move(rows);
                note_fingerprint(matrix);
            }
            next += batch;
        }
    }

    for (auto& rows : per_hour)
        for (auto& row : rows) report.rows.push_back(std::move(row));
    return report;
}

GridSearchReport grid_search(const features::FeatureMatrix& matrix, ModelFamily family,
                             const ParamGrid& grid, const FoldSpec& folds) {
    std::vector<ModelSpec> cells;
    if (family == ModelFamily::Svm) {
        if (grid.C.empty() && grid.kernels.empty() && grid.shrinking.empty())
            fail(ErrorKind::EmptyInput, "svm grid has no values");
        auto cs = grid.C.empty() ? std::vector<double>{1.0} : grid.C;
        auto kernels = grid.kernels.empty()
                           ? std::vector<models::KernelType>{models::KernelType::Linear}
                           : grid.kernels;
        auto shrinking = grid.shrinking.empty() ? std::vector<bool>{true} : grid.shrinking;
        for (double c : cs)
            for (auto kernel : kernels)
                for (bool shrink : shrinking) {
                    ModelSpec spec;
                    spec.family = family;
                    spec.C = c;
                    spec.kernel = kernel;
                    spec.shrinking = shrink;
                    cells.push_back(spec);
                }
    } else if (family == ModelFamily::Centroid) {
        if (grid.metrics.empty() && grid.shrink_thresholds.empty())
            fail(ErrorKind::EmptyInput, "centroid grid has no values");
        auto metrics = grid.metrics.empty()
                           ? std::vector<models::CentroidMetric>{models::CentroidMetric::Euclidean}
                           : grid.metrics;
        auto thresholds = grid.shrink_thresholds.empty()
                              ? std::vector<std::optional<double>>{std::nullopt}
                              : grid.shrink_thresholds;
        for (auto metric : metrics)
            for (const auto& threshold : thresholds) {
                ModelSpec spec;
                spec.family = family;
                spec.metric = metric;
                spec.shrink_threshold = threshold;
                cells.push_back(spec);
            }
    } else {
        if (grid.alphas.empty()) fail(ErrorKind::EmptyInput, "lasso grid has no values");
        for (double alpha : grid.alphas) {
            ModelSpec spec;
            spec.family = family;
            spec.alpha = alpha;
            cells.push_back(spec);
        }
    }

    GridSearchReport report;
    report.rows.reserve(cells.size());
    for (const auto& cell : cells) report.rows.push_back(cv_score(matrix, cell, folds));

    auto stronger = [family](const ModelSpec& a, const ModelSpec& b) {
        switch (family) {
            case ModelFamily::Svm: return a.C < b.C;
            case ModelFamily::Centroid:
                return a.shrink_threshold.value_or(0.0) > b.shrink_threshold.value_or(0.0);
            case ModelFamily::Lasso: return a.alpha > b.alpha;
        }
        return false;
    };
    for (std::size_t i = 1; i < report.rows.size(); ++i) {
        const auto& best = report.rows[report.best_index];
        const auto& cell = report.rows[i];
        if (cell.mean_score > best.mean_score ||
            (cell.mean_score == best.mean_score &&
             stronger(cell.model_spec, best.model_spec)))
            report.best_index = i;
    }
    return report;
}

namespace {

std::string fixed8(double value) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.8f", value);
    return buf;
}

void append_row_csv(std::ostringstream& out, const CVReport& row) {
    out << row.cutoff_hour << ',' << to_string(row.model_spec.family) << ','
        << row.model_spec.param_summary();
    for (double s : row.fold_scores) out << ',' << fixed8(s);
    out << ',' << fixed8(row.mean_score) << '\n';
}

json row_to_json(const CVReport& row) {
    return json{{"hour", row.cutoff_hour},
                {"model", to_string(row.model_spec.family)},
                {"params", row.model_spec.param_summary()},
                {"fold_scores", row.fold_scores},
                {"mean", row.mean_score},
                {"degenerate_folds", row.degenerate_folds}};
}

json config_echo_json(const features::FeatureConfig& config) {
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

}  // namespace

std::string report_to_csv(const std::vector<CVReport>& rows, int k) {
    std::ostringstream out;
    out << "hour,model,param_summary";
    for (int f = 1; f <= k; ++f) out << ",fold" << f;
    out << ",mean\n";
    for (const auto& row : rows) append_row_csv(out, row);
    return out.str();
}

std::string sweep_to_csv(const SweepReport& report) { return report_to_csv(report.rows, report.k); }

std::string sweep_to_json(const SweepReport& report) {
    json rows = json::array();
    for (const auto& row : report.rows) rows.push_back(row_to_json(row));
    json j{{"config",
            json{{"features", config_echo_json(report.config_template)},
                 {"k", report.k},
                 {"shuffled", report.shuffled},
                 {"seed", report.seed},
                 {"grouped", report.grouped}}},
           {"fingerprint", json{{"n_rows", report.fingerprint.n_rows},
                                {"n_positive", report.fingerprint.n_positive},
                                {"rows_dropped_no_history",
                                 report.fingerprint.rows_dropped_no_history}}},
           {"rows", std::move(rows)}};
    return j.dump(2) + "\n";
}

std::string grid_to_csv(const GridSearchReport& report, int k) {
    return report_to_csv(report.rows, k);
}

std::string grid_to_json(const GridSearchReport& report) {
    json rows = json::array();
    for (const auto& row : report.rows) rows.push_back(row_to_json(row));
    json j{{"rows", std::move(rows)}, {"best_index", report.best_index}};
    if (!report.rows.empty()) {
        const auto& best = report.rows[report.best_index];
        j["best"] = json{{"model", to_string(best.model_spec.family)},
                         {"params", best.model_spec.param_summary()},
                         {"mean", best.mean_score}};
    }
    return j.dump(2) + "\n";
}

}  // namespace stepcast::eval

#include "doctest.h"

#include <cmath>
#include <cstdio>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "stepcast/bucketing.hpp"
#include "stepcast/core.hpp"
#include "stepcast/eval.hpp"
#include "stepcast/features.hpp"

namespace {

using stepcast::Date;
using stepcast::Error;
using stepcast::ErrorKind;
using stepcast::Rng;
using namespace stepcast::eval;
using stepcast::features::ColumnKind;
using stepcast::features::FeatureMatrix;
using stepcast::features::FeatureRow;

// Hand-built labeled matrix: two informative gaussian features, class
// centers at -2 and +2 along both axes.
FeatureMatrix blob_matrix(Rng& rng, std::size_t rows) {
    FeatureMatrix matrix;
    matrix.schema.names = {"f0", "f1"};
    matrix.schema.kinds = {ColumnKind::Continuous, ColumnKind::Continuous};
    for (std::size_t i = 0; i < rows; ++i) {
        FeatureRow row;
        row.user_id = "u" + std::to_string(i % 4);
        row.date = Date{2015, 3, 1 + int(i % 28)};
        bool positive = i % 2 == 0;
        double center = positive ? 2.0 : -2.0;
        row.x = {center + rng.normal(), center + rng.normal()};
        row.y_class = positive;
        row.y_reg = 3.0 * row.x[0] + rng.normal() * 0.1;
        matrix.rows.push_back(row);
    }
    return matrix;
}

std::vector<stepcast::bucketing::HourlyDay> sweep_days(Rng& rng, std::size_t users,
                                                       std::size_t days_per_user) {
    std::vector<stepcast::bucketing::HourlyDay> days;
    for (std::size_t u = 0; u < users; ++u) {
        bool achiever = u % 2 == 0;
        Date date{2015, 3, 2};
        for (std::size_t d = 0; d < days_per_user; ++d) {
            stepcast::bucketing::HourlyDay day;
            day.user_id = "user" + std::to_string(u);
            day.date = date;
            double base = achiever ? 700.0 : 300.0;
            for (int h = 6; h < 22; ++h)
                day.buckets[h] = base + rng.uniform() * 150.0;
            for (double b : day.buckets) day.steps_today += b;
            days.push_back(day);
            date = date.next();
        }
    }
    return days;
}

}  // namespace

TEST_CASE("unshuffled folds are balanced contiguous blocks covering every row") {
    FoldSpec spec = kfold(23, 5);
    REQUIRE(spec.assignment.size() == 23);

    std::vector<int> counts(5, 0);
    for (std::size_t i = 0; i < 23; ++i) {
        int fold = spec.assignment[i];
        REQUIRE(fold >= 0);
        REQUIRE(fold < 5);
        ++counts[fold];
        if (i > 0) CHECK(spec.assignment[i] >= spec.assignment[i - 1]);  // contiguous
    }
    // 23 = 5+5+5+4+4, the first n mod k folds carry the extra row.
    CHECK(counts == std::vector<int>{5, 5, 5, 4, 4});
}

TEST_CASE("shuffled folds stay balanced and depend on the seed") {
    FoldSpec a = kfold(40, 5, true, 1);
    FoldSpec b = kfold(40, 5, true, 1);
    FoldSpec c = kfold(40, 5, true, 2);

    CHECK(a.assignment == b.assignment);
    CHECK(a.assignment != c.assignment);

    std::vector<int> counts(5, 0);
    for (int fold : a.assignment) ++counts[fold];
    for (int count : counts) CHECK(count == 8);
}

TEST_CASE("fold construction rejects impossible shapes") {
    try {
        kfold(10, 1);
        FAIL("expected a k-value rejection");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::InvalidValue);
    }
    try {
        kfold(3, 5);
        FAIL("expected a row-count rejection");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::TooFewRows);
    }
}

TEST_CASE("grouped folds keep each user's rows together") {
    std::vector<std::string> groups = {"a", "a", "b", "b", "b", "c", "d", "d", "c"};
    FoldSpec spec = kfold_grouped(groups, 2);

    std::map<std::string, std::set<int>> folds_per_user;
    for (std::size_t i = 0; i < groups.size(); ++i)
        folds_per_user[groups[i]].insert(spec.assignment[i]);
    for (const auto& [user, folds] : folds_per_user) CHECK(folds.size() == 1);

    // Groups are dealt round robin in first-appearance order: a,b,c,d.
    CHECK(spec.assignment[0] == 0);  // a
    CHECK(spec.assignment[2] == 1);  // b
    CHECK(spec.assignment[5] == 0);  // c
    CHECK(spec.assignment[6] == 1);  // d
}

TEST_CASE("cross-validation reports one score per fold and their exact mean") {
    Rng rng(61);
    FeatureMatrix matrix = blob_matrix(rng, 50);
    FoldSpec folds = kfold(50, 5);

    ModelSpec spec;
    spec.family = ModelFamily::Svm;
    CVReport report = cv_score(matrix, spec, folds);

    REQUIRE(report.fold_scores.size() == 5);
    double sum = 0.0;
    for (double s : report.fold_scores) {
        CHECK(s >= 0.0);
        CHECK(s <= 1.0);
        sum += s;
    }
    CHECK(std::abs(report.mean_score - sum / 5.0) <= 1e-12);
    CHECK(report.degenerate_folds.empty());
    CHECK(report.mean_score > 0.9);  // the blobs are far apart
}

TEST_CASE("each family can be cross-validated on the same matrix") {
    Rng rng(62);
    FeatureMatrix matrix = blob_matrix(rng, 40);
    FoldSpec folds = kfold(40, 4);

    ModelSpec svm;
    svm.family = ModelFamily::Svm;
    ModelSpec centroid;
    centroid.family = ModelFamily::Centroid;
    ModelSpec lasso;
    lasso.family = ModelFamily::Lasso;
    lasso.alpha = 0.01;

    CHECK(cv_score(matrix, svm, folds).mean_score > 0.9);
    CHECK(cv_score(matrix, centroid, folds).mean_score > 0.9);
    CHECK(cv_score(matrix, lasso, folds).mean_score > 0.5);  // R^2 of a linear target
}

TEST_CASE("a single-class training split falls back to a flagged baseline") {
    Rng rng(63);
    FeatureMatrix matrix = blob_matrix(rng, 6);
    // Unshuffled k=2: fold 0 = rows 0..2, fold 1 = rows 3..5. Make every row
    // that trains fold 0 (rows 3..5) positive.
    for (std::size_t i = 0; i < 6; ++i) matrix.rows[i].y_class = i >= 3 || i == 0;

    ModelSpec spec;
    spec.family = ModelFamily::Svm;
    FoldSpec folds = kfold(6, 2);
    CVReport report = cv_score(matrix, spec, folds);

    REQUIRE(report.fold_scores.size() == 2);
    CHECK(report.degenerate_folds == std::vector<int>{0});
    // Majority baseline predicts positive; fold 0 holds one positive of three.
    CHECK(report.fold_scores[0] == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("a constant held-out regression target is flagged and scored zero") {
    Rng rng(64);
    FeatureMatrix matrix = blob_matrix(rng, 6);
    for (std::size_t i = 0; i < 3; ++i) matrix.rows[i].y_reg = 42.0;

    ModelSpec spec;
    spec.family = ModelFamily::Lasso;
    spec.alpha = 0.1;
    FoldSpec folds = kfold(6, 2);
    CVReport report = cv_score(matrix, spec, folds);

    CHECK(report.degenerate_folds == std::vector<int>{0});
    CHECK(report.fold_scores[0] == 0.0);
}

TEST_CASE("a recorded five-fold accuracy row reproduces its rounded mean") {
    std::vector<double> fold_scores = {0.73793103, 0.64137931, 0.73793103, 0.70833333,
                                       0.69230769};
    double mean = 0.0;
    for (double s : fold_scores) mean += s;
    mean /= 5.0;

    char buf[16];
    std::snprintf(buf, sizeof buf, "%.4f", mean);
    CHECK(std::string(buf) == "0.7036");
}

TEST_CASE("parameter summaries are stable key=value strings") {
    ModelSpec svm;
    svm.family = ModelFamily::Svm;
    CHECK(svm.param_summary() == "C=1;kernel=linear;shrinking=true");
    svm.C = 0.001;
    svm.shrinking = false;
    CHECK(svm.param_summary() == "C=0.001;kernel=linear;shrinking=false");

    ModelSpec lasso;
    lasso.family = ModelFamily::Lasso;
    lasso.alpha = 0.1;
    CHECK(lasso.param_summary() == "alpha=0.1");

    ModelSpec centroid;
    centroid.family = ModelFamily::Centroid;
    centroid.metric = stepcast::models::CentroidMetric::Manhattan;
    CHECK(centroid.param_summary() == "metric=manhattan;shrink=none");
    centroid.shrink_threshold = 0.5;
    CHECK(centroid.param_summary() == "metric=manhattan;shrink=0.5");
}

TEST_CASE("csv reports print eight-decimal scores under a fixed header") {
    CVReport row;
    row.cutoff_hour = 11;
    row.model_spec.family = ModelFamily::Svm;
    row.fold_scores = {0.5, 0.625, 1.0};
    row.mean_score = (0.5 + 0.625 + 1.0) / 3.0;

    std::string csv = report_to_csv({row}, 3);
    CHECK(csv ==
          "hour,model,param_summary,fold1,fold2,fold3,mean\n"
          "11,svm,C=1;kernel=linear;shrinking=true,0.50000000,0.62500000,1.00000000,"
          "0.70833333\n");
}

TEST_CASE("grid search breaks score ties toward stronger regularization") {
    Rng rng(65);
    FeatureMatrix matrix = blob_matrix(rng, 40);  // trivially separable
    FoldSpec folds = kfold(40, 4);

    ParamGrid grid;
    grid.C = {100.0, 1.0, 0.001};
    GridSearchReport svm_report = grid_search(matrix, ModelFamily::Svm, grid, folds);
    REQUIRE(svm_report.rows.size() == 3);
    CHECK(svm_report.rows[0].mean_score == svm_report.rows[2].mean_score);
    CHECK(svm_report.rows[svm_report.best_index].model_spec.C == 0.001);

    ParamGrid lasso_grid;
    lasso_grid.alphas = {1e6, 2e6};  // both fully shrunk, identical scores
    GridSearchReport lasso_report =
        grid_search(matrix, ModelFamily::Lasso, lasso_grid, folds);
    REQUIRE(lasso_report.rows.size() == 2);
    CHECK(lasso_report.rows[0].mean_score == lasso_report.rows[1].mean_score);
    CHECK(lasso_report.rows[lasso_report.best_index].model_spec.alpha == 2e6);
}

TEST_CASE("grid search expands cells in declaration order and rejects empty grids") {
    Rng rng(66);
    FeatureMatrix matrix = blob_matrix(rng, 20);
    FoldSpec folds = kfold(20, 4);

    ParamGrid grid;
    grid.C = {1.0, 2.0};
    grid.shrinking = {true, false};
    GridSearchReport report = grid_search(matrix, ModelFamily::Svm, grid, folds);
    REQUIRE(report.rows.size() == 4);
    CHECK(report.rows[0].model_spec.C == 1.0);
    CHECK(report.rows[0].model_spec.shrinking);
    CHECK(report.rows[1].model_spec.C == 1.0);
    CHECK_FALSE(report.rows[1].model_spec.shrinking);
    CHECK(report.rows[2].model_spec.C == 2.0);

    ParamGrid empty;
    try {
        grid_search(matrix, ModelFamily::Svm, empty, folds);
        FAIL("expected an empty-grid rejection");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::EmptyInput);
    }
}

TEST_CASE("hourly sweeps are identical whether run serially or in parallel") {
    Rng rng(67);
    auto days = sweep_days(rng, 6, 8);
    std::map<std::string, stepcast::ingest::UserProfile> profiles;

    stepcast::features::FeatureConfig config;
    config.cutoff_hour = 11;
    config.window = stepcast::features::Window::AllHoursToCutoff;
    config.include_yesterday = false;

    ModelSpec svm;
    svm.family = ModelFamily::Svm;
    ModelSpec centroid;
    centroid.family = ModelFamily::Centroid;
    std::vector<int> hours = {9, 11, 14};

    SweepReport serial =
        hourly_sweep(days, profiles, hours, {svm, centroid}, config, 4, false, 0, false, 1);
    SweepReport parallel =
        hourly_sweep(days, profiles, hours, {svm, centroid}, config, 4, false, 0, false, 3);

    CHECK(sweep_to_csv(serial) == sweep_to_csv(parallel));
    CHECK(sweep_to_json(serial) == sweep_to_json(parallel));

    REQUIRE(serial.rows.size() == 6);  // 3 hours x 2 specs, hour-major
    CHECK(serial.rows[0].cutoff_hour == 9);
    CHECK(serial.rows[1].cutoff_hour == 9);
    CHECK(serial.rows[2].cutoff_hour == 11);
    CHECK(serial.fingerprint.n_rows == 48);
}

TEST_CASE("family names parse and print consistently") {
    CHECK(parse_model_family("svm") == ModelFamily::Svm);
    CHECK(parse_model_family("lasso") == ModelFamily::Lasso);
    CHECK(parse_model_family("centroid") == ModelFamily::Centroid);
    CHECK_FALSE(parse_model_family("forest").has_value());
    CHECK(std::string(to_string(ModelFamily::Centroid)) == "centroid");
}

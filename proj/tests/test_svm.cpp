#include "doctest.h"

#include <cmath>
#include <vector>

#include "oracles.hpp"
#include "stepcast/core.hpp"
#include "stepcast/svm.hpp"

namespace {

using stepcast::Error;
using stepcast::ErrorKind;
using stepcast::Matrix;
using stepcast::Rng;
using namespace stepcast::models;

// Two gaussian blobs centered at +-separation along the first axis.
Matrix blobs(Rng& rng, std::vector<int>& labels, std::size_t per_class, std::size_t dims,
             double separation) {
    Matrix X(2 * per_class, dims);
    labels.clear();
    for (std::size_t i = 0; i < 2 * per_class; ++i) {
        int label = i < per_class ? -1 : 1;
        X.at(i, 0) = label * separation + rng.normal();
        for (std::size_t j = 1; j < dims; ++j) X.at(i, j) = rng.normal();
        labels.push_back(label);
    }
    return X;
}

double kkt_violation(const Matrix& X, const std::vector<int>& y, const SvmModel& model) {
    // Projected gradient of the augmented dual at the returned multipliers.
    std::size_t d = X.cols;
    std::vector<double> w_tilde(d + 1, 0.0);
    for (std::size_t i = 0; i < X.rows; ++i) {
        for (std::size_t j = 0; j < d; ++j) w_tilde[j] += model.alphas[i] * y[i] * X.at(i, j);
        w_tilde[d] += model.alphas[i] * y[i];
    }
    double worst = 0.0;
    for (std::size_t i = 0; i < X.rows; ++i) {
        double margin = w_tilde[d];
        for (std::size_t j = 0; j < d; ++j) margin += w_tilde[j] * X.at(i, j);
        double g = y[i] * margin - 1.0;
        double pg;
        if (model.alphas[i] <= 0.0)
            pg = std::min(g, 0.0);
        else if (model.alphas[i] >= model.C)
            pg = std::max(g, 0.0);
        else
            pg = g;
        worst = std::max(worst, std::abs(pg));
    }
    return worst;
}

}  // namespace

TEST_CASE("two symmetric points put the decision boundary at the origin") {
    Matrix X(2, 1);
    X.at(0, 0) = -1.0;
    X.at(1, 0) = 1.0;
    std::vector<int> y = {-1, 1};

    SvmParams params;
    params.C = 1.0;
    SvmModel model = svm_fit(X, y, params);

    CHECK(model.bias == doctest::Approx(0.0).scale(1.0).epsilon(1e-9));
    CHECK(model.weights[0] > 0.0);
    std::vector<double> left = {-0.3};
    std::vector<double> right = {0.3};
    CHECK(svm_predict(model, left) == -1);
    CHECK(svm_predict(model, right) == 1);
    CHECK(svm_decision(model, left) == doctest::Approx(-model.weights[0] * 0.3).epsilon(1e-9));
}

TEST_CASE("separable data with a large C is classified perfectly") {
    Rng rng(51);
    std::vector<int> labels;
    Matrix X = blobs(rng, labels, 25, 2, 6.0);

    SvmParams params;
    params.C = 100.0;
    params.tol = 1e-6;
    SvmModel model = svm_fit(X, labels, params);

    for (std::size_t i = 0; i < X.rows; ++i) {
        std::vector<double> x = {X.at(i, 0), X.at(i, 1)};
        CHECK(svm_predict(model, x) == labels[i]);
    }
}

TEST_CASE("prediction conventions: sign of the decision value, zero counts as positive") {
    SvmModel model;
    model.weights = {1.0, 0.0};
    model.bias = 0.0;

    std::vector<double> positive = {2.0, 5.0};
    std::vector<double> boundary = {0.0, 0.0};
    std::vector<double> negative = {-0.1, 9.0};
    CHECK(svm_predict(model, positive) == 1);
    CHECK(svm_predict(model, boundary) == 1);
    CHECK(svm_predict(model, negative) == -1);
    CHECK(svm_decision(model, positive) == 2.0);
}

TEST_CASE("coordinate descent matches a projected-gradient dual solver") {
    Rng rng(52);
    for (int rep = 0; rep < 3; ++rep) {
        std::vector<int> labels;
        Matrix X = blobs(rng, labels, 15, 3, 1.5);

        SvmParams params;
        params.C = 1.0;
        params.tol = 1e-6;
        params.max_epochs = 20000;
        SvmModel model = svm_fit(X, labels, params);
        oracles::SvmSolution reference = oracles::svm_reference(X, labels, 1.0);

        CHECK(std::abs(model.dual_objective - reference.dual_objective) <= 1e-5);
        for (std::size_t j = 0; j < 3; ++j)
            CHECK(model.weights[j] ==
                  doctest::Approx(reference.weights[j]).scale(1.0).epsilon(5e-4));

        // Both solvers classify fresh points identically.
        for (int q = 0; q < 100; ++q) {
            std::vector<double> x = {rng.normal() * 2.0, rng.normal() * 2.0,
                                     rng.normal() * 2.0};
            int ours = svm_predict(model, x);
            int theirs = oracles::svm_reference_predict(reference, x);
            CHECK(ours == theirs);
        }
    }
}

TEST_CASE("returned multipliers are feasible and consistent with the weights") {
    Rng rng(53);
    std::vector<int> labels;
    Matrix X = blobs(rng, labels, 20, 3, 1.0);

    SvmParams params;
    params.C = 0.7;
    params.tol = 1e-6;
    SvmModel model = svm_fit(X, labels, params);

    REQUIRE(model.alphas.size() == X.rows);
    for (double a : model.alphas) {
        CHECK(a >= 0.0);
        CHECK(a <= params.C);
    }

    // w must equal sum_i alpha_i y_i x_i.
    std::vector<double> w(3, 0.0);
    double b_aug = 0.0;
    double alpha_sum = 0.0;
    for (std::size_t i = 0; i < X.rows; ++i) {
        for (std::size_t j = 0; j < 3; ++j) w[j] += model.alphas[i] * labels[i] * X.at(i, j);
        b_aug += model.alphas[i] * labels[i];
        alpha_sum += model.alphas[i];
    }
    for (std::size_t j = 0; j < 3; ++j)
        CHECK(model.weights[j] == doctest::Approx(w[j]).scale(1.0).epsilon(1e-9));
    CHECK(model.bias_aug == doctest::Approx(b_aug).scale(1.0).epsilon(1e-9));

    double norm2 = b_aug * b_aug;
    for (double v : w) norm2 += v * v;
    CHECK(model.dual_objective ==
          doctest::Approx(alpha_sum - 0.5 * norm2).scale(1.0).epsilon(1e-9));

    CHECK(model.converged);
    CHECK(kkt_violation(X, labels, model) <= params.tol);
}

TEST_CASE("shrinking is an optimization, not a behavior change") {
    Rng rng(54);
    std::vector<int> labels;
    Matrix X = blobs(rng, labels, 30, 4, 1.2);

    SvmParams with_shrinking;
    with_shrinking.C = 1.0;
    with_shrinking.tol = 1e-8;
    with_shrinking.max_epochs = 100000;
    with_shrinking.shrinking = true;
    SvmParams without_shrinking = with_shrinking;
    without_shrinking.shrinking = false;

    SvmModel a = svm_fit(X, labels, with_shrinking);
    SvmModel b = svm_fit(X, labels, without_shrinking);
    REQUIRE(a.converged);
    REQUIRE(b.converged);

    // Both stop within tol of the same unique optimum; a KKT violation of
    // eps only pins the weights down to about sqrt(n * C * eps).
    for (std::size_t j = 0; j < 4; ++j)
        CHECK(a.weights[j] == doctest::Approx(b.weights[j]).scale(1.0).epsilon(1e-3));
    CHECK(a.bias == doctest::Approx(b.bias).scale(1.0).epsilon(1e-3));

    for (int q = 0; q < 200; ++q) {
        std::vector<double> x(4);
        for (auto& v : x) v = rng.normal() * 2.5;
        CHECK(svm_predict(a, x) == svm_predict(b, x));
    }
}

TEST_CASE("regularization strength trades margin for violations") {
    Rng rng(55);
    std::vector<int> labels;
    Matrix X = blobs(rng, labels, 40, 2, 0.8);  // overlapping classes

    SvmParams weak;
    weak.C = 0.001;
    SvmParams strong;
    strong.C = 100.0;

    SvmModel soft = svm_fit(X, labels, weak);
    SvmModel hard = svm_fit(X, labels, strong);

    double soft_norm = 0.0, hard_norm = 0.0;
    for (double v : soft.weights) soft_norm += v * v;
    for (double v : hard.weights) hard_norm += v * v;
    CHECK(soft_norm < hard_norm);  // tiny C caps the multipliers, so ||w|| stays small
}

TEST_CASE("invalid inputs raise typed errors") {
    Matrix X(4, 2);
    X.at(0, 0) = -1.0;
    X.at(1, 0) = -2.0;
    X.at(2, 0) = 1.0;
    X.at(3, 0) = 2.0;

    std::vector<int> not_signed = {0, 0, 1, 1};
    try {
        svm_fit(X, not_signed, {});
        FAIL("expected label-encoding rejection");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::NonBinaryLabels);
    }

    std::vector<int> one_sided = {1, 1, 1, 1};
    try {
        svm_fit(X, one_sided, {});
        FAIL("expected single-class rejection");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::SingleClass);
    }

    std::vector<int> ok = {-1, -1, 1, 1};
    SvmParams bad_c;
    bad_c.C = 0.0;
    try {
        svm_fit(X, ok, bad_c);
        FAIL("expected non-positive-C rejection");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::InvalidValue);
    }

    for (KernelType kernel : {KernelType::Rbf, KernelType::Poly}) {
        SvmParams params;
        params.kernel = kernel;
        try {
            svm_fit(X, ok, params);
            FAIL("expected kernel rejection");
        } catch (const Error& e) {
            CHECK(e.kind() == ErrorKind::UnsupportedKernel);
        }
    }
}

TEST_CASE("kernel names parse and print consistently") {
    CHECK(parse_kernel("linear") == KernelType::Linear);
    CHECK(parse_kernel("rbf") == KernelType::Rbf);
    CHECK(parse_kernel("poly") == KernelType::Poly);
    CHECK_FALSE(parse_kernel("sigmoid").has_value());
    CHECK(std::string(to_string(KernelType::Linear)) == "linear");
}

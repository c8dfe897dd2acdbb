#include "stepcast/lasso.hpp"

#include <algorithm>
#include <cmath>

namespace stepcast::models {

namespace {

double soft_threshold(double value, double amount) {
    if (value > amount) return value - amount;
    if (value < -amount) return value + amount;
    return 0.0;
}

void check_inputs(const Matrix& X, const std::vector<double>& y) {
    if (X.rows == 0) fail(ErrorKind::EmptyInput, "lasso_fit needs at least one row");
    if (y.size() != X.rows)
        fail(ErrorKind::DimensionMismatch, "target length " + std::to_string(y.size()) +
                                               " does not match " + std::to_string(X.rows) +
                                               " rows");
}

}  // namespace

LassoModel lasso_fit(const Matrix& X, const std::vector<double>& y, double alpha, int max_iter,
                     double tol) {
    check_inputs(X, y);
    if (alpha < 0.0) fail(ErrorKind::InvalidValue, "alpha must be non-negative");

    std::size_t n = X.rows;
    std::size_t d = X.cols;
    double inv_n = 1.0 / static_cast<double>(n);

    std::vector<double> col_sq(d, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        auto row = X.row(i);
        for (std::size_t j = 0; j < d; ++j) col_sq[j] += row[j] * row[j];
    }
    for (auto& v : col_sq) v *= inv_n;

    LassoModel model;
    model.alpha = alpha;
    model.weights.assign(d, 0.0);

    std::vector<double> residual = y;
    for (int sweep = 0; sweep < max_iter; ++sweep) {
        double max_change = 0.0;

        double mean_residual = 0.0;
        for (double r : residual) mean_residual += r;
        mean_residual *= inv_n;
        if (mean_residual != 0.0) {
            model.intercept += mean_residual;
            for (auto& r : residual) r -= mean_residual;
        }
        max_change = std::abs(mean_residual);

        for (std::size_t j = 0; j < d; ++j) {
            double old = model.weights[j];
            if (col_sq[j] == 0.0) {
                model.weights[j] = 0.0;
                max_change = std::max(max_change, std::abs(old));
                continue;
            }
            double rho = 0.0;
            for (std::size_t i = 0; i < n; ++i) rho += X.at(i, j) * residual[i];
            rho = rho * inv_n + col_sq[j] * old;
            double updated = soft_threshold(rho, alpha) / col_sq[j];
            double delta = updated - old;
            if (delta != 0.0) {
                model.weights[j] = updated;
                for (std::size_t i = 0; i < n; ++i) residual[i] -= X.at(i, j) * delta;
            }
            max_change = std::max(max_change, std::abs(delta));
        }

        model.n_iterations_run = sweep + 1;
        if (max_change < tol) {
            model.converged = true;
            break;
        }
    }
    return model;
}

double lasso_predict(const LassoModel& model, std::span<const double> x) {
    if (x.size() != model.weights.size())
        fail(ErrorKind::DimensionMismatch, "feature vector length does not match model");
    return dot(x, model.weights) + model.intercept;
}

std::vector<double> lasso_predict(const LassoModel& model, const Matrix& X) {
    std::vector<double> out(X.rows);
    for (std::size_t i = 0; i < X.rows; ++i) out[i] = lasso_predict(model, X.row(i));
    return out;
}

double lasso_objective(const Matrix& X, const std::vector<double>& y,
                       const std::vector<double>& weights, double intercept, double alpha) {
    check_inputs(X, y);
    if (weights.size() != X.cols) fail(ErrorKind::DimensionMismatch, "weight length mismatch");
    double sse = 0.0;
    for (std::size_t i = 0; i < X.rows; ++i) {
        double r = y[i] - dot(X.row(i), weights) - intercept;
        sse += r * r;
    }
    double l1 = 0.0;
    for (double w : weights) l1 += std::abs(w);
    return sse / (2.0 * static_cast<double>(X.rows)) + alpha * l1;
}

double r2_score(const LassoModel& model, const Matrix& X, const std::vector<double>& y) {
    check_inputs(X, y);
    double mean = 0.0;
    for (double v : y) mean += v;
    mean /= static_cast<double>(y.size());
    double ss_tot = 0.0;
    double ss_res = 0.0;
    for (std::size_t i = 0; i < X.rows; ++i) {
        double c = y[i] - mean;
        ss_tot += c * c;
        double r = y[i] - lasso_predict(model, X.row(i));
        ss_res += r * r;
    }
    if (ss_tot == 0.0) fail(ErrorKind::ConstantTarget, "R^2 undefined for a constant target");
    return 1.0 - ss_res / ss_tot;
}

}  // namespace stepcast::models

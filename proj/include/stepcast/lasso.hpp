#pragma once

#include <span>
#include <vector>

#include "stepcast/core.hpp"

namespace stepcast::models {

// L1-regularized least squares fitted by cyclic coordinate descent.
// Objective: (1/(2n)) * ||y - Xw - b||^2 + alpha * ||w||_1.
struct LassoModel {
    std::vector<double> weights;
    double intercept = 0.0;
    double alpha = 1.0;
    int n_iterations_run = 0;
    bool converged = false;
};

// Exact soft-threshold coordinate updates, one intercept refresh per sweep.
// Stops when no coordinate (intercept included) moves by tol or more within
// a sweep, or after max_iter sweeps. Starting from w = 0 makes the full
// shrinkage case (alpha >= max|X^T (y - mean(y))| / n) return exact zeros.
LassoModel lasso_fit(const Matrix& X, const std::vector<double>& y, double alpha = 1.0,
                     int max_iter = 1000, double tol = 1e-6);

double lasso_predict(const LassoModel& model, std::span<const double> x);
std::vector<double> lasso_predict(const LassoModel& model, const Matrix& X);

// Objective value at an arbitrary parameter vector; shared by solver and tests.
double lasso_objective(const Matrix& X, const std::vector<double>& y,
                       const std::vector<double>& weights, double intercept, double alpha);

// Coefficient of determination 1 - SS_res/SS_tot; negative when the model is
// worse than predicting mean(y). SS_tot = 0 raises ConstantTarget.
double r2_score(const LassoModel& model, const Matrix& X, const std::vector<double>& y);

}  // namespace stepcast::models

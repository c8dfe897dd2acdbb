// Reference solvers used only by tests. Each one reaches the same optimum as
// the library through a different algorithm family, so agreement between the
// two is evidence of correctness rather than shared bugs:
//   - lasso:    FISTA proximal gradient (library: cyclic coordinate descent)
//   - svm:      batch projected gradient on the dual (library: dual coordinate
//               descent with shrinking)
//   - pca:      cyclic Jacobi eigendecomposition (library: power iteration
//               with deflation)
//   - centroid: plain argmin-over-classes loop (library: fused distance scan)
#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "stepcast/centroid.hpp"
#include "stepcast/core.hpp"

namespace oracles {

struct LassoSolution {
    std::vector<double> weights;
    double intercept = 0.0;
    double objective = 0.0;
    std::size_t iterations = 0;
};

// Minimizes (1/(2n))||y - Xw - b||^2 + alpha*||w||_1. The intercept is
// eliminated exactly by centering, so FISTA runs on the weights alone.
LassoSolution lasso_reference(const stepcast::Matrix& X, const std::vector<double>& y, double alpha,
                              std::size_t max_iter = 200000);

double lasso_objective_reference(const stepcast::Matrix& X, const std::vector<double>& y,
                                 const std::vector<double>& weights, double intercept,
                                 double alpha);

struct SvmSolution {
    std::vector<double> alphas;
    std::vector<double> weights;  // without the implicit constant feature
    double bias_aug = 0.0;        // coefficient of the implicit constant feature
    double bias = 0.0;            // reported bias recovered from the KKT conditions
    double dual_objective = 0.0;
    double max_kkt_violation = 0.0;
};

// Maximizes sum(a) - 1/2 ||sum a_i y_i [x_i,1]||^2 over 0 <= a <= C with
// fixed-step projected gradient ascent. Labels must be +/-1.
SvmSolution svm_reference(const stepcast::Matrix& X, const std::vector<int>& y, double C,
                          std::size_t max_iter = 500000);

int svm_reference_predict(const SvmSolution& solution, std::span<const double> x);

struct EigenDecomposition {
    std::vector<double> values;  // descending
    stepcast::Matrix vectors;    // row i is the eigenvector of values[i]
};

// Cyclic Jacobi rotations; the input must be symmetric.
EigenDecomposition jacobi_eigen(const stepcast::Matrix& symmetric);

struct PcaReference {
    std::vector<double> variances;  // descending eigenvalues of the sample covariance
    stepcast::Matrix components;    // row-per-component, orthonormal
    std::vector<double> mean;
};

PcaReference pca_reference(const stepcast::Matrix& X);

int centroid_reference_predict(const stepcast::Matrix& centroids, const std::vector<int>& classes,
                               stepcast::models::CentroidMetric metric, std::span<const double> x);

}  // namespace oracles

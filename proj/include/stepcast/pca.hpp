#pragma once

#include <cstddef>
#include <vector>

#include "stepcast/core.hpp"

namespace stepcast::models {

// Principal components of the sample covariance (1/(n-1) normalization),
// extracted by power iteration with deflation and re-orthogonalization.
struct PcaModel {
    Matrix components;  // n_components x features, rows orthonormal
    std::vector<double> explained_variance;        // non-increasing
    std::vector<double> explained_variance_ratio;  // variance / total variance
    std::vector<double> mean;
    bool clamped = false;  // n_components was reduced to min(rows - 1, features)
};

// Signs are fixed so each component's largest-magnitude entry is positive.
// Once the deflated matrix carries no variance, remaining components are an
// orthonormal completion with explained_variance 0.
PcaModel pca_fit(const Matrix& X, std::size_t n_components = 10);

// Projects rows of X (centered by model.mean) onto the components.
Matrix pca_transform(const PcaModel& model, const Matrix& X);

// Maps projected rows back to the original space, adding the mean.
Matrix pca_inverse_transform(const PcaModel& model, const Matrix& projected);

}  // namespace stepcast::models

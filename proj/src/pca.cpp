#include "stepcast/pca.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace stepcast::models {

namespace {

constexpr double kTol = 1e-10;
constexpr int kMaxIter = 100000;

double norm2(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

// Removes the projections onto the already-extracted components (rows 0..k-1).
void orthogonalize(std::vector<double>& v, const Matrix& components, std::size_t k) {
    for (std::size_t i = 0; i < k; ++i) {
        auto u = components.row(i);
        double proj = dot(std::span<const double>(v), u);
        for (std::size_t j = 0; j < v.size(); ++j) v[j] -= proj * u[j];
    }
}

void fix_sign(std::vector<double>& v) {
    std::size_t idx = 0;
    for (std::size_t j = 1; j < v.size(); ++j)
        if (std::abs(v[j]) > std::abs(v[idx])) idx = j;
    if (v[idx] < 0.0)
        for (auto& x : v) x = -x;
}

}  // namespace

PcaModel pca_fit(const Matrix& X, std::size_t n_components) {
    if (X.rows < 2) fail(ErrorKind::TooFewRows, "pca_fit needs at least two rows");
    if (n_components == 0) fail(ErrorKind::InvalidValue, "n_components must be positive");
    std::size_t n = X.rows;
    std::size_t d = X.cols;

    PcaModel model;
    std::size_t limit = std::min(n - 1, d);
    if (n_components > limit) {
        n_components = limit;
        model.clamped = true;
    }

    model.mean.assign(d, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        auto row = X.row(i);
        for (std::size_t j = 0; j < d; ++j) model.mean[j] += row[j];
    }
    for (auto& m : model.mean) m /= static_cast<double>(n);

    Matrix centered(n, d);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < d; ++j) centered.at(i, j) = X.at(i, j) - model.mean[j];

    // Sample covariance, deflated in place as components come out.
    Matrix cov(d, d);
    for (std::size_t a = 0; a < d; ++a) {
        for (std::size_t b = a; b < d; ++b) {
            double s = 0.0;
            for (std::size_t i = 0; i < n; ++i) s += centered.at(i, a) * centered.at(i, b);
            s /= static_cast<double>(n - 1);
            cov.at(a, b) = s;
            cov.at(b, a) = s;
        }
    }
    double total_variance = 0.0;
    for (std::size_t a = 0; a < d; ++a) total_variance += cov.at(a, a);
    if (total_variance <= 0.0)
        fail(ErrorKind::DegenerateInput, "all rows identical, covariance has no variance");

    model.components = Matrix(n_components, d);
    model.explained_variance.assign(n_components, 0.0);

    Rng rng(0x5eedu);
    std::vector<double> v(d), next(d);
    for (std::size_t k = 0; k < n_components; ++k) {
        double remaining = 0.0;
        for (std::size_t a = 0; a < d; ++a) remaining += cov.at(a, a);
        if (remaining <= total_variance * 1e-14) {
            // No variance left: fill with an orthonormal completion.
            std::fill(v.begin(), v.end(), 0.0);
            for (std::size_t j = 0; j < d; ++j) {
                std::fill(v.begin(), v.end(), 0.0);
                v[j] = 1.0;
                orthogonalize(v, model.components, k);
                if (norm2(v) > 1e-6) break;
            }
            double nrm = norm2(v);
            for (auto& x : v) x /= nrm;
            fix_sign(v);
            std::copy(v.begin(), v.end(), model.components.row(k).begin());
            model.explained_variance[k] = 0.0;
            continue;
        }

        for (auto& x : v) x = rng.uniform() - 0.5;
        orthogonalize(v, model.components, k);
        double nrm = norm2(v);
        if (nrm < 1e-12) {
            std::fill(v.begin(), v.end(), 0.0);
            v[k % d] = 1.0;
            orthogonalize(v, model.components, k);
            nrm = norm2(v);
        }
        for (auto& x : v) x /= nrm;

        double eigenvalue = 0.0;
        for (int iter = 0; iter < kMaxIter; ++iter) {
            for (std::size_t a = 0; a < d; ++a) next[a] = dot(cov.row(a), std::span<const double>(v));
            orthogonalize(next, model.components, k);
            double len = norm2(next);
            if (len < 1e-300) break;  // vector collapsed, eigenvalue is 0
            for (auto& x : next) x /= len;
            double delta = 0.0;
            for (std::size_t a = 0; a < d; ++a) delta = std::max(delta, std::abs(next[a] - v[a]));
            v = next;
            eigenvalue = len;
            if (delta < kTol) break;
        }
        // Rayleigh quotient at the converged vector.
        double quad = 0.0;
        for (std::size_t a = 0; a < d; ++a) quad += v[a] * dot(cov.row(a), std::span<const double>(v));
        eigenvalue = std::max(quad, 0.0);

        fix_sign(v);
        std::copy(v.begin(), v.end(), model.components.row(k).begin());
        model.explained_variance[k] = eigenvalue;

        for (std::size_t a = 0; a < d; ++a)
            for (std::size_t b = 0; b < d; ++b) cov.at(a, b) -= eigenvalue * v[a] * v[b];
    }

    // Deflation emits eigenvalues largest-first; rounding can still produce
    // tiny inversions, so enforce the order.
    std::vector<std::size_t> order(n_components);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return model.explained_variance[a] > model.explained_variance[b];
    });
    Matrix sorted_components(n_components, d);
    std::vector<double> sorted_variance(n_components);
    for (std::size_t k = 0; k < n_components; ++k) {
        sorted_variance[k] = model.explained_variance[order[k]];
        auto src = model.components.row(order[k]);
        std::copy(src.begin(), src.end(), sorted_components.row(k).begin());
    }
    model.components = std::move(sorted_components);
    model.explained_variance = std::move(sorted_variance);

    model.explained_variance_ratio.resize(n_components);
    double ratio_sum = 0.0;
    for (std::size_t k = 0; k < n_components; ++k) {
        model.explained_variance_ratio[k] = model.explained_variance[k] / total_variance;
        ratio_sum += model.explained_variance_ratio[k];
    }
    // The captured variance never exceeds the trace in exact arithmetic, but
    // the independently rounded divisions can overshoot by an ulp; rescale so
    // the ratios stay a sub-probability.
    if (ratio_sum > 1.0)
        for (auto& ratio : model.explained_variance_ratio) ratio /= ratio_sum;
    return model;
}

Matrix pca_transform(const PcaModel& model, const Matrix& X) {
    if (X.cols != model.mean.size())
        fail(ErrorKind::DimensionMismatch, "input width does not match fitted mean");
    Matrix out(X.rows, model.components.rows);
    std::vector<double> centered(X.cols);
    for (std::size_t i = 0; i < X.rows; ++i) {
        auto row = X.row(i);
        for (std::size_t j = 0; j < X.cols; ++j) centered[j] = row[j] - model.mean[j];
        for (std::size_t k = 0; k < model.components.rows; ++k)
            out.at(i, k) = dot(model.components.row(k), std::span<const double>(centered));
    }
    return out;
}

Matrix pca_inverse_transform(const PcaModel& model, const Matrix& projected) {
    if (projected.cols != model.components.rows)
        fail(ErrorKind::DimensionMismatch, "projection width does not match component count");
    std::size_t d = model.mean.size();
    Matrix out(projected.rows, d);
    for (std::size_t i = 0; i < projected.rows; ++i) {
        auto row = out.row(i);
        std::copy(model.mean.begin(), model.mean.end(), row.begin());
        for (std::size_t k = 0; k < model.components.rows; ++k) {
            double coef = projected.at(i, k);
            auto comp = model.components.row(k);
            for (std::size_t j = 0; j < d; ++j) row[j] += coef * comp[j];
        }
    }
    return out;
}

}  // namespace stepcast::models

#include "stepcast/svm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace stepcast::models {

const char* to_string(KernelType kernel) {
    switch (kernel) {
        case KernelType::Linear: return "linear";
        case KernelType::Rbf: return "rbf";
        case KernelType::Poly: return "poly";
    }
    return "?";
}

std::optional<KernelType> parse_kernel(const std::string& name) {
    if (name == "linear") return KernelType::Linear;
    if (name == "rbf") return KernelType::Rbf;
    if (name == "poly") return KernelType::Poly;
    return std::nullopt;
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Unregularized bias from the KKT conditions at the final multipliers.
// Free support vectors pin it exactly; otherwise every bound point yields a
// one-sided constraint and the midpoint of the feasible interval is used.
double kkt_bias(const Matrix& X, const std::vector<int>& y, const std::vector<double>& alpha,
                const std::vector<double>& w, double C, double bias_aug) {
    double free_sum = 0.0;
    std::size_t free_count = 0;
    double lower = -kInf;
    double upper = kInf;
    for (std::size_t i = 0; i < X.rows; ++i) {
        double margin = static_cast<double>(y[i]) - dot(X.row(i), w);
        if (alpha[i] > 0.0 && alpha[i] < C) {
            free_sum += margin;
            ++free_count;
        } else if (alpha[i] == 0.0) {
            if (y[i] > 0)
                lower = std::max(lower, margin);
            else
                upper = std::min(upper, margin);
        } else {  // alpha[i] == C
            if (y[i] > 0)
                upper = std::min(upper, margin);
            else
                lower = std::max(lower, margin);
        }
    }
    if (free_count > 0) return free_sum / static_cast<double>(free_count);
    if (std::isfinite(lower) && std::isfinite(upper)) return 0.5 * (lower + upper);
    if (std::isfinite(lower)) return lower;
    if (std::isfinite(upper)) return upper;
    return bias_aug;
}

}  // namespace

SvmModel svm_fit(const Matrix& X, const std::vector<int>& y, const SvmParams& params) {
    if (params.kernel != KernelType::Linear)
        fail(ErrorKind::UnsupportedKernel,
             std::string(to_string(params.kernel)) + " kernel is declared but not implemented");
    if (X.rows == 0) fail(ErrorKind::EmptyInput, "svm_fit needs at least one row");
    if (y.size() != X.rows) fail(ErrorKind::DimensionMismatch, "label length mismatch");
    if (params.C <= 0.0) fail(ErrorKind::InvalidValue, "C must be positive");
    bool has_pos = false;
    bool has_neg = false;
    for (int label : y) {
        if (label == 1)
            has_pos = true;
        else if (label == -1)
            has_neg = true;
        else
            fail(ErrorKind::NonBinaryLabels,
                 "label " + std::to_string(label) + " is not -1 or +1");
    }
    if (!has_pos || !has_neg) fail(ErrorKind::SingleClass, "both labels must be present");

    std::size_t n = X.rows;
    std::size_t d = X.cols;
    double C = params.C;

    // Diagonal of the augmented Gram matrix: ||x_i||^2 plus 1 for the
    // implicit constant feature.
    std::vector<double> q_diag(n);
    for (std::size_t i = 0; i < n; ++i) q_diag[i] = dot(X.row(i), X.row(i)) + 1.0;

    std::vector<double> alpha(n, 0.0);
    std::vector<double> w(d, 0.0);
    double bias_aug = 0.0;

    std::vector<std::size_t> active(n);
    std::iota(active.begin(), active.end(), std::size_t{0});
    Rng rng(params.seed);

    // Static (read-only) KKT check of the current multipliers; the
    // convergence claim must hold for the state actually returned, not for
    // gradients sampled mid-pass while other coordinates were still moving.
    auto static_violation = [&]() {
        double worst = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double yi = static_cast<double>(y[i]);
            double grad = yi * (dot(X.row(i), w) + bias_aug) - 1.0;
            double pg = grad;
            if (alpha[i] == 0.0)
                pg = std::min(grad, 0.0);
            else if (alpha[i] == C)
                pg = std::max(grad, 0.0);
            worst = std::max(worst, std::abs(pg));
        }
        return worst;
    };

    double pg_max_old = kInf;
    double pg_min_old = -kInf;
    bool converged = false;
    int epochs = 0;

    while (epochs < params.max_epochs) {
        ++epochs;
        rng.shuffle(active);
        double pg_max = -kInf;
        double pg_min = kInf;
        std::size_t kept = 0;

        for (std::size_t pos = 0; pos < active.size(); ++pos) {
            std::size_t i = active[pos];
            double yi = static_cast<double>(y[i]);
            double grad = yi * (dot(X.row(i), w) + bias_aug) - 1.0;

            double pg = 0.0;
            bool shrink = false;
            if (alpha[i] == 0.0) {
                if (params.shrinking && grad > pg_max_old)
                    shrink = true;
                else if (grad < 0.0)
                    pg = grad;
            } else if (alpha[i] == C) {
                if (params.shrinking && grad < pg_min_old)
                    shrink = true;
                else if (grad > 0.0)
                    pg = grad;
            } else {
                pg = grad;
            }
            if (shrink) continue;

            active[kept++] = i;
            pg_max = std::max(pg_max, pg);
            pg_min = std::min(pg_min, pg);

            if (pg != 0.0) {
                double updated = std::clamp(alpha[i] - grad / q_diag[i], 0.0, C);
                double delta = updated - alpha[i];
                if (delta != 0.0) {
                    alpha[i] = updated;
                    auto row = X.row(i);
                    for (std::size_t j = 0; j < d; ++j) w[j] += delta * yi * row[j];
                    bias_aug += delta * yi;
                }
            }
        }
        active.resize(kept);

        double violation = std::max(std::abs(pg_max == -kInf ? 0.0 : pg_max),
                                    std::abs(pg_min == kInf ? 0.0 : pg_min));
        if (violation < params.tol) {
            if (active.size() == n && static_violation() < params.tol) {
                converged = true;
                break;
            }
            // Either the shrunk problem is solved or the full pass still
            // moved something; confirm on the full set.
            active.resize(n);
            std::iota(active.begin(), active.end(), std::size_t{0});
            pg_max_old = kInf;
            pg_min_old = -kInf;
            continue;
        }
        pg_max_old = pg_max <= 0.0 ? kInf : pg_max;
        pg_min_old = pg_min >= 0.0 ? -kInf : pg_min;
    }

    SvmModel model;
    model.C = C;
    model.n_epochs_run = epochs;
    model.converged = converged;
    model.alphas = alpha;

    // Recompute w from the multipliers so the reported model is exactly the
    // dual point, independent of incremental update drift.
    model.weights.assign(d, 0.0);
    double b_aug = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (alpha[i] == 0.0) continue;
        double coef = alpha[i] * static_cast<double>(y[i]);
        auto row = X.row(i);
        for (std::size_t j = 0; j < d; ++j) model.weights[j] += coef * row[j];
        b_aug += coef;
    }
    model.bias_aug = b_aug;

    double alpha_sum = 0.0;
    for (double a : alpha) alpha_sum += a;
    model.dual_objective =
        alpha_sum - 0.5 * (dot(model.weights, model.weights) + b_aug * b_aug);

    model.bias = kkt_bias(X, y, alpha, model.weights, C, b_aug);
    return model;
}

double svm_decision(const SvmModel& model, std::span<const double> x) {
    if (x.size() != model.weights.size())
        fail(ErrorKind::DimensionMismatch, "query length does not match model weights");
    return dot(x, model.weights) + model.bias;
}

int svm_predict(const SvmModel& model, std::span<const double> x) {
    return svm_decision(model, x) >= 0.0 ? 1 : -1;
}

}  // namespace stepcast::models

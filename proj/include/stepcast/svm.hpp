#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "stepcast/core.hpp"

namespace stepcast::models {

enum class KernelType { Linear, Rbf, Poly };

const char* to_string(KernelType kernel);
std::optional<KernelType> parse_kernel(const std::string& name);

struct SvmParams {
    double C = 1.0;
    int max_epochs = 1000;
    double tol = 1e-4;
    bool shrinking = true;
    KernelType kernel = KernelType::Linear;  // rbf/poly are declared, not implemented
    std::uint64_t seed = 0;
};

// Linear soft-margin SVM trained on the L1-hinge dual with a regularized
// bias: an implicit constant feature 1 is appended to every row, so the
// optimizer works on (w, b_aug) jointly and the dual stays a pure box
// problem. `bias` is the classical unregularized estimate recovered from
// the KKT conditions (mean of y_i - w.x_i over free support vectors, else
// the midpoint of the feasible interval); it is what svm_predict uses.
struct SvmModel {
    std::vector<double> weights;
    double bias = 0.0;
    double bias_aug = 0.0;  // coefficient of the implicit constant feature
    double C = 1.0;
    double dual_objective = 0.0;  // sum(alpha) - 1/2 ||(w, b_aug)||^2
    int n_epochs_run = 0;
    bool converged = false;
    std::vector<double> alphas;  // box multipliers, kept for serialization and audits
};

// Dual coordinate descent with one seeded permutation per epoch and the
// usual shrinking heuristic (bound multipliers whose gradients moved past
// the previous epoch's violation range are frozen). Convergence is declared
// only by a full, unshrunk pass whose largest projected-gradient violation
// is below tol. Labels must be exactly -1/+1 with both present.
SvmModel svm_fit(const Matrix& X, const std::vector<int>& y, const SvmParams& params = {});

double svm_decision(const SvmModel& model, std::span<const double> x);  // w.x + bias

// sign(w.x + bias) with sign(0) = +1.
int svm_predict(const SvmModel& model, std::span<const double> x);

}  // namespace stepcast::models

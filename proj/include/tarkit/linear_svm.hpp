#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "tarkit/error.hpp"

namespace tarkit {

/// Linear decision function w·x + b.
struct LinearClassifier {
    std::vector<double> weights;
    double bias = 0;
    double c = 0.5;

    double decision(std::span<const double> x) const {
        if (x.size() != weights.size())
            fail("classifier expects " + std::to_string(weights.size()) + " dims, got " +
                 std::to_string(x.size()));
        double s = bias;
        for (size_t i = 0; i < x.size(); ++i) s += weights[i] * x[i];
        return s;
    }
};

struct SvmParams {
    double c = 0.5;
    double tolerance = 1e-4;  // absolute duality-gap stop
    size_t max_epochs = 1000;
    uint64_t seed = 1;
};

/// Optimizer state that lets repeated retrains on a growing training set
/// start from the previous solution.
struct SvmWarmStart {
    std::vector<double> alphas;
};

/// L2-regularized hinge-loss SVM trained by dual coordinate descent with an
/// augmented bias column. Labels must contain both classes (+ = label > 0).
/// Deterministic for a fixed seed; stops at duality gap <= tolerance.
inline LinearClassifier train_linear_svm(const std::vector<std::vector<double>>& rows,
                                         const std::vector<int>& labels,
                                         const SvmParams& params = {},
                                         SvmWarmStart* warm = nullptr) {
    const size_t n = rows.size();
    if (n == 0 || labels.size() != n) fail("svm training: empty input or label size mismatch");
    const size_t dim = rows[0].size();
    for (const auto& r : rows)
        if (r.size() != dim) fail("svm training: inconsistent row dimensions");
    bool pos = false, neg = false;
    for (int l : labels) (l > 0 ? pos : neg) = true;
    if (!pos || !neg) fail("svm training requires both classes");

    std::vector<double> y(n);
    for (size_t i = 0; i < n; ++i) y[i] = labels[i] > 0 ? 1.0 : -1.0;

    std::vector<double> alpha(n, 0.0);
    if (warm && !warm->alphas.empty()) {
        if (warm->alphas.size() > n) fail("svm warm start has more alphas than rows");
        std::copy(warm->alphas.begin(), warm->alphas.end(), alpha.begin());
        for (double& a : alpha) a = std::clamp(a, 0.0, params.c);
    }

    // w over dim + 1 entries; the last is the bias via an implicit 1 column.
    std::vector<double> w(dim + 1, 0.0);
    for (size_t i = 0; i < n; ++i) {
        if (alpha[i] == 0) continue;
        double coef = alpha[i] * y[i];
        for (size_t d = 0; d < dim; ++d) w[d] += coef * rows[i][d];
        w[dim] += coef;
    }

    std::vector<double> q_diag(n);
    for (size_t i = 0; i < n; ++i) {
        double s = 1.0;  // bias column
        for (double v : rows[i]) s += v * v;
        q_diag[i] = s;
    }

    auto margin = [&](size_t i) {
        double s = w[dim];
        for (size_t d = 0; d < dim; ++d) s += w[d] * rows[i][d];
        return y[i] * s;
    };

    std::vector<size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::mt19937_64 rng(params.seed);

    for (size_t epoch = 0; epoch < params.max_epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng);
        for (size_t i : order) {
            double g = margin(i) - 1.0;  // dual gradient
            double pg = g;
            if (alpha[i] <= 0)
                pg = std::min(g, 0.0);
            else if (alpha[i] >= params.c)
                pg = std::max(g, 0.0);
            if (pg == 0) continue;
            double old = alpha[i];
            alpha[i] = std::clamp(old - g / q_diag[i], 0.0, params.c);
            double delta = (alpha[i] - old) * y[i];
            if (delta != 0) {
                for (size_t d = 0; d < dim; ++d) w[d] += delta * rows[i][d];
                w[dim] += delta;
            }
        }

        // primal - dual = |w|^2 + C·Σ hinge − Σ alpha
        double wnorm2 = 0;
        for (double v : w) wnorm2 += v * v;
        double hinge = 0, alpha_sum = 0;
        for (size_t i = 0; i < n; ++i) {
            hinge += std::max(0.0, 1.0 - margin(i));
            alpha_sum += alpha[i];
        }
        double gap = wnorm2 + params.c * hinge - alpha_sum;
        if (gap <= params.tolerance) break;
    }

    if (warm) warm->alphas = alpha;
    LinearClassifier clf;
    clf.weights.assign(w.begin(), w.begin() + dim);
    clf.bias = w[dim];
    clf.c = params.c;
    return clf;
}

/// Primal objective 0.5|w|^2 + C·Σ hinge; used by tests and convergence
/// reporting.
inline double svm_objective(const LinearClassifier& clf,
                            const std::vector<std::vector<double>>& rows,
                            const std::vector<int>& labels) {
    double wnorm2 = clf.bias * clf.bias;
    for (double v : clf.weights) wnorm2 += v * v;
    double hinge = 0;
    for (size_t i = 0; i < rows.size(); ++i) {
        double y = labels[i] > 0 ? 1.0 : -1.0;
        hinge += std::max(0.0, 1.0 - y * clf.decision(rows[i]));
    }
    return 0.5 * wnorm2 + clf.c * hinge;
}

}  // namespace tarkit

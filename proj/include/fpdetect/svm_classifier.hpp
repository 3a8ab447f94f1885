#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "fpdetect/errors.hpp"
#include "fpdetect/matrix.hpp"
#include "fpdetect/profile_data.hpp"

namespace fpdetect {

// ---------------------------------------------------------------------------
// Kernels
// ---------------------------------------------------------------------------

enum class KernelKind { RBF, Polynomial };

struct KernelSpec {
    KernelKind kind = KernelKind::RBF;
    double gamma = 0.0;   // <= 0 means "resolve automatically"
    double coef_c = 1.0;  // polynomial additive constant
    int degree = 3;       // polynomial degree
};

inline double kernel_eval(const KernelSpec& spec, std::span<const double> x,
                          std::span<const double> y) {
    if (x.size() != y.size()) throw DimensionMismatchError("kernel_eval: vector sizes differ");
    if (spec.kind == KernelKind::RBF) {
        double d2 = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            const double d = x[i] - y[i];
            d2 += d * d;
        }
        return std::exp(-spec.gamma * d2);
    }
    double dot = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) dot += x[i] * y[i];
    return std::pow(spec.gamma * dot + spec.coef_c, spec.degree);
}

/// Median-of-squared-pairwise-distances bandwidth: gamma = 1 / median(d^2),
/// sampling at most `max_pairs` pairs when the full pair count exceeds it.
inline double resolve_gamma(const Matrix& rows, std::uint64_t seed = 0,
                            std::size_t max_pairs = 1000) {
    const std::size_t n = rows.rows();
    if (n < 2) throw TooFewRowsError("resolve_gamma: need at least 2 rows");
    auto sqdist = [&](std::size_t a, std::size_t b) {
        double s = 0.0;
        for (std::size_t j = 0; j < rows.cols(); ++j) {
            const double d = rows(a, j) - rows(b, j);
            s += d * d;
        }
        return s;
    };
    std::vector<double> d2;
    const std::size_t total_pairs = n * (n - 1) / 2;
    if (total_pairs <= max_pairs) {
        d2.reserve(total_pairs);
        for (std::size_t a = 0; a < n; ++a)
            for (std::size_t b = a + 1; b < n; ++b) d2.push_back(sqdist(a, b));
    } else {
        std::mt19937_64 rng(seed);
        d2.reserve(max_pairs);
        for (std::size_t k = 0; k < max_pairs; ++k) {
            const std::size_t a = rng() % n;
            std::size_t b = rng() % n;
            if (b == a) b = (b + 1) % n;
            d2.push_back(sqdist(a, b));
        }
    }
    std::sort(d2.begin(), d2.end());
    const std::size_t m = d2.size();
    const double median = (m % 2 == 1) ? d2[m / 2] : 0.5 * (d2[m / 2 - 1] + d2[m / 2]);
    if (median <= 0.0)
        throw DegenerateDataError("resolve_gamma: all sampled rows identical");
    return 1.0 / median;
}

/// Fill in an automatic gamma: RBF uses the pairwise-distance heuristic,
/// polynomial defaults to 1 / feature_count.
inline KernelSpec resolve_kernel(KernelSpec spec, const Matrix& train_rows) {
    if (spec.gamma > 0.0) return spec;
    if (spec.kind == KernelKind::RBF)
        spec.gamma = resolve_gamma(train_rows);
    else
        spec.gamma = 1.0 / static_cast<double>(train_rows.cols());
    return spec;
}

// ---------------------------------------------------------------------------
// SMO training
// ---------------------------------------------------------------------------

struct SVMModel {
    Matrix support_vectors;            // rows of the training matrix with alpha > 0
    std::vector<double> coefficients;  // alpha_i * y_i per support vector
    double bias = 0.0;
    KernelSpec kernel;
    double c_reg = 1.0;
    bool converged = true;
    // diagnostics from training
    double dual_objective = 0.0;
    std::size_t iterations = 0;
};

struct SVMPrediction {
    double score = 0.0;
    int label = 0; // 1 iff score >= 0
};

/// C-SVC trained by Sequential Minimal Optimization. Labels come in as
/// {0,1} (legitimate = 1) and map to {-1,+1} internally. First-order pair
/// selection: worst KKT violator paired with the max |E_i - E_j| candidate,
/// scanned in deterministic index order.
inline SVMModel svm_train(const Matrix& x, const std::vector<int>& labels, KernelSpec spec,
                          double c_reg = 1.0) {
    const std::size_t n = x.rows();
    if (n != labels.size()) throw LengthMismatchError("svm_train: rows != labels");
    if (n == 0) throw EmptySetError("svm_train: empty training set");
    if (c_reg <= 0.0) throw BadValueError("svm_train: C must be positive");
    std::vector<double> y(n);
    bool has_pos = false, has_neg = false;
    for (std::size_t i = 0; i < n; ++i) {
        if (labels[i] != 0 && labels[i] != 1)
            throw NonBinaryLabelsError("svm_train: labels must be 0 or 1");
        y[i] = labels[i] == 1 ? 1.0 : -1.0;
        (labels[i] == 1 ? has_pos : has_neg) = true;
    }
    if (!has_pos || !has_neg) throw SingleClassError("svm_train: both classes required");

    spec = resolve_kernel(spec, x);

    // dense Gram matrix; datasets stay in the hundreds of rows
    Matrix gram(n, n);
    {
        std::vector<std::vector<double>> rows(n);
        for (std::size_t i = 0; i < n; ++i) rows[i] = x.row(i);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i; j < n; ++j)
                gram(i, j) = gram(j, i) = kernel_eval(spec, rows[i], rows[j]);
    }

    std::vector<double> alpha(n, 0.0);
    std::vector<double> err(n); // E_i = f(x_i) - y_i; starts at -y with f = 0
    for (std::size_t i = 0; i < n; ++i) err[i] = -y[i];
    double b = 0.0;
    const double tol = 1e-3;
    const double eps_alpha = 1e-12;

    auto take_step = [&](std::size_t i1, std::size_t i2) -> bool {
        if (i1 == i2) return false;
        const double a1_old = alpha[i1], a2_old = alpha[i2];
        const double y1 = y[i1], y2 = y[i2];
        const double e1 = err[i1], e2 = err[i2];
        const double s = y1 * y2;
        double lo, hi;
        if (s < 0.0) {
            lo = std::max(0.0, a2_old - a1_old);
            hi = std::min(c_reg, c_reg + a2_old - a1_old);
        } else {
            lo = std::max(0.0, a1_old + a2_old - c_reg);
            hi = std::min(c_reg, a1_old + a2_old);
        }
        if (lo >= hi) return false;
        const double k11 = gram(i1, i1), k12 = gram(i1, i2), k22 = gram(i2, i2);
        const double eta = 2.0 * k12 - k11 - k22;
        double a2;
        if (eta < 0.0) {
            a2 = a2_old - y2 * (e1 - e2) / eta;
            a2 = std::clamp(a2, lo, hi);
        } else {
            // objective at the segment ends
            const double f1 = y1 * (e1 - b) - a1_old * k11 - s * a2_old * k12;
            const double f2 = y2 * (e2 - b) - a2_old * k22 - s * a1_old * k12;
            const double l1 = a1_old + s * (a2_old - lo);
            const double h1 = a1_old + s * (a2_old - hi);
            const double obj_lo = l1 * f1 + lo * f2 + 0.5 * l1 * l1 * k11 + 0.5 * lo * lo * k22 +
                                  s * lo * l1 * k12;
            const double obj_hi = h1 * f1 + hi * f2 + 0.5 * h1 * h1 * k11 + 0.5 * hi * hi * k22 +
                                  s * hi * h1 * k12;
            if (obj_lo < obj_hi - 1e-12)
                a2 = lo;
            else if (obj_lo > obj_hi + 1e-12)
                a2 = hi;
            else
                a2 = a2_old;
        }
        if (std::fabs(a2 - a2_old) < 1e-12 * (a2 + a2_old + 1e-12)) return false;
        const double a1 = a1_old + s * (a2_old - a2);

        // threshold update
        const double b1 = e1 + y1 * (a1 - a1_old) * k11 + y2 * (a2 - a2_old) * k12 + b;
        const double b2 = e2 + y1 * (a1 - a1_old) * k12 + y2 * (a2 - a2_old) * k22 + b;
        double b_new;
        if (a1 > eps_alpha && a1 < c_reg - eps_alpha)
            b_new = b1;
        else if (a2 > eps_alpha && a2 < c_reg - eps_alpha)
            b_new = b2;
        else
            b_new = 0.5 * (b1 + b2);

        for (std::size_t k = 0; k < n; ++k)
            err[k] += y1 * (a1 - a1_old) * gram(i1, k) + y2 * (a2 - a2_old) * gram(i2, k) +
                      (b - b_new);
        b = b_new;
        alpha[i1] = a1;
        alpha[i2] = a2;
        return true;
    };

    auto examine = [&](std::size_t i2) -> bool {
        const double y2 = y[i2], a2 = alpha[i2], e2 = err[i2];
        const double r2 = e2 * y2;
        if (!((r2 < -tol && a2 < c_reg) || (r2 > tol && a2 > 0.0))) return false;
        // heuristic 1: max |E1 - E2| over non-bound points
        std::size_t best = n;
        double best_gap = -1.0;
        for (std::size_t i = 0; i < n; ++i) {
            if (alpha[i] <= eps_alpha || alpha[i] >= c_reg - eps_alpha) continue;
            const double gap = std::fabs(err[i] - e2);
            if (gap > best_gap) {
                best_gap = gap;
                best = i;
            }
        }
        if (best < n && take_step(best, i2)) return true;
        // fall through every non-bound point, then every point, in index order
        for (std::size_t i = 0; i < n; ++i) {
            if (alpha[i] <= eps_alpha || alpha[i] >= c_reg - eps_alpha) continue;
            if (take_step(i, i2)) return true;
        }
        for (std::size_t i = 0; i < n; ++i)
            if (take_step(i, i2)) return true;
        return false;
    };

    SVMModel model;
    model.kernel = spec;
    model.c_reg = c_reg;

    const std::size_t max_passes = 10 * n;
    std::size_t passes = 0;
    bool examine_all = true;
    std::size_t changed = 1;
    while (changed > 0 || examine_all) {
        if (++passes > max_passes) {
            model.converged = false; // return best-so-far
            break;
        }
        changed = 0;
        for (std::size_t i = 0; i < n; ++i) {
            if (!examine_all && (alpha[i] <= eps_alpha || alpha[i] >= c_reg - eps_alpha))
                continue;
            if (examine(i)) ++changed;
        }
        if (examine_all)
            examine_all = false;
        else if (changed == 0)
            examine_all = true;
    }
    model.iterations = passes;

    // bias from KKT-interior support vectors, falling back to all SVs
    double b_sum = 0.0;
    std::size_t b_count = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (alpha[i] > eps_alpha && alpha[i] < c_reg - eps_alpha) {
            double f = 0.0;
            for (std::size_t j = 0; j < n; ++j) f += alpha[j] * y[j] * gram(j, i);
            b_sum += y[i] - f;
            ++b_count;
        }
    }
    if (b_count == 0) {
        for (std::size_t i = 0; i < n; ++i) {
            if (alpha[i] <= eps_alpha) continue;
            double f = 0.0;
            for (std::size_t j = 0; j < n; ++j) f += alpha[j] * y[j] * gram(j, i);
            b_sum += y[i] - f;
            ++b_count;
        }
    }
    model.bias = b_count > 0 ? b_sum / static_cast<double>(b_count) : b;

    // dual objective: sum(alpha) - 1/2 sum_ij alpha_i alpha_j y_i y_j K_ij
    double obj = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (alpha[i] <= 0.0) continue;
        obj += alpha[i];
        for (std::size_t j = 0; j < n; ++j)
            obj -= 0.5 * alpha[i] * alpha[j] * y[i] * y[j] * gram(i, j);
    }
    model.dual_objective = obj;

    std::vector<std::size_t> sv;
    for (std::size_t i = 0; i < n; ++i)
        if (alpha[i] > eps_alpha) sv.push_back(i);
    model.support_vectors = Matrix(sv.size(), x.cols());
    model.coefficients.resize(sv.size());
    for (std::size_t k = 0; k < sv.size(); ++k) {
        model.coefficients[k] = alpha[sv[k]] * y[sv[k]];
        for (std::size_t j = 0; j < x.cols(); ++j)
            model.support_vectors(k, j) = x(sv[k], j);
    }
    return model;
}

inline double svm_decision(const SVMModel& model, std::span<const double> row) {
    if (row.size() != model.support_vectors.cols())
        throw DimensionMismatchError("svm_predict: row width does not match model");
    double f = model.bias;
    for (std::size_t k = 0; k < model.support_vectors.rows(); ++k)
        f += model.coefficients[k] * kernel_eval(model.kernel, model.support_vectors.row(k), row);
    return f;
}

inline SVMPrediction svm_predict(const SVMModel& model, std::span<const double> row) {
    const double score = svm_decision(model, row);
    return {score, score >= 0.0 ? 1 : 0};
}

} // namespace fpdetect

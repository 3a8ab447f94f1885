#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <vector>

#include "fpdetect/errors.hpp"
#include "fpdetect/matrix.hpp"
#include "fpdetect/stats.hpp"

namespace fpdetect {

// ---------------------------------------------------------------------------
// Pearson correlation
// ---------------------------------------------------------------------------

struct CorrelationResult {
    Matrix corr;                              // unit diagonal, entries in [-1, 1]
    std::vector<std::size_t> constant_columns; // columns with zero variance
    bool degenerate() const { return !constant_columns.empty(); }
};

/// Column-wise Pearson correlation. Constant columns get zero off-diagonals
/// and are flagged rather than raising an error.
inline CorrelationResult correlation_matrix(const Matrix& m) {
    if (m.rows() < 2) throw TooFewRowsError("correlation_matrix: need at least 2 rows");
    const std::size_t n = m.rows(), k = m.cols();
    std::vector<double> means(k, 0.0), sds(k, 0.0);
    for (std::size_t j = 0; j < k; ++j) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += m(i, j);
        means[j] = s / n;
        double v = 0.0;
        for (std::size_t i = 0; i < n; ++i) v += (m(i, j) - means[j]) * (m(i, j) - means[j]);
        sds[j] = std::sqrt(v);
    }
    CorrelationResult out;
    out.corr = Matrix::identity(k);
    for (std::size_t j = 0; j < k; ++j)
        if (sds[j] == 0.0) out.constant_columns.push_back(j);
    for (std::size_t a = 0; a < k; ++a) {
        if (sds[a] == 0.0) continue;
        for (std::size_t b = a + 1; b < k; ++b) {
            if (sds[b] == 0.0) continue;
            double cov = 0.0;
            for (std::size_t i = 0; i < n; ++i)
                cov += (m(i, a) - means[a]) * (m(i, b) - means[b]);
            const double r = std::clamp(cov / (sds[a] * sds[b]), -1.0, 1.0);
            out.corr(a, b) = r;
            out.corr(b, a) = r;
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Symmetric eigen-decomposition (cyclic Jacobi)
// ---------------------------------------------------------------------------

struct EigenSystem {
    std::vector<double> eigenvalues; // sorted descending
    Matrix eigenvectors;             // columns aligned with eigenvalues
};

/// Full spectrum of a symmetric matrix via cyclic Jacobi rotations.
/// Converged when all off-diagonals drop below 1e-10 * ||A||_F.
inline EigenSystem eigen_symmetric(const Matrix& a, double sym_tol = 1e-9) {
    if (a.rows() != a.cols()) throw NotSymmetricError("eigen_symmetric: matrix not square");
    if (!a.is_symmetric(sym_tol * std::max(1.0, a.frobenius_norm())))
        throw NotSymmetricError("eigen_symmetric: matrix not symmetric within tolerance");
    const std::size_t n = a.rows();
    Matrix d = a;
    Matrix v = Matrix::identity(n);
    const double norm = a.frobenius_norm();
    const double off_tol = 1e-10 * std::max(norm, 1e-300);

    auto off_norm = [&]() {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) s += d(i, j) * d(i, j);
        return std::sqrt(2.0 * s);
    };

    const int max_sweeps = 100;
    int sweep = 0;
    while (off_norm() > off_tol) {
        if (++sweep > max_sweeps)
            throw NoConvergenceError("eigen_symmetric: Jacobi did not converge");
        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double apq = d(p, q);
                if (std::fabs(apq) <= off_tol / (n * n)) continue;
                const double theta = (d(q, q) - d(p, p)) / (2.0 * apq);
                const double sgn = theta >= 0.0 ? 1.0 : -1.0;
                const double t = sgn / (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                const double tau = s / (1.0 + c);
                const double dpp = d(p, p), dqq = d(q, q);
                d(p, p) = dpp - t * apq;
                d(q, q) = dqq + t * apq;
                d(p, q) = d(q, p) = 0.0;
                for (std::size_t r = 0; r < n; ++r) {
                    if (r != p && r != q) {
                        const double drp = d(r, p), drq = d(r, q);
                        d(r, p) = d(p, r) = drp - s * (drq + tau * drp);
                        d(r, q) = d(q, r) = drq + s * (drp - tau * drq);
                    }
                    const double vrp = v(r, p), vrq = v(r, q);
                    v(r, p) = vrp - s * (vrq + tau * vrp);
                    v(r, q) = vrq + s * (vrp - tau * vrq);
                }
            }
        }
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t i, std::size_t j) { return d(i, i) > d(j, j); });

    EigenSystem sys;
    sys.eigenvalues.resize(n);
    sys.eigenvectors = Matrix(n, n);
    for (std::size_t k = 0; k < n; ++k) {
        const std::size_t src = order[k];
        sys.eigenvalues[k] = d(src, src);
        // sign convention: largest-magnitude entry positive
        std::size_t imax = 0;
        for (std::size_t r = 1; r < n; ++r)
            if (std::fabs(v(r, src)) > std::fabs(v(imax, src))) imax = r;
        const double flip = v(imax, src) < 0.0 ? -1.0 : 1.0;
        for (std::size_t r = 0; r < n; ++r) sys.eigenvectors(r, k) = flip * v(r, src);
    }
    return sys;
}

// ---------------------------------------------------------------------------
// Varimax rotation
// ---------------------------------------------------------------------------

struct VarimaxResult {
    Matrix loadings; // rotated, same shape as input
    Matrix rotation; // accumulated orthogonal k x k rotation
    int iterations = 0;
};

/// Kaiser-normalized varimax: rows scaled to unit communality, pairwise
/// planar rotations until the criterion gain drops below `tol` or
/// `max_iter` passes, then de-normalized. Single-component input is
/// returned unchanged.
inline VarimaxResult varimax(const Matrix& loadings, double tol = 1e-6, int max_iter = 1000) {
    const std::size_t n = loadings.rows(), k = loadings.cols();
    VarimaxResult out{loadings, Matrix::identity(k), 0};
    if (k < 2 || n == 0) return out;

    std::vector<double> comm(n, 1.0);
    Matrix L = loadings;
    for (std::size_t i = 0; i < n; ++i) {
        double h = 0.0;
        for (std::size_t j = 0; j < k; ++j) h += L(i, j) * L(i, j);
        comm[i] = std::sqrt(h);
        if (comm[i] > 0.0)
            for (std::size_t j = 0; j < k; ++j) L(i, j) /= comm[i];
    }

    auto criterion = [&]() {
        double total = 0.0;
        for (std::size_t j = 0; j < k; ++j) {
            double s2 = 0.0, s4 = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                const double q = L(i, j) * L(i, j);
                s2 += q;
                s4 += q * q;
            }
            total += n * s4 - s2 * s2;
        }
        return total / (static_cast<double>(n) * n);
    };

    double prev = criterion();
    for (int it = 0; it < max_iter; ++it) {
        ++out.iterations;
        for (std::size_t a = 0; a < k; ++a) {
            for (std::size_t b = a + 1; b < k; ++b) {
                double su = 0.0, sv = 0.0, suv = 0.0, su2v2 = 0.0;
                for (std::size_t i = 0; i < n; ++i) {
                    const double x = L(i, a), y = L(i, b);
                    const double u = x * x - y * y, w = 2.0 * x * y;
                    su += u;
                    sv += w;
                    suv += u * w;
                    su2v2 += u * u - w * w;
                }
                const double num = 2.0 * (n * suv - su * sv);
                const double den = n * su2v2 - (su * su - sv * sv);
                const double phi = 0.25 * std::atan2(num, den);
                if (std::fabs(phi) < 1e-14) continue;
                const double c = std::cos(phi), s = std::sin(phi);
                for (std::size_t i = 0; i < n; ++i) {
                    const double x = L(i, a), y = L(i, b);
                    L(i, a) = c * x + s * y;
                    L(i, b) = -s * x + c * y;
                }
                for (std::size_t i = 0; i < k; ++i) {
                    const double x = out.rotation(i, a), y = out.rotation(i, b);
                    out.rotation(i, a) = c * x + s * y;
                    out.rotation(i, b) = -s * x + c * y;
                }
            }
        }
        const double cur = criterion();
        if (cur - prev < tol) break;
        prev = cur;
    }

    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < k; ++j) L(i, j) *= comm[i];
    out.loadings = L;
    return out;
}

// ---------------------------------------------------------------------------
// Sampling adequacy and sphericity
// ---------------------------------------------------------------------------

struct KmoResult {
    double value = 0.0;
    bool degenerate = false; // no off-diagonal correlation at all (0/0 case)
};

/// Kaiser-Meyer-Olkin sampling adequacy from the anti-image partial
/// correlations of the inverse correlation matrix.
inline KmoResult kmo(const Matrix& r) {
    if (r.rows() != r.cols()) throw DimensionMismatchError("kmo: matrix not square");
    const std::size_t k = r.rows();
    const Matrix inv = invert(r); // throws SingularMatrixError if ill-conditioned
    double r2 = 0.0, q2 = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t j = 0; j < k; ++j) {
            if (i == j) continue;
            r2 += r(i, j) * r(i, j);
            const double q = -inv(i, j) / std::sqrt(inv(i, i) * inv(j, j));
            q2 += q * q;
        }
    }
    if (r2 + q2 == 0.0) return {0.0, true};
    return {r2 / (r2 + q2), false};
}

struct BartlettResult {
    double chi2 = 0.0;
    int df = 0;
    double p = 1.0;
    bool singular = false; // det <= 0: p reported as < machine epsilon
};

/// Bartlett's test of sphericity against the identity correlation matrix.
/// n is the number of observations behind r.
inline BartlettResult bartlett(const Matrix& r, std::size_t n) {
    if (r.rows() != r.cols()) throw DimensionMismatchError("bartlett: matrix not square");
    const std::size_t p_dim = r.rows();
    if (n <= p_dim) throw BadValueError("bartlett: n must exceed the number of features");
    BartlettResult out;
    out.df = static_cast<int>(p_dim * (p_dim - 1) / 2);
    const LogDet ld = log_det(r);
    const double factor = static_cast<double>(n) - 1.0 - (2.0 * p_dim + 5.0) / 6.0;
    if (ld.sign <= 0) {
        out.singular = true;
        out.chi2 = std::numeric_limits<double>::infinity();
        out.p = std::numeric_limits<double>::epsilon();
        return out;
    }
    out.chi2 = -factor * ld.log_abs;
    if (out.chi2 < 0.0) out.chi2 = 0.0; // ln det > 0 cannot happen for correlations; guard fp noise
    out.p = stats::chi2_sf(out.chi2, static_cast<double>(out.df));
    return out;
}

} // namespace fpdetect

#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include "fpdetect/errors.hpp"

namespace fpdetect::stats {

// ---------------------------------------------------------------------------
// Special functions. Series / continued-fraction evaluations with relative
// error well below 1e-10 for the argument ranges used here.
// ---------------------------------------------------------------------------

namespace detail {

inline double gamma_p_series(double a, double x) {
    double ap = a;
    double sum = 1.0 / a;
    double del = sum;
    for (int n = 0; n < 500; ++n) {
        ap += 1.0;
        del *= x / ap;
        sum += del;
        if (std::fabs(del) < std::fabs(sum) * 1e-15) break;
    }
    return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

inline double gamma_q_contfrac(double a, double x) {
    const double tiny = 1e-300;
    double b = x + 1.0 - a;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i <= 500; ++i) {
        const double an = -i * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::fabs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < 1e-15) break;
    }
    return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

inline double betacf(double a, double b, double x) {
    const double tiny = 1e-300;
    const double qab = a + b;
    const double qap = a + 1.0;
    const double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::fabs(d) < tiny) d = tiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= 500; ++m) {
        const int m2 = 2 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < tiny) d = tiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < tiny) d = tiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < 1e-15) break;
    }
    return h;
}

} // namespace detail

/// Regularized lower incomplete gamma P(a, x).
inline double gamma_p(double a, double x) {
    if (x < 0.0 || a <= 0.0) throw BadValueError("gamma_p: invalid arguments");
    if (x == 0.0) return 0.0;
    if (x < a + 1.0) return detail::gamma_p_series(a, x);
    return 1.0 - detail::gamma_q_contfrac(a, x);
}

/// Regularized upper incomplete gamma Q(a, x) = 1 - P(a, x).
inline double gamma_q(double a, double x) {
    if (x < 0.0 || a <= 0.0) throw BadValueError("gamma_q: invalid arguments");
    if (x == 0.0) return 1.0;
    if (x < a + 1.0) return 1.0 - detail::gamma_p_series(a, x);
    return detail::gamma_q_contfrac(a, x);
}

/// Regularized incomplete beta I_x(a, b).
inline double incbeta(double a, double b, double x) {
    if (a <= 0.0 || b <= 0.0 || x < 0.0 || x > 1.0)
        throw BadValueError("incbeta: invalid arguments");
    if (x == 0.0) return 0.0;
    if (x == 1.0) return 1.0;
    const double front = std::exp(std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                                  a * std::log(x) + b * std::log1p(-x));
    if (x < (a + 1.0) / (a + b + 2.0)) return front * detail::betacf(a, b, x) / a;
    return 1.0 - std::exp(std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                          b * std::log1p(-x) + a * std::log(x)) *
                     detail::betacf(b, a, 1.0 - x) / b;
}

/// Chi-square upper tail P(X >= x) with df degrees of freedom.
inline double chi2_sf(double x, double df) {
    if (x <= 0.0) return 1.0;
    return gamma_q(df / 2.0, x / 2.0);
}

/// Two-sided Student t p-value.
inline double t_two_sided_p(double t, double df) {
    if (!std::isfinite(t)) return 0.0;
    if (df <= 0.0) return 1.0;
    return incbeta(df / 2.0, 0.5, df / (df + t * t));
}

/// F-distribution upper tail P(F >= f) with (d1, d2) degrees of freedom.
inline double f_sf(double f, double d1, double d2) {
    if (f <= 0.0) return 1.0;
    return incbeta(d2 / 2.0, d1 / 2.0, d2 / (d2 + d1 * f));
}

/// P(X <= k) for X ~ Binomial(n, p).
inline double binom_cdf(long k, long n, double p) {
    if (k < 0) return 0.0;
    if (k >= n) return 1.0;
    double sum = 0.0;
    for (long i = 0; i <= k; ++i) {
        const double logpmf = std::lgamma(n + 1.0) - std::lgamma(i + 1.0) -
                              std::lgamma(n - i + 1.0) + i * std::log(p) +
                              (n - i) * std::log1p(-p);
        sum += std::exp(logpmf);
    }
    return std::min(sum, 1.0);
}

// ---------------------------------------------------------------------------
// Two-group tests.
// ---------------------------------------------------------------------------

inline double mean(std::span<const double> xs) {
    double s = 0.0;
    for (double x : xs) s += x;
    return s / static_cast<double>(xs.size());
}

inline double sample_variance(std::span<const double> xs) {
    if (xs.size() < 2) return 0.0;
    const double m = mean(xs);
    double s = 0.0;
    for (double x : xs) s += (x - m) * (x - m);
    return s / static_cast<double>(xs.size() - 1);
}

struct LeveneResult {
    double statistic = 0.0;
    double p = 1.0;
    bool degenerate = false; // zero within-group spread in |x - mean|
};

/// Classic Levene test (mean-centered absolute deviations), two groups.
inline LeveneResult levene_mean(std::span<const double> a, std::span<const double> b) {
    const std::size_t na = a.size(), nb = b.size();
    if (na < 2 || nb < 2) return {0.0, 1.0, true};
    const double ma = mean(a), mb = mean(b);
    std::vector<double> za(na), zb(nb);
    for (std::size_t i = 0; i < na; ++i) za[i] = std::fabs(a[i] - ma);
    for (std::size_t i = 0; i < nb; ++i) zb[i] = std::fabs(b[i] - mb);
    const double mza = mean(za), mzb = mean(zb);
    const double mz = (mza * na + mzb * nb) / static_cast<double>(na + nb);
    const double between = na * (mza - mz) * (mza - mz) + nb * (mzb - mz) * (mzb - mz);
    double within = 0.0;
    for (double z : za) within += (z - mza) * (z - mza);
    for (double z : zb) within += (z - mzb) * (z - mzb);
    const double df2 = static_cast<double>(na + nb - 2);
    if (within <= 0.0) {
        if (between <= 0.0) return {0.0, 1.0, true};
        return {std::numeric_limits<double>::infinity(), 0.0, true};
    }
    const double w = df2 * between / within; // k = 2, so df1 = 1
    return {w, f_sf(w, 1.0, df2), false};
}

struct TTestResult {
    double t = 0.0;
    double df = 0.0;
    double p = 1.0;
    bool degenerate = false;
};

/// Pooled-variance two-sample t-test.
inline TTestResult t_test_pooled(std::span<const double> a, std::span<const double> b) {
    const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
    const double va = sample_variance(a), vb = sample_variance(b);
    const double df = na + nb - 2.0;
    const double sp2 = ((na - 1.0) * va + (nb - 1.0) * vb) / df;
    const double se = std::sqrt(sp2 * (1.0 / na + 1.0 / nb));
    const double diff = mean(a) - mean(b);
    if (se == 0.0) {
        if (diff == 0.0) return {0.0, df, 1.0, true};
        return {std::numeric_limits<double>::infinity(), df, 0.0, true};
    }
    const double t = diff / se;
    return {t, df, t_two_sided_p(t, df), false};
}

/// Welch two-sample t-test (unequal variances).
inline TTestResult t_test_welch(std::span<const double> a, std::span<const double> b) {
    const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
    const double va = sample_variance(a), vb = sample_variance(b);
    const double se2 = va / na + vb / nb;
    const double diff = mean(a) - mean(b);
    if (se2 == 0.0) {
        if (diff == 0.0) return {0.0, na + nb - 2.0, 1.0, true};
        return {std::numeric_limits<double>::infinity(), na + nb - 2.0, 0.0, true};
    }
    const double df =
        se2 * se2 / ((va / na) * (va / na) / (na - 1.0) + (vb / nb) * (vb / nb) / (nb - 1.0));
    const double t = diff / std::sqrt(se2);
    return {t, df, t_two_sided_p(t, df), false};
}

} // namespace fpdetect::stats

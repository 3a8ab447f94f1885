#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <random>
#include <vector>

#include "fpdetect/errors.hpp"
#include "fpdetect/profile_data.hpp"
#include "fpdetect/stats.hpp"

namespace fpdetect {

// ---------------------------------------------------------------------------
// Confusion metrics. Positive class = legitimate, so a false positive is a
// fake profile identified as legitimate.
// ---------------------------------------------------------------------------

struct ConfusionMatrix {
    long tp = 0, fn = 0, fp = 0, tn = 0;
    long total() const { return tp + fn + fp + tn; }
};

struct MetricReport {
    ConfusionMatrix confusion;
    double accuracy_pct = 0.0;
    double tpr = 0.0;
    double tnr = 0.0;
    bool tpr_undefined = false; // no legitimate profiles in the truth
    bool tnr_undefined = false; // no fake profiles in the truth
};

inline MetricReport compute_metrics(const std::vector<int>& preds,
                                    const std::vector<int>& truth) {
    if (preds.size() != truth.size() || preds.empty())
        throw LengthMismatchError("compute_metrics: prediction/truth size mismatch");
    MetricReport r;
    for (std::size_t i = 0; i < preds.size(); ++i) {
        if (truth[i] == 1)
            (preds[i] == 1 ? r.confusion.tp : r.confusion.fn)++;
        else
            (preds[i] == 1 ? r.confusion.fp : r.confusion.tn)++;
    }
    r.accuracy_pct = 100.0 * (r.confusion.tp + r.confusion.tn) / r.confusion.total();
    const long pos = r.confusion.tp + r.confusion.fn;
    const long neg = r.confusion.tn + r.confusion.fp;
    if (pos > 0) {
        r.tpr = static_cast<double>(r.confusion.tp) / pos;
    } else {
        r.tpr = std::numeric_limits<double>::quiet_NaN();
        r.tpr_undefined = true;
    }
    if (neg > 0) {
        r.tnr = static_cast<double>(r.confusion.tn) / neg;
    } else {
        r.tnr = std::numeric_limits<double>::quiet_NaN();
        r.tnr_undefined = true;
    }
    return r;
}

// ---------------------------------------------------------------------------
// McNemar
// ---------------------------------------------------------------------------

struct McNemarResult {
    long b = 0; // legitimate profiles called fake
    long c = 0; // fake profiles called legitimate
    double chi2 = 0.0;
    double p = 1.0;
    bool exact = false; // exact binomial branch used (b + c < 25)
};

namespace detail {

inline McNemarResult mcnemar_from_counts(long b, long c) {
    McNemarResult r;
    r.b = b;
    r.c = c;
    const long m = b + c;
    if (m == 0) return r; // p = 1
    if (m >= 25) {
        const double num = std::fabs(static_cast<double>(b - c)) - 1.0;
        r.chi2 = num > 0.0 ? num * num / m : 0.0;
        r.p = stats::chi2_sf(r.chi2, 1.0);
    } else {
        r.exact = true;
        const long k = std::min(b, c);
        r.p = std::min(1.0, 2.0 * stats::binom_cdf(k, m, 0.5));
    }
    return r;
}

} // namespace detail

/// Pairs model predictions against actual labels. Discordant
/// cells are the two kinds of misclassification.
inline McNemarResult mcnemar(const std::vector<int>& preds, const std::vector<int>& truth) {
    if (preds.size() != truth.size() || preds.empty())
        throw LengthMismatchError("mcnemar: prediction/truth size mismatch");
    long b = 0, c = 0;
    for (std::size_t i = 0; i < preds.size(); ++i) {
        if (truth[i] == 1 && preds[i] == 0) ++b;
        if (truth[i] == 0 && preds[i] == 1) ++c;
    }
    return detail::mcnemar_from_counts(b, c);
}

/// Conventional model-vs-model pairing on a shared truth.
inline McNemarResult mcnemar_models(const std::vector<int>& preds_a,
                                    const std::vector<int>& preds_b,
                                    const std::vector<int>& truth) {
    if (preds_a.size() != truth.size() || preds_b.size() != truth.size() || truth.empty())
        throw LengthMismatchError("mcnemar_models: size mismatch");
    long b = 0, c = 0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        const bool a_ok = preds_a[i] == truth[i];
        const bool b_ok = preds_b[i] == truth[i];
        if (a_ok && !b_ok) ++b;
        if (!a_ok && b_ok) ++c;
    }
    return detail::mcnemar_from_counts(b, c);
}

// ---------------------------------------------------------------------------
// Training/test-size robustness sweep
// ---------------------------------------------------------------------------

enum class SweepAxis { TrainFraction, TestFraction };

struct SweepPoint {
    double fraction = 0.0;
    double mean_tpr = 0.0;
    double mean_tnr = 0.0;
    double stddev_tpr = 0.0;
    double stddev_tnr = 0.0;
};

struct SweepCurve {
    SweepAxis axis = SweepAxis::TrainFraction;
    std::vector<SweepPoint> points;
};

/// A method maps (train set, test set) to test predictions.
using MethodFn =
    std::function<std::vector<int>(const ProfileSet& train, const ProfileSet& test)>;

namespace detail {

inline ProfileSet stratified_subsample(const ProfileSet& set, double fraction,
                                       std::uint64_t seed) {
    std::vector<std::size_t> legit, fake;
    for (std::size_t i = 0; i < set.size(); ++i)
        (set.records[i].legitimacy == 1 ? legit : fake).push_back(i);
    std::mt19937_64 rng(seed);
    std::shuffle(legit.begin(), legit.end(), rng);
    std::shuffle(fake.begin(), fake.end(), rng);
    auto take = [&](std::vector<std::size_t>& cls) {
        const auto want = static_cast<std::size_t>(
            std::lround(fraction * static_cast<double>(cls.size())));
        if (want == 0)
            throw FractionTooSmallError("robustness_sweep: subsample drops a class entirely");
        cls.resize(want);
    };
    take(legit);
    take(fake);
    std::vector<std::size_t> idx = legit;
    idx.insert(idx.end(), fake.begin(), fake.end());
    std::sort(idx.begin(), idx.end());
    return set.subset(idx);
}

} // namespace detail

/// Subsample one side of the split at each fraction, retrain, re-evaluate,
/// and average TPR/TNR across repetitions. Fraction 1.0 skips subsampling
/// entirely so it reproduces the direct evaluation bit-exactly.
inline SweepCurve robustness_sweep(const DatasetSplit& split_in, SweepAxis axis,
                                   const std::vector<double>& fractions,
                                   std::size_t repetitions, std::uint64_t seed,
                                   const MethodFn& method) {
    if (repetitions == 0) throw BadValueError("robustness_sweep: repetitions must be >= 1");
    for (std::size_t i = 1; i < fractions.size(); ++i)
        if (fractions[i] <= fractions[i - 1])
            throw BadValueError("robustness_sweep: fractions must be strictly increasing");
    SweepCurve curve;
    curve.axis = axis;
    for (std::size_t fi = 0; fi < fractions.size(); ++fi) {
        const double fraction = fractions[fi];
        std::vector<double> tprs, tnrs;
        const std::size_t reps = fraction >= 1.0 ? 1 : repetitions;
        for (std::size_t rep = 0; rep < reps; ++rep) {
            ProfileSet train = split_in.train;
            ProfileSet test = split_in.test;
            if (fraction < 1.0) {
                const std::uint64_t sub_seed = seed * 1000003ULL + fi * 131ULL + rep;
                if (axis == SweepAxis::TrainFraction)
                    train = detail::stratified_subsample(train, fraction, sub_seed);
                else
                    test = detail::stratified_subsample(test, fraction, sub_seed);
            }
            const std::vector<int> preds = method(train, test);
            const MetricReport r = compute_metrics(preds, test.labels());
            tprs.push_back(r.tpr);
            tnrs.push_back(r.tnr);
        }
        auto summarize = [](const std::vector<double>& v) {
            double m = 0.0;
            for (double x : v) m += x;
            m /= static_cast<double>(v.size());
            double s = 0.0;
            for (double x : v) s += (x - m) * (x - m);
            const double sd = v.size() > 1 ? std::sqrt(s / static_cast<double>(v.size() - 1)) : 0.0;
            return std::pair<double, double>{m, sd};
        };
        const auto [mt, st] = summarize(tprs);
        const auto [mn, sn] = summarize(tnrs);
        curve.points.push_back({fraction, mt, mn, st, sn});
    }
    return curve;
}

} // namespace fpdetect

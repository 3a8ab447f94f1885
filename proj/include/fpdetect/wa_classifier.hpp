#pragma once

#include <algorithm>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "fpdetect/errors.hpp"
#include "fpdetect/profile_data.hpp"

namespace fpdetect {

struct FeatureWeightTable {
    std::vector<std::string> feature_names;
    std::vector<int> counts;             // profiles where the feature is present
    std::vector<double> averages;        // normalized column means
    std::vector<double> normalized_counts; // (C_f - min) / (max - min)
    std::vector<double> weights;         // average * normalized count
    bool all_counts_equal = false;       // N_f undefined; set to 1 everywhere
};

struct WAModel {
    FeatureWeightTable table;
    double profile_index = 0.0;
};

struct WAPrediction {
    double weight = 0.0;
    int label = 0; // 1 iff weight > index (equality classifies as fake)
};

/// Per-feature statistics over the legitimate profiles: presence counts,
/// normalized averages, and the derived weights.
inline FeatureWeightTable wa_feature_stats(const FeatureMatrix& legit) {
    if (legit.rows() == 0) throw EmptySetError("wa_feature_stats: empty set");
    const std::size_t n = legit.rows(), k = legit.cols();
    FeatureWeightTable t;
    t.feature_names = legit.feature_names;
    t.counts.resize(k);
    t.averages.resize(k);
    for (std::size_t j = 0; j < k; ++j) {
        double sum = 0.0;
        int count = 0;
        for (std::size_t i = 0; i < n; ++i) {
            const double v = legit.values(i, j);
            sum += v;
            if (v > 0.0) ++count;
        }
        t.counts[j] = count;
        t.averages[j] = sum / static_cast<double>(n);
    }
    const auto [lo_it, hi_it] = std::minmax_element(t.counts.begin(), t.counts.end());
    const int lo = *lo_it, hi = *hi_it;
    t.normalized_counts.resize(k);
    t.weights.resize(k);
    if (hi == lo) {
        t.all_counts_equal = true;
        for (std::size_t j = 0; j < k; ++j) t.normalized_counts[j] = 1.0;
    } else {
        for (std::size_t j = 0; j < k; ++j)
            t.normalized_counts[j] = static_cast<double>(t.counts[j] - lo) / (hi - lo);
    }
    for (std::size_t j = 0; j < k; ++j) t.weights[j] = t.averages[j] * t.normalized_counts[j];
    return t;
}

/// Build a weight table directly from published (count, average) columns.
inline FeatureWeightTable wa_table_from_stats(std::vector<std::string> names,
                                              std::vector<int> counts,
                                              std::vector<double> averages) {
    if (counts.empty() || counts.size() != averages.size() || counts.size() != names.size())
        throw LengthMismatchError("wa_table_from_stats: column sizes differ");
    FeatureWeightTable t;
    t.feature_names = std::move(names);
    t.counts = std::move(counts);
    t.averages = std::move(averages);
    const auto [lo_it, hi_it] = std::minmax_element(t.counts.begin(), t.counts.end());
    const int lo = *lo_it, hi = *hi_it;
    t.normalized_counts.resize(t.counts.size());
    t.weights.resize(t.counts.size());
    if (hi == lo) {
        t.all_counts_equal = true;
        std::fill(t.normalized_counts.begin(), t.normalized_counts.end(), 1.0);
    } else {
        for (std::size_t j = 0; j < t.counts.size(); ++j)
            t.normalized_counts[j] = static_cast<double>(t.counts[j] - lo) / (hi - lo);
    }
    for (std::size_t j = 0; j < t.counts.size(); ++j)
        t.weights[j] = t.averages[j] * t.normalized_counts[j];
    return t;
}

/// W_p: dot product of feature weights with a normalized profile row.
inline double wa_profile_weight(const FeatureWeightTable& table, std::span<const double> row) {
    if (row.size() != table.weights.size())
        throw DimensionMismatchError("wa_profile_weight: row width does not match table");
    double w = 0.0;
    for (std::size_t j = 0; j < row.size(); ++j) w += table.weights[j] * row[j];
    return w;
}

/// Profile index: mean profile weight over the dataset (fake and legitimate
/// rows alike).
inline WAModel wa_index(const FeatureWeightTable& table, const FeatureMatrix& dataset) {
    if (dataset.rows() == 0) throw EmptySetError("wa_index: empty dataset");
    double sum = 0.0;
    for (std::size_t i = 0; i < dataset.rows(); ++i)
        sum += wa_profile_weight(table, dataset.values.row(i));
    return {table, sum / static_cast<double>(dataset.rows())};
}

inline WAPrediction wa_classify(const WAModel& model, std::span<const double> row) {
    const double w = wa_profile_weight(model.table, row);
    return {w, w > model.profile_index ? 1 : 0};
}

} // namespace fpdetect

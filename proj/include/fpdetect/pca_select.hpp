#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "fpdetect/errors.hpp"
#include "fpdetect/numerics.hpp"
#include "fpdetect/profile_data.hpp"

namespace fpdetect {

struct PcaModel {
    std::vector<std::string> feature_names;
    std::vector<double> eigenvalues;   // full spectrum, descending
    std::vector<double> pct_variance;  // 100 * lambda / sum(lambda)
    std::vector<double> cumulative_pct;
    std::size_t retained = 0;          // components with eigenvalue >= 1
    Matrix loadings;                   // features x retained, varimax-rotated
    double kmo_value = 0.0;
    bool kmo_degenerate = false;
    double bartlett_chi2 = 0.0;
    double bartlett_p = 1.0;
};

/// Correlation-matrix PCA with Kaiser retention (eigenvalue >= 1) and
/// varimax-rotated loadings. KMO and Bartlett are computed on the same
/// correlation matrix; Bartlett's n defaults to the row count.
inline PcaModel run_pca(const FeatureMatrix& m, std::size_t bartlett_n = 0) {
    if (m.cols() < 2) throw TooFewRowsError("run_pca: need at least 2 features");
    if (m.rows() < 3) throw TooFewRowsError("run_pca: need at least 3 rows");
    if (bartlett_n == 0) bartlett_n = m.rows();

    const CorrelationResult corr = correlation_matrix(m.values);
    const EigenSystem eig = eigen_symmetric(corr.corr);

    PcaModel model;
    model.feature_names = m.feature_names;
    model.eigenvalues = eig.eigenvalues;
    const double total = static_cast<double>(m.cols()); // trace of a correlation matrix
    double running = 0.0;
    for (double ev : eig.eigenvalues) {
        const double pct = 100.0 * ev / total;
        running += pct;
        model.pct_variance.push_back(pct);
        model.cumulative_pct.push_back(running);
        if (ev >= 1.0) ++model.retained;
    }

    Matrix raw(m.cols(), model.retained);
    for (std::size_t r = 0; r < model.retained; ++r) {
        const double scale = std::sqrt(eig.eigenvalues[r]);
        for (std::size_t f = 0; f < m.cols(); ++f)
            raw(f, r) = eig.eigenvectors(f, r) * scale;
    }
    model.loadings = varimax(raw).loadings;

    try {
        const KmoResult k = kmo(corr.corr);
        model.kmo_value = k.value;
        model.kmo_degenerate = k.degenerate;
    } catch (const SingularMatrixError&) {
        model.kmo_value = 0.0;
        model.kmo_degenerate = true;
    }
    try {
        const BartlettResult b = bartlett(corr.corr, bartlett_n);
        model.bartlett_chi2 = b.chi2;
        model.bartlett_p = b.p;
    } catch (const Error&) {
        model.bartlett_chi2 = 0.0;
        model.bartlett_p = 1.0;
    }
    return model;
}

struct RemovedFeature {
    std::string name;
    int iteration = 0; // 1-based loop iteration that removed it
};

struct SelectionResult {
    std::vector<std::string> selected_features; // original schema order
    std::vector<std::size_t> selected_indices;  // indices into the input matrix
    std::vector<RemovedFeature> removed_features;
    PcaModel final_model;
    std::vector<std::vector<int>> load_count_trace; // per iteration, Z_f for surviving features
    int iterations = 0;
    bool aborted = false; // loop hit an undefined branch and kept the previous set
};

/// Iterative feature reduction: run PCA with varimax, count per feature the
/// components it loads into with |loading| > 0.5, drop every feature whose
/// count differs from 1, repeat until stable. Comparisons use absolute
/// loadings; a tie at exactly 0.5 does not count as loading.
inline SelectionResult select_features(const FeatureMatrix& m, std::size_t bartlett_n = 0) {
    SelectionResult result;
    std::vector<std::size_t> live(m.cols());
    for (std::size_t j = 0; j < m.cols(); ++j) live[j] = j;

    PcaModel previous = run_pca(m, bartlett_n);
    for (;;) {
        ++result.iterations;
        const FeatureMatrix sub = m.select_columns(live);
        PcaModel model = run_pca(sub, bartlett_n);
        if (model.retained == 0) {
            // undefined branch in the reduction loop: keep the previous set
            result.aborted = true;
            result.final_model = previous;
            break;
        }
        std::vector<int> z(live.size(), 0);
        for (std::size_t f = 0; f < live.size(); ++f)
            for (std::size_t r = 0; r < model.retained; ++r)
                if (std::fabs(model.loadings(f, r)) > 0.5) ++z[f];
        result.load_count_trace.push_back(z);

        std::vector<std::size_t> keep;
        for (std::size_t f = 0; f < live.size(); ++f) {
            if (z[f] == 1) {
                keep.push_back(live[f]);
            } else {
                result.removed_features.push_back({m.feature_names[live[f]], result.iterations});
            }
        }
        if (keep.empty())
            throw AllFeaturesRemovedError("select_features: reduction removed every feature");
        if (keep.size() == live.size()) {
            result.final_model = std::move(model);
            break;
        }
        live = std::move(keep);
        if (live.size() < 2) {
            // PCA is undefined on a single feature; keep what survived
            result.aborted = true;
            result.final_model = std::move(model);
            break;
        }
        previous = std::move(model);
    }

    result.selected_indices = live;
    for (std::size_t j : live) result.selected_features.push_back(m.feature_names[j]);
    return result;
}

} // namespace fpdetect

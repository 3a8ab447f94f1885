#include <doctest.h>

#include "fpdetect/pca_select.hpp"
#include "oracles.hpp"

using namespace fpdetect;

namespace {

FeatureMatrix two_feature_set(double r) {
    Matrix target = Matrix::identity(2);
    target(0, 1) = target(1, 0) = r;
    return oracle::exact_correlation_fixture(target, 8);
}

} // namespace

TEST_CASE("run_pca: strongly correlated pair keeps one component") {
    const PcaModel m = run_pca(two_feature_set(0.9));
    CHECK(m.retained == 1);
    CHECK(m.eigenvalues[0] == doctest::Approx(1.9));
    CHECK(m.eigenvalues[1] == doctest::Approx(0.1));
    CHECK(m.pct_variance[0] == doctest::Approx(95.0));
    CHECK(m.cumulative_pct[1] == doctest::Approx(100.0));
    CHECK(m.loadings.rows() == 2);
    CHECK(m.loadings.cols() == 1);
}

TEST_CASE("run_pca: uncorrelated pair keeps both components") {
    const PcaModel m = run_pca(two_feature_set(0.0));
    CHECK(m.retained == 2);
}

TEST_CASE("run_pca: input guards") {
    const FeatureMatrix two = two_feature_set(0.5);
    FeatureMatrix one;
    one.feature_names = {"A"};
    one.col_min = {0.0};
    one.col_max = {1.0};
    one.values = Matrix(8, 1);
    CHECK_THROWS_AS(run_pca(one), TooFewRowsError);
    FeatureMatrix short_rows = two;
    short_rows.values = Matrix(2, 2);
    CHECK_THROWS_AS(run_pca(short_rows), TooFewRowsError);
}

TEST_CASE("selection hand-trace: the planted cross-loading feature goes, nothing else") {
    const FeatureMatrix fm =
        oracle::exact_correlation_fixture(oracle::selection_fixture_r4(), 8);
    const SelectionResult sel = select_features(fm);
    REQUIRE(sel.removed_features.size() == 1);
    CHECK(sel.removed_features[0].name == "D");
    CHECK(sel.removed_features[0].iteration == 1);
    CHECK(sel.iterations == 2);
    CHECK_FALSE(sel.aborted);
    REQUIRE(sel.selected_features.size() == 3);
    CHECK(sel.selected_features[0] == "A");
    CHECK(sel.selected_features[1] == "B");
    CHECK(sel.selected_features[2] == "C");
    CHECK(sel.selected_indices == std::vector<std::size_t>{0, 1, 2});
    // second pass re-checks the surviving trio and finds every count at 1
    REQUIRE(sel.load_count_trace.size() == 2);
    for (int z : sel.load_count_trace[1]) CHECK(z == 1);
}

TEST_CASE("selection: already-simple structure is a fixed point") {
    const FeatureMatrix fm = two_feature_set(0.9);
    const SelectionResult sel = select_features(fm);
    CHECK(sel.removed_features.empty());
    CHECK(sel.selected_features.size() == 2);
    CHECK(sel.iterations == 1);
}

TEST_CASE("selection: one strong block collapses to a single stable component") {
    Matrix target = Matrix::identity(3);
    target(0, 1) = target(1, 0) = 0.9;
    target(0, 2) = target(2, 0) = 0.55;
    target(1, 2) = target(2, 1) = 0.55;
    const FeatureMatrix fm = oracle::exact_correlation_fixture(target, 8);
    const SelectionResult sel = select_features(fm);
    CHECK(sel.final_model.retained >= 1);
    CHECK(sel.selected_features.size() + sel.removed_features.size() == 3);
}

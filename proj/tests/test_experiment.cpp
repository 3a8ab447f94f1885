#include <doctest.h>

#include "fpdetect/experiment.hpp"

using namespace fpdetect;

TEST_CASE("run_experiment: grid cardinality and deterministic reports") {
    const ProfileSet set = synth_generate(40, 34, 21);
    ExperimentConfig cfg;
    cfg.methods = {Method::WA, Method::SvmPoly};
    cfg.modes = {FeatureMode::All, FeatureMode::PcaSelected};
    const ExperimentReport a = run_experiment(set, cfg);
    CHECK(a.rows.size() == 3 * 2 * 2);
    CHECK(a.averages.size() == 2 * 2);
    CHECK_FALSE(a.selected_features.empty());
    for (const auto& row : a.rows) {
        CHECK(row.dataset >= 1);
        CHECK(row.dataset <= 3);
        CHECK(row.metrics.confusion.total() == 37); // test halves of 40 + 34
    }
    // cross-dataset averages agree with the per-row values
    for (const auto& avg : a.averages) {
        double acc = 0.0;
        int n = 0;
        for (const auto& row : a.rows)
            if (row.mode == avg.mode && row.method == avg.method) {
                acc += row.metrics.accuracy_pct;
                ++n;
            }
        CHECK(n == 3);
        CHECK(avg.accuracy_pct == doctest::Approx(acc / 3.0));
    }

    const ExperimentReport b = run_experiment(set, cfg);
    CHECK(report_to_json(a, cfg).dump(2) == report_to_json(b, cfg).dump(2));
}

TEST_CASE("run_experiment: config validation") {
    const ProfileSet set = synth_generate(10, 10, 1);
    ExperimentConfig cfg;
    cfg.methods.clear();
    CHECK_THROWS_AS(run_experiment(set, cfg), BadValueError);
    cfg.methods = {Method::WA};
    cfg.seeds = {1, 1, 2};
    CHECK_THROWS_AS(run_experiment(set, cfg), BadValueError);
}

TEST_CASE("saved models round-trip through JSON with identical predictions") {
    const ProfileSet set = synth_generate(30, 26, 13);
    const FeatureMatrix full = normalize(set);
    const DatasetSplit sp = split(set, 4);

    std::map<std::string, std::size_t> row_of_id;
    for (std::size_t i = 0; i < set.size(); ++i) row_of_id[set.records[i].profile_id] = i;
    CellContext ctx{full, {}, {}, {}, {}, {}};
    for (const auto& r : sp.train.records) {
        ctx.train_rows.push_back(row_of_id.at(r.profile_id));
        ctx.train_labels.push_back(r.legitimacy);
    }
    for (const auto& r : sp.test.records) {
        ctx.test_rows.push_back(row_of_id.at(r.profile_id));
        ctx.test_labels.push_back(r.legitimacy);
    }
    for (std::size_t i = 0; i < set.size(); ++i)
        if (set.records[i].legitimacy == 1) ctx.legit_rows.push_back(i);

    MethodParams params;
    params.nn.max_epochs = 500;
    for (Method method : {Method::NN, Method::SvmRbf, Method::SvmPoly, Method::WA}) {
        const CellResult res = run_cell(method, ctx, params);
        SavedModel saved;
        saved.method = method;
        saved.mode = FeatureMode::All;
        saved.features = full.feature_names;
        saved.col_min = full.col_min;
        saved.col_max = full.col_max;
        saved.split_seed = 4;
        saved.model = res.model;

        const SavedModel loaded = model_from_json(model_to_json(saved));
        const FeatureMatrix test = full.select_rows(ctx.test_rows);
        const std::vector<int> before = saved.predict_rows(test);
        const std::vector<int> after = loaded.predict_rows(test);
        CHECK(before == after);
        CHECK(loaded.split_seed == 4);
        CHECK(loaded.method == method);
    }
}

TEST_CASE("apply_normalization: training bounds clamp out-of-range data") {
    const ProfileSet set = synth_generate(12, 10, 3);
    std::vector<std::string> names{"No_Connections"};
    std::vector<double> lo{100.0}, hi{200.0};
    const FeatureMatrix m = apply_normalization(set, names, lo, hi);
    REQUIRE(m.cols() == 1);
    for (std::size_t i = 0; i < m.rows(); ++i) {
        CHECK(m.values(i, 0) >= 0.0);
        CHECK(m.values(i, 0) <= 1.0);
    }
    CHECK_THROWS_AS(apply_normalization(set, {"Nonexistent"}, lo, hi), MissingColumnError);
}

TEST_CASE("sweep CSV carries the schema header and one line per fraction") {
    SweepCurve curve;
    curve.points = {{0.5, 0.8, 0.9, 0.01, 0.02}, {1.0, 0.85, 0.95, 0.0, 0.0}};
    const std::string csv = sweep_to_csv(curve);
    CHECK(csv.rfind("# schema_version 1\n", 0) == 0);
    CHECK(csv.find("fraction,mean_tpr,mean_tnr,stddev_tpr,stddev_tnr\n") != std::string::npos);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 4);
}

TEST_CASE("method and mode names round-trip") {
    for (Method m : {Method::NN, Method::SvmRbf, Method::SvmPoly, Method::WA})
        CHECK(method_from_string(to_string(m)) == m);
    for (FeatureMode f : {FeatureMode::All, FeatureMode::PcaSelected})
        CHECK(mode_from_string(to_string(f)) == f);
    CHECK_FALSE(method_from_string("bogus").has_value());
}

TEST_CASE("atomic write replaces the target file completely") {
    namespace fs = std::filesystem;
    const fs::path p = fs::temp_directory_path() / "fpdetect_atomic_test.txt";
    write_file_atomic(p, "first");
    write_file_atomic(p, "second");
    CHECK(read_file(p) == "second");
    CHECK_FALSE(fs::exists(p.string() + ".tmp"));
    fs::remove(p);
}

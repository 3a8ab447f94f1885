// Command-line front end for the fake-profile identification pipeline.
//
// Subcommands: ingest, synth, pca, train, eval, sweep, report, run-experiment.
// Exit codes: 0 success, 1 pipeline error, 2 usage error.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fpdetect/experiment.hpp"

namespace fs = std::filesystem;
using fpdetect::json;

namespace {

struct CommonOpts {
    std::string input;
    std::string output;
};

fpdetect::ProfileSet load_profiles(const std::string& path) {
    return fpdetect::parse_profiles(fpdetect::read_file(path));
}

json significance_to_json(const std::vector<fpdetect::FeatureSignificance>& sigs) {
    json arr = json::array();
    for (const auto& s : sigs)
        arr.push_back(json{{"feature", s.name},
                           {"levene_stat", s.levene_stat},
                           {"levene_p", s.levene_p},
                           {"t_stat", s.t_stat},
                           {"t_p", s.t_p},
                           {"pooled", s.pooled},
                           {"degenerate", s.degenerate}});
    return arr;
}

json metrics_to_json(const fpdetect::MetricReport& m) {
    return json{{"accuracy_pct", m.accuracy_pct},
                {"tpr", m.tpr_undefined ? json() : json(m.tpr)},
                {"tnr", m.tnr_undefined ? json() : json(m.tnr)},
                {"confusion", json{{"tp", m.confusion.tp},
                                   {"fn", m.confusion.fn},
                                   {"fp", m.confusion.fp},
                                   {"tn", m.confusion.tn}}}};
}

int cmd_ingest(const CommonOpts& opts, std::uint64_t split_seed,
               const std::string& split_report) {
    const fpdetect::ProfileSet set = load_profiles(opts.input);
    fpdetect::write_file_atomic(opts.output, fpdetect::to_csv(set));
    std::cout << "ingested " << set.size() << " profiles (" << set.count_label(1)
              << " legitimate, " << set.count_label(0) << " fake)\n";
    if (!split_report.empty()) {
        const fpdetect::DatasetSplit sp = fpdetect::split(set, split_seed);
        json j;
        j["schema_version"] = fpdetect::kSchemaVersion;
        j["seed"] = split_seed;
        j["train_size"] = sp.train.size();
        j["test_size"] = sp.test.size();
        j["train_vs_full"] = significance_to_json(
            fpdetect::representativeness_test(sp.train, set));
        fpdetect::write_file_atomic(split_report, j.dump(2) + "\n");
        std::cout << "split representativeness report: " << split_report << "\n";
    }
    return 0;
}

int cmd_synth(const std::string& output, std::size_t n_legit, std::size_t n_fake,
              std::uint64_t seed, double attenuation) {
    fpdetect::SynthConfig cfg;
    cfg.attenuation = attenuation;
    const fpdetect::ProfileSet set = fpdetect::synth_generate(n_legit, n_fake, seed, cfg);
    fpdetect::write_file_atomic(output, fpdetect::to_csv(set));
    std::cout << "wrote " << set.size() << " synthetic profiles to " << output << "\n";
    return 0;
}

json pca_model_to_json(const fpdetect::PcaModel& m) {
    json j;
    j["eigenvalues"] = m.eigenvalues;
    j["pct_variance"] = m.pct_variance;
    j["cumulative_pct"] = m.cumulative_pct;
    j["retained_components"] = m.retained;
    json loadings = json::array();
    for (std::size_t f = 0; f < m.loadings.rows(); ++f) {
        json row;
        row["feature"] = m.feature_names[f];
        row["loadings"] = m.loadings.row(f);
        loadings.push_back(row);
    }
    j["rotated_loadings"] = loadings;
    j["kmo"] = m.kmo_value;
    j["kmo_degenerate"] = m.kmo_degenerate;
    j["bartlett_chi2"] = m.bartlett_chi2;
    j["bartlett_p"] = m.bartlett_p;
    return j;
}

int cmd_pca(const CommonOpts& opts) {
    const fpdetect::ProfileSet set = load_profiles(opts.input);
    const fpdetect::FeatureMatrix full = fpdetect::normalize(set);
    const fpdetect::SelectionResult sel = fpdetect::select_features(full);

    json j;
    j["schema_version"] = fpdetect::kSchemaVersion;
    j["initial"] = pca_model_to_json(fpdetect::run_pca(full));
    j["final"] = pca_model_to_json(sel.final_model);
    j["selected_features"] = sel.selected_features;
    json removed = json::array();
    for (const auto& r : sel.removed_features)
        removed.push_back(json{{"name", r.name}, {"iteration", r.iteration}});
    j["removed_features"] = removed;
    j["iterations"] = sel.iterations;
    j["aborted"] = sel.aborted;
    fpdetect::write_file_atomic(opts.output, j.dump(2) + "\n");
    std::cout << "selected " << sel.selected_features.size() << " of "
              << full.cols() << " features; report: " << opts.output << "\n";
    return 0;
}

int cmd_train(const CommonOpts& opts, const std::string& method_s, const std::string& mode_s,
              std::uint64_t seed, const fpdetect::MethodParams& params) {
    const fpdetect::Method method = fpdetect::method_from_string(method_s).value();
    const fpdetect::FeatureMode mode = fpdetect::mode_from_string(mode_s).value();

    const fpdetect::ProfileSet set = load_profiles(opts.input);
    fpdetect::FeatureMatrix mat = fpdetect::normalize(set);
    if (mode == fpdetect::FeatureMode::PcaSelected) {
        const fpdetect::SelectionResult sel = fpdetect::select_features(mat);
        mat = mat.select_columns(sel.selected_indices);
    }
    const fpdetect::DatasetSplit sp = fpdetect::split(set, seed);

    std::map<std::string, std::size_t> row_of_id;
    for (std::size_t i = 0; i < set.size(); ++i) row_of_id[set.records[i].profile_id] = i;
    fpdetect::CellContext ctx{mat, {}, {}, {}, {}, {}};
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

    const fpdetect::CellResult res = fpdetect::run_cell(method, ctx, params);

    fpdetect::SavedModel saved;
    saved.method = method;
    saved.mode = mode;
    saved.features = mat.feature_names;
    saved.col_min = mat.col_min;
    saved.col_max = mat.col_max;
    saved.split_seed = seed;
    saved.model = res.model;
    fpdetect::write_file_atomic(opts.output, fpdetect::model_to_json(saved).dump(2) + "\n");
    std::cout << "trained " << method_s << " (" << mode_s << " features), test accuracy "
              << res.metrics.accuracy_pct << "%; model: " << opts.output << "\n";
    return 0;
}

int cmd_eval(const CommonOpts& opts, const std::string& model_path) {
    const fpdetect::SavedModel model =
        fpdetect::model_from_json(json::parse(fpdetect::read_file(model_path)));
    const fpdetect::ProfileSet set = load_profiles(opts.input);
    const fpdetect::DatasetSplit sp = fpdetect::split(set, model.split_seed);
    const fpdetect::FeatureMatrix test = fpdetect::apply_normalization(
        sp.test, model.features, model.col_min, model.col_max);
    const std::vector<int> preds = model.predict_rows(test);
    const std::vector<int> truth = sp.test.labels();
    const fpdetect::MetricReport metrics = fpdetect::compute_metrics(preds, truth);
    const fpdetect::McNemarResult mc = fpdetect::mcnemar(preds, truth);

    json j;
    j["schema_version"] = fpdetect::kSchemaVersion;
    j["method"] = fpdetect::to_string(model.method);
    j["feature_mode"] = fpdetect::to_string(model.mode);
    j["split_seed"] = model.split_seed;
    j["metrics"] = metrics_to_json(metrics);
    j["mcnemar"] = json{{"b", mc.b}, {"c", mc.c}, {"chi2", mc.chi2}, {"p", mc.p},
                        {"exact", mc.exact}};
    fpdetect::write_file_atomic(opts.output, j.dump(2) + "\n");
    std::cout << "accuracy " << metrics.accuracy_pct << "%; report: " << opts.output << "\n";
    return 0;
}

int cmd_sweep(const CommonOpts& opts, const std::string& axis_s,
              std::vector<double> fractions, std::size_t repetitions, std::uint64_t seed,
              const fpdetect::MethodParams& params) {
    const fpdetect::SweepAxis axis = axis_s == "train" ? fpdetect::SweepAxis::TrainFraction
                                                       : fpdetect::SweepAxis::TestFraction;
    const fpdetect::ProfileSet set = load_profiles(opts.input);
    const fpdetect::DatasetSplit sp = fpdetect::split(set, seed);
    const fpdetect::SweepCurve curve = fpdetect::robustness_sweep(
        sp, axis, fractions, repetitions, seed, fpdetect::make_svm_poly_pca_method(params));
    fpdetect::write_file_atomic(opts.output, fpdetect::sweep_to_csv(curve));
    std::cout << "sweep over " << curve.points.size() << " fractions: " << opts.output << "\n";
    return 0;
}

int cmd_report(const CommonOpts& opts) {
    const fpdetect::ProfileSet set = load_profiles(opts.input);
    const fpdetect::FeatureMatrix full = fpdetect::normalize(set);
    std::vector<std::size_t> legit;
    for (std::size_t i = 0; i < set.size(); ++i)
        if (set.records[i].legitimacy == 1) legit.push_back(i);
    if (legit.empty()) throw fpdetect::EmptySetError("report: no legitimate profiles");
    const fpdetect::FeatureWeightTable table =
        fpdetect::wa_feature_stats(full.select_rows(legit));

    std::ostringstream out;
    out << "# schema_version " << fpdetect::kSchemaVersion << "\n";
    out << "feature,count,average,normalized_count,weight\n";
    out.precision(6);
    out << std::fixed;
    for (std::size_t j = 0; j < table.feature_names.size(); ++j)
        out << table.feature_names[j] << ',' << table.counts[j] << ',' << table.averages[j]
            << ',' << table.normalized_counts[j] << ',' << table.weights[j] << '\n';
    fpdetect::write_file_atomic(opts.output, out.str());
    std::cout << "feature weight table: " << opts.output << "\n";
    return 0;
}

int cmd_run_experiment(const std::string& input, const std::string& outdir,
                       fpdetect::ExperimentConfig cfg, const std::vector<std::string>& methods,
                       const std::vector<std::string>& modes) {
    cfg.methods.clear();
    for (const auto& m : methods) cfg.methods.push_back(fpdetect::method_from_string(m).value());
    cfg.modes.clear();
    for (const auto& m : modes) cfg.modes.push_back(fpdetect::mode_from_string(m).value());

    fs::create_directories(outdir);
    const fs::path report_path = fs::path(outdir) / "report.json";
    try {
        const fpdetect::ProfileSet set = load_profiles(input);
        const fpdetect::ExperimentReport report = fpdetect::run_experiment(set, cfg);
        fpdetect::write_file_atomic(report_path,
                                    fpdetect::report_to_json(report, cfg).dump(2) + "\n");
    } catch (const std::exception& e) {
        // leave a marker so downstream tooling sees the failure, then rethrow
        json failed;
        failed["schema_version"] = fpdetect::kSchemaVersion;
        failed["status"] = "FAILED";
        failed["error"] = e.what();
        fpdetect::write_file_atomic(report_path, failed.dump(2) + "\n");
        throw;
    }
    std::cout << "experiment report: " << report_path.string() << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Fake-profile identification pipeline"};
    app.require_subcommand(1);
    app.set_config("--config", "", "Flat key=value config file; flags override");
    app.allow_config_extras(CLI::config_extras_mode::error);

    CommonOpts opts;
    fpdetect::MethodParams params;
    std::uint64_t seed = 1;

    auto add_io = [&](CLI::App* sub, bool needs_input = true) {
        if (needs_input)
            sub->add_option("--input", opts.input, "Input profile CSV")
                ->required()
                ->check(CLI::ExistingFile);
        sub->add_option("--output", opts.output, "Output file path")->required();
    };
    auto add_hyper = [&](CLI::App* sub) {
        sub->add_option("--svm-c", params.svm_c, "SVM box constraint C");
        sub->add_option("--rbf-gamma", params.rbf.gamma, "RBF gamma (<= 0: from data)");
        sub->add_option("--poly-gamma", params.poly.gamma, "Polynomial gamma (<= 0: 1/k)");
        sub->add_option("--poly-degree", params.poly.degree, "Polynomial degree");
        sub->add_option("--poly-coef", params.poly.coef_c, "Polynomial additive constant");
        sub->add_option("--nn-hidden", params.nn.hidden_neurons, "Hidden neurons");
        sub->add_option("--nn-max-epochs", params.nn.max_epochs, "Training epoch cap");
        sub->add_option("--nn-seed", params.nn.weight_init_seed, "Weight init seed");
        sub->add_flag("--wa-train-only", params.wa_train_only,
                      "Weight stats from the training half only");
    };

    // ingest
    auto* ingest = app.add_subcommand("ingest", "Validate a CSV and re-emit it canonically");
    add_io(ingest);
    std::string split_report;
    ingest->add_option("--split-seed", seed, "Seed for the representativeness split");
    ingest->add_option("--split-report", split_report,
                       "Also write a split-representativeness JSON report");

    // synth
    auto* synth = app.add_subcommand("synth", "Generate a calibrated synthetic profile CSV");
    std::size_t n_legit = 40, n_fake = 34;
    double attenuation = 0.5;
    synth->add_option("--legit", n_legit, "Legitimate profile count");
    synth->add_option("--fake", n_fake, "Fake profile count");
    synth->add_option("--seed", seed, "Generator seed");
    synth->add_option("--attenuation", attenuation, "Fake-profile attenuation factor")
        ->check(CLI::Range(0.0, 1.0));
    synth->add_option("--output", opts.output, "Output CSV path")->required();

    // pca
    auto* pca = app.add_subcommand("pca", "PCA feature-selection report (JSON)");
    add_io(pca);

    // train
    auto* train = app.add_subcommand("train", "Train one classifier on a seeded split");
    add_io(train);
    std::string method_s = "svm_poly", mode_s = "pca_selected", axis_s = "train";
    train->add_option("--method", method_s, "Classifier")
        ->check(CLI::IsMember({"nn", "svm_rbf", "svm_poly", "wa"}));
    train->add_option("--features", mode_s, "Feature mode")
        ->check(CLI::IsMember({"all", "pca_selected"}));
    train->add_option("--seed", seed, "Split seed");
    add_hyper(train);

    // eval
    auto* eval = app.add_subcommand("eval", "Evaluate a saved model on its test split");
    add_io(eval);
    std::string model_path;
    eval->add_option("--model", model_path, "Saved model JSON")
        ->required()
        ->check(CLI::ExistingFile);

    // sweep
    auto* sweep = app.add_subcommand("sweep", "Training/test-size robustness sweep (CSV)");
    add_io(sweep);
    std::vector<double> fractions{0.25, 0.5, 0.75, 1.0};
    std::size_t repetitions = 5;
    sweep->add_option("--axis", axis_s, "Which side to subsample")
        ->check(CLI::IsMember({"train", "test"}));
    sweep->add_option("--fractions", fractions, "Increasing subsample fractions");
    sweep->add_option("--repetitions", repetitions, "Repetitions per fraction");
    sweep->add_option("--seed", seed, "Split and subsample seed");
    add_hyper(sweep);

    // report
    auto* report = app.add_subcommand("report", "Feature weight table (CSV)");
    add_io(report);

    // run-experiment
    auto* runx = app.add_subcommand("run-experiment", "Full comparison grid");
    std::string outdir;
    fpdetect::ExperimentConfig xcfg;
    std::vector<std::uint64_t> seeds{1, 2, 3};
    std::vector<std::string> methods{"nn", "svm_rbf", "svm_poly", "wa"};
    std::vector<std::string> modes{"all", "pca_selected"};
    runx->add_option("--input", opts.input, "Input profile CSV")
        ->required()
        ->check(CLI::ExistingFile);
    runx->add_option("--output-dir", outdir, "Report directory")->required();
    runx->add_option("--seeds", seeds, "Three distinct split seeds")->expected(3);
    runx->add_option("--methods", methods, "Methods to run")
        ->check(CLI::IsMember({"nn", "svm_rbf", "svm_poly", "wa"}));
    runx->add_option("--modes", modes, "Feature modes to run")
        ->check(CLI::IsMember({"all", "pca_selected"}));
    runx->add_flag("--sequential", "Disable the worker-thread fan-out");
    add_hyper(runx);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (*ingest) return cmd_ingest(opts, seed, split_report);
        if (*synth) return cmd_synth(opts.output, n_legit, n_fake, seed, attenuation);
        if (*pca) return cmd_pca(opts);
        if (*train) return cmd_train(opts, method_s, mode_s, seed, params);
        if (*eval) return cmd_eval(opts, model_path);
        if (*sweep) return cmd_sweep(opts, axis_s, fractions, repetitions, seed, params);
        if (*report) return cmd_report(opts);
        if (*runx) {
            std::copy(seeds.begin(), seeds.end(), xcfg.seeds.begin());
            xcfg.params = params;
            xcfg.parallel = runx->count("--sequential") == 0;
            return cmd_run_experiment(opts.input, outdir, xcfg, methods, modes);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}

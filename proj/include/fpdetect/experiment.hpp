#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <future>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "fpdetect/evaluation.hpp"
#include "fpdetect/nn_classifier.hpp"
#include "fpdetect/pca_select.hpp"
#include "fpdetect/profile_data.hpp"
#include "fpdetect/svm_classifier.hpp"
#include "fpdetect/wa_classifier.hpp"

namespace fpdetect {

using json = nlohmann::ordered_json;

inline constexpr int kSchemaVersion = 1;

// ---------------------------------------------------------------------------
// Grid axes
// ---------------------------------------------------------------------------

enum class Method { NN, SvmRbf, SvmPoly, WA };
enum class FeatureMode { All, PcaSelected };

inline std::string to_string(Method m) {
    switch (m) {
        case Method::NN: return "nn";
        case Method::SvmRbf: return "svm_rbf";
        case Method::SvmPoly: return "svm_poly";
        case Method::WA: return "wa";
    }
    return "?";
}
inline std::string to_string(FeatureMode m) {
    return m == FeatureMode::All ? "all" : "pca_selected";
}
inline std::optional<Method> method_from_string(const std::string& s) {
    if (s == "nn") return Method::NN;
    if (s == "svm_rbf") return Method::SvmRbf;
    if (s == "svm_poly") return Method::SvmPoly;
    if (s == "wa") return Method::WA;
    return std::nullopt;
}
inline std::optional<FeatureMode> mode_from_string(const std::string& s) {
    if (s == "all") return FeatureMode::All;
    if (s == "pca_selected") return FeatureMode::PcaSelected;
    return std::nullopt;
}

struct MethodParams {
    NNConfig nn;
    double svm_c = 1.0;
    KernelSpec rbf{KernelKind::RBF, 0.0, 1.0, 3};        // gamma resolved from data
    KernelSpec poly{KernelKind::Polynomial, 0.0, 1.0, 3}; // gamma defaults to 1/k
    bool wa_train_only = false; // weight stats from the training half only
};

struct ExperimentConfig {
    std::array<std::uint64_t, 3> seeds{1, 2, 3};
    std::vector<FeatureMode> modes{FeatureMode::All, FeatureMode::PcaSelected};
    std::vector<Method> methods{Method::NN, Method::SvmRbf, Method::SvmPoly, Method::WA};
    MethodParams params;
    bool parallel = true;
};

// ---------------------------------------------------------------------------
// Normalization against stored bounds (model reuse on new data)
// ---------------------------------------------------------------------------

inline FeatureMatrix apply_normalization(const ProfileSet& set,
                                         const std::vector<std::string>& names,
                                         const std::vector<double>& col_min,
                                         const std::vector<double>& col_max) {
    if (set.empty()) throw EmptySetError("apply_normalization: empty set");
    FeatureMatrix out;
    out.feature_names = names;
    out.col_min = col_min;
    out.col_max = col_max;
    out.values = Matrix(set.size(), names.size());
    for (std::size_t j = 0; j < names.size(); ++j) {
        const auto it =
            std::find(set.feature_names.begin(), set.feature_names.end(), names[j]);
        if (it == set.feature_names.end())
            throw MissingColumnError("apply_normalization: unknown feature " + names[j]);
        const std::size_t src = static_cast<std::size_t>(it - set.feature_names.begin());
        const double range = col_max[j] - col_min[j];
        for (std::size_t i = 0; i < set.size(); ++i) {
            double v = range > 0.0
                           ? (set.records[i].features[src] - col_min[j]) / range
                           : 0.0;
            out.values(i, j) = std::clamp(v, 0.0, 1.0);
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Trained-model wrapper with JSON round-trip
// ---------------------------------------------------------------------------

struct SavedModel {
    Method method = Method::SvmPoly;
    FeatureMode mode = FeatureMode::All;
    std::vector<std::string> features;  // column order the model expects
    std::vector<double> col_min, col_max; // normalization bounds from training time
    std::uint64_t split_seed = 0;
    std::variant<NNModel, SVMModel, WAModel> model;

    std::vector<int> predict_rows(const FeatureMatrix& rows) const {
        std::vector<int> preds(rows.rows());
        for (std::size_t i = 0; i < rows.rows(); ++i) {
            const std::vector<double> row = rows.values.row(i);
            if (const auto* nn = std::get_if<NNModel>(&model))
                preds[i] = nn_predict(*nn, row).label;
            else if (const auto* svm = std::get_if<SVMModel>(&model))
                preds[i] = svm_predict(*svm, row).label;
            else
                preds[i] = wa_classify(std::get<WAModel>(model), row).label;
        }
        return preds;
    }
};

namespace detail {

inline json matrix_to_json(const Matrix& m) {
    json rows = json::array();
    for (std::size_t i = 0; i < m.rows(); ++i) rows.push_back(m.row(i));
    return json{{"rows", m.rows()}, {"cols", m.cols()}, {"data", rows}};
}
inline Matrix matrix_from_json(const json& j) {
    Matrix m(j.at("rows").get<std::size_t>(), j.at("cols").get<std::size_t>());
    const auto& rows = j.at("data");
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t c = 0; c < m.cols(); ++c) m(i, c) = rows[i][c].get<double>();
    return m;
}

inline json kernel_to_json(const KernelSpec& k) {
    return json{{"kind", k.kind == KernelKind::RBF ? "rbf" : "polynomial"},
                {"gamma", k.gamma},
                {"coef_c", k.coef_c},
                {"degree", k.degree}};
}
inline KernelSpec kernel_from_json(const json& j) {
    KernelSpec k;
    k.kind = j.at("kind").get<std::string>() == "rbf" ? KernelKind::RBF : KernelKind::Polynomial;
    k.gamma = j.at("gamma").get<double>();
    k.coef_c = j.at("coef_c").get<double>();
    k.degree = j.at("degree").get<int>();
    return k;
}

} // namespace detail

inline json model_to_json(const SavedModel& m) {
    json j;
    j["schema_version"] = kSchemaVersion;
    j["method"] = to_string(m.method);
    j["feature_mode"] = to_string(m.mode);
    j["features"] = m.features;
    j["col_min"] = m.col_min;
    j["col_max"] = m.col_max;
    j["split_seed"] = m.split_seed;
    if (const auto* nn = std::get_if<NNModel>(&m.model)) {
        j["model"] = json{{"type", "nn"},
                          {"inputs", nn->inputs},
                          {"hidden", nn->hidden},
                          {"weights", nn->weights},
                          {"final_error", nn->final_error},
                          {"epochs", nn->epochs},
                          {"converged", nn->converged}};
    } else if (const auto* svm = std::get_if<SVMModel>(&m.model)) {
        j["model"] = json{{"type", "svm"},
                          {"kernel", detail::kernel_to_json(svm->kernel)},
                          {"c_reg", svm->c_reg},
                          {"bias", svm->bias},
                          {"coefficients", svm->coefficients},
                          {"support_vectors", detail::matrix_to_json(svm->support_vectors)},
                          {"converged", svm->converged}};
    } else {
        const auto& wa = std::get<WAModel>(m.model);
        j["model"] = json{{"type", "wa"},
                          {"profile_index", wa.profile_index},
                          {"feature_names", wa.table.feature_names},
                          {"counts", wa.table.counts},
                          {"averages", wa.table.averages},
                          {"normalized_counts", wa.table.normalized_counts},
                          {"weights", wa.table.weights},
                          {"all_counts_equal", wa.table.all_counts_equal}};
    }
    return j;
}

inline SavedModel model_from_json(const json& j) {
    SavedModel m;
    m.method = method_from_string(j.at("method").get<std::string>()).value();
    m.mode = mode_from_string(j.at("feature_mode").get<std::string>()).value();
    m.features = j.at("features").get<std::vector<std::string>>();
    m.col_min = j.at("col_min").get<std::vector<double>>();
    m.col_max = j.at("col_max").get<std::vector<double>>();
    m.split_seed = j.at("split_seed").get<std::uint64_t>();
    const json& mj = j.at("model");
    const std::string type = mj.at("type").get<std::string>();
    if (type == "nn") {
        NNModel nn;
        nn.inputs = mj.at("inputs").get<std::size_t>();
        nn.hidden = mj.at("hidden").get<std::size_t>();
        nn.weights = mj.at("weights").get<std::vector<double>>();
        nn.final_error = mj.at("final_error").get<double>();
        nn.epochs = mj.at("epochs").get<std::size_t>();
        nn.converged = mj.at("converged").get<bool>();
        m.model = std::move(nn);
    } else if (type == "svm") {
        SVMModel svm;
        svm.kernel = detail::kernel_from_json(mj.at("kernel"));
        svm.c_reg = mj.at("c_reg").get<double>();
        svm.bias = mj.at("bias").get<double>();
        svm.coefficients = mj.at("coefficients").get<std::vector<double>>();
        svm.support_vectors = detail::matrix_from_json(mj.at("support_vectors"));
        svm.converged = mj.at("converged").get<bool>();
        m.model = std::move(svm);
    } else {
        WAModel wa;
        wa.profile_index = mj.at("profile_index").get<double>();
        wa.table.feature_names = mj.at("feature_names").get<std::vector<std::string>>();
        wa.table.counts = mj.at("counts").get<std::vector<int>>();
        wa.table.averages = mj.at("averages").get<std::vector<double>>();
        wa.table.normalized_counts = mj.at("normalized_counts").get<std::vector<double>>();
        wa.table.weights = mj.at("weights").get<std::vector<double>>();
        wa.table.all_counts_equal = mj.at("all_counts_equal").get<bool>();
        m.model = std::move(wa);
    }
    return m;
}

// ---------------------------------------------------------------------------
// Single-cell training (shared by run_experiment and the train CLI)
// ---------------------------------------------------------------------------

struct CellContext {
    const FeatureMatrix& full;        // full-set normalized matrix, chosen columns
    std::vector<std::size_t> train_rows;
    std::vector<std::size_t> test_rows;
    std::vector<int> train_labels;
    std::vector<int> test_labels;
    std::vector<std::size_t> legit_rows; // legitimate rows of the full set
};

struct CellResult {
    MetricReport metrics;
    McNemarResult mcnemar_vs_truth;
    double training_error = 0.0; // NN cross-entropy; 0 otherwise
    double profile_index = 0.0;  // WA only
    std::variant<NNModel, SVMModel, WAModel> model;
};

inline CellResult run_cell(Method method, const CellContext& ctx, const MethodParams& params) {
    const FeatureMatrix train = ctx.full.select_rows(ctx.train_rows);
    const FeatureMatrix test = ctx.full.select_rows(ctx.test_rows);
    CellResult out;

    if (method == Method::NN) {
        NNModel nn = nn_train(train.values, ctx.train_labels, params.nn);
        out.training_error = nn.final_error;
        std::vector<int> preds(test.rows());
        for (std::size_t i = 0; i < test.rows(); ++i)
            preds[i] = nn_predict(nn, test.values.row(i)).label;
        out.metrics = compute_metrics(preds, ctx.test_labels);
        out.mcnemar_vs_truth = mcnemar(preds, ctx.test_labels);
        out.model = std::move(nn);
    } else if (method == Method::SvmRbf || method == Method::SvmPoly) {
        const KernelSpec spec = method == Method::SvmRbf ? params.rbf : params.poly;
        SVMModel svm = svm_train(train.values, ctx.train_labels, spec, params.svm_c);
        std::vector<int> preds(test.rows());
        for (std::size_t i = 0; i < test.rows(); ++i)
            preds[i] = svm_predict(svm, test.values.row(i)).label;
        out.metrics = compute_metrics(preds, ctx.test_labels);
        out.mcnemar_vs_truth = mcnemar(preds, ctx.test_labels);
        out.model = std::move(svm);
    } else {
        const auto& weight_rows = params.wa_train_only
                                      ? ctx.train_rows
                                      : ctx.legit_rows; // full-set legit by default
        std::vector<std::size_t> legit;
        if (params.wa_train_only) {
            for (std::size_t i = 0; i < ctx.train_rows.size(); ++i)
                if (ctx.train_labels[i] == 1) legit.push_back(ctx.train_rows[i]);
        } else {
            legit = weight_rows;
        }
        const FeatureWeightTable table = wa_feature_stats(ctx.full.select_rows(legit));
        const WAModel wa = wa_index(table, test); // index over the respective test set
        out.profile_index = wa.profile_index;
        std::vector<int> preds(test.rows());
        for (std::size_t i = 0; i < test.rows(); ++i)
            preds[i] = wa_classify(wa, test.values.row(i)).label;
        out.metrics = compute_metrics(preds, ctx.test_labels);
        out.mcnemar_vs_truth = mcnemar(preds, ctx.test_labels);
        out.model = wa;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Experiment grid
// ---------------------------------------------------------------------------

struct ExperimentRow {
    int dataset = 0; // 1-based
    FeatureMode mode = FeatureMode::All;
    Method method = Method::NN;
    MetricReport metrics;
    McNemarResult mcnemar_vs_truth;
    double training_error = 0.0;
    double profile_index = 0.0;
};

struct ExperimentReport {
    std::vector<std::string> selected_features;
    std::vector<RemovedFeature> removed_features;
    std::vector<ExperimentRow> rows;
    // cross-dataset averages keyed by (mode, method)
    struct Average {
        FeatureMode mode;
        Method method;
        double accuracy_pct = 0.0, tpr = 0.0, tnr = 0.0;
    };
    std::vector<Average> averages;
};

inline ExperimentReport run_experiment(const ProfileSet& profiles, const ExperimentConfig& cfg) {
    if (cfg.methods.empty()) throw BadValueError("run_experiment: need at least one method");
    if (cfg.seeds[0] == cfg.seeds[1] || cfg.seeds[0] == cfg.seeds[2] ||
        cfg.seeds[1] == cfg.seeds[2])
        throw BadValueError("run_experiment: split seeds must be distinct");

    const FeatureMatrix full = normalize(profiles);
    const SelectionResult selection = select_features(full);

    ExperimentReport report;
    report.selected_features = selection.selected_features;
    report.removed_features = selection.removed_features;

    std::map<std::string, std::size_t> row_of_id;
    for (std::size_t i = 0; i < profiles.size(); ++i) row_of_id[profiles.records[i].profile_id] = i;
    std::vector<std::size_t> legit_rows;
    for (std::size_t i = 0; i < profiles.size(); ++i)
        if (profiles.records[i].legitimacy == 1) legit_rows.push_back(i);

    struct Cell {
        int dataset;
        FeatureMode mode;
        Method method;
    };
    std::vector<Cell> cells;
    for (int ds = 0; ds < 3; ++ds)
        for (FeatureMode mode : cfg.modes)
            for (Method method : cfg.methods) cells.push_back({ds, mode, method});

    // per-dataset row indices
    std::array<std::vector<std::size_t>, 3> train_rows, test_rows;
    for (int ds = 0; ds < 3; ++ds) {
        const DatasetSplit s = split(profiles, cfg.seeds[static_cast<std::size_t>(ds)]);
        for (const auto& r : s.train.records) train_rows[ds].push_back(row_of_id.at(r.profile_id));
        for (const auto& r : s.test.records) test_rows[ds].push_back(row_of_id.at(r.profile_id));
    }
    const FeatureMatrix selected_matrix = full.select_columns(selection.selected_indices);

    auto run_one = [&](const Cell& cell) {
        const FeatureMatrix& mat =
            cell.mode == FeatureMode::All ? full : selected_matrix;
        CellContext ctx{mat,
                        train_rows[cell.dataset],
                        test_rows[cell.dataset],
                        {},
                        {},
                        legit_rows};
        for (std::size_t i : ctx.train_rows)
            ctx.train_labels.push_back(profiles.records[i].legitimacy);
        for (std::size_t i : ctx.test_rows)
            ctx.test_labels.push_back(profiles.records[i].legitimacy);
        const CellResult res = run_cell(cell.method, ctx, cfg.params);
        ExperimentRow row;
        row.dataset = cell.dataset + 1;
        row.mode = cell.mode;
        row.method = cell.method;
        row.metrics = res.metrics;
        row.mcnemar_vs_truth = res.mcnemar_vs_truth;
        row.training_error = res.training_error;
        row.profile_index = res.profile_index;
        return row;
    };

    report.rows.resize(cells.size());
    if (cfg.parallel) {
        std::vector<std::future<ExperimentRow>> futs;
        futs.reserve(cells.size());
        for (const Cell& c : cells)
            futs.push_back(std::async(std::launch::async, run_one, c));
        for (std::size_t i = 0; i < cells.size(); ++i) report.rows[i] = futs[i].get();
    } else {
        for (std::size_t i = 0; i < cells.size(); ++i) report.rows[i] = run_one(cells[i]);
    }

    for (FeatureMode mode : cfg.modes) {
        for (Method method : cfg.methods) {
            ExperimentReport::Average avg{mode, method, 0.0, 0.0, 0.0};
            int n = 0;
            for (const ExperimentRow& row : report.rows) {
                if (row.mode != mode || row.method != method) continue;
                avg.accuracy_pct += row.metrics.accuracy_pct;
                avg.tpr += row.metrics.tpr;
                avg.tnr += row.metrics.tnr;
                ++n;
            }
            avg.accuracy_pct /= n;
            avg.tpr /= n;
            avg.tnr /= n;
            report.averages.push_back(avg);
        }
    }
    return report;
}

inline json report_to_json(const ExperimentReport& report, const ExperimentConfig& cfg) {
    json j;
    j["schema_version"] = kSchemaVersion;
    j["seeds"] = cfg.seeds;
    j["selected_features"] = report.selected_features;
    json removed = json::array();
    for (const auto& r : report.removed_features)
        removed.push_back(json{{"name", r.name}, {"iteration", r.iteration}});
    j["removed_features"] = removed;
    json rows = json::array();
    for (const auto& row : report.rows) {
        json r;
        r["dataset"] = row.dataset;
        r["feature_mode"] = to_string(row.mode);
        r["method"] = to_string(row.method);
        r["accuracy_pct"] = row.metrics.accuracy_pct;
        r["tpr"] = row.metrics.tpr;
        r["tnr"] = row.metrics.tnr;
        r["confusion"] = json{{"tp", row.metrics.confusion.tp},
                              {"fn", row.metrics.confusion.fn},
                              {"fp", row.metrics.confusion.fp},
                              {"tn", row.metrics.confusion.tn}};
        r["mcnemar"] = json{{"b", row.mcnemar_vs_truth.b},
                            {"c", row.mcnemar_vs_truth.c},
                            {"p", row.mcnemar_vs_truth.p},
                            {"exact", row.mcnemar_vs_truth.exact}};
        if (row.method == Method::NN) r["training_error"] = row.training_error;
        if (row.method == Method::WA) r["profile_index"] = row.profile_index;
        rows.push_back(r);
    }
    j["rows"] = rows;
    json avgs = json::array();
    for (const auto& a : report.averages)
        avgs.push_back(json{{"feature_mode", to_string(a.mode)},
                            {"method", to_string(a.method)},
                            {"accuracy_pct", a.accuracy_pct},
                            {"tpr", a.tpr},
                            {"tnr", a.tnr}});
    j["averages"] = avgs;
    return j;
}

// ---------------------------------------------------------------------------
// Default sweep method: SVM polynomial on PCA-selected features, everything
// derived from the training half (bounds and selection), leakage-free.
// ---------------------------------------------------------------------------

inline MethodFn make_svm_poly_pca_method(MethodParams params = {}) {
    return [params](const ProfileSet& train, const ProfileSet& test) {
        const FeatureMatrix train_norm = normalize(train);
        std::vector<std::size_t> cols(train_norm.cols());
        for (std::size_t j = 0; j < cols.size(); ++j) cols[j] = j;
        try {
            const SelectionResult sel = select_features(train_norm);
            if (!sel.selected_indices.empty()) cols = sel.selected_indices;
        } catch (const Error&) {
            // selection degenerate on tiny subsamples: fall back to all features
        }
        const FeatureMatrix train_sel = train_norm.select_columns(cols);
        const FeatureMatrix test_sel = apply_normalization(
            test, train_sel.feature_names, train_sel.col_min, train_sel.col_max);
        const SVMModel svm =
            svm_train(train_sel.values, train.labels(), params.poly, params.svm_c);
        std::vector<int> preds(test_sel.rows());
        for (std::size_t i = 0; i < test_sel.rows(); ++i)
            preds[i] = svm_predict(svm, test_sel.values.row(i)).label;
        return preds;
    };
}

// ---------------------------------------------------------------------------
// Plot-ready CSV for the sweep
// ---------------------------------------------------------------------------

inline std::string sweep_to_csv(const SweepCurve& curve) {
    std::ostringstream out;
    out << "# schema_version " << kSchemaVersion << "\n";
    out << "fraction,mean_tpr,mean_tnr,stddev_tpr,stddev_tnr\n";
    out.precision(6);
    out << std::fixed;
    for (const SweepPoint& p : curve.points)
        out << p.fraction << ',' << p.mean_tpr << ',' << p.mean_tnr << ',' << p.stddev_tpr << ','
            << p.stddev_tnr << '\n';
    return out.str();
}

// ---------------------------------------------------------------------------
// Atomic file writes (temp + rename)
// ---------------------------------------------------------------------------

inline void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
    const std::filesystem::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot open " + tmp.string() + " for writing");
        out << content;
        if (!out.flush()) throw Error("write failed for " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace fpdetect

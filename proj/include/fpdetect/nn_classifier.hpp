#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

#include "fpdetect/errors.hpp"
#include "fpdetect/matrix.hpp"

namespace fpdetect {

struct NNConfig {
    std::size_t hidden_neurons = 2;
    double eta_plus = 1.2;
    double eta_minus = 0.5;
    double delta_init = 0.1;
    double delta_max = 50.0;
    double delta_min = 1e-6;
    std::size_t max_epochs = 100000;
    double gradient_threshold = 0.01; // stop when every |dE/dw| falls below this
    std::uint64_t weight_init_seed = 0;
    bool record_loss_history = false;
};

/// Feed-forward net: inputs -> one logistic hidden layer -> one logistic
/// output, flat weight layout [W1 (hidden x (in+1)) | W2 (1 x (hidden+1))],
/// bias last in each row.
struct NNModel {
    std::size_t inputs = 0;
    std::size_t hidden = 0;
    std::vector<double> weights;
    double final_error = 0.0; // cross-entropy over the training set
    std::size_t epochs = 0;
    bool converged = false;
    NNConfig config;
    std::vector<double> loss_history; // populated when cfg.record_loss_history

    std::size_t weight_count() const { return hidden * (inputs + 1) + (hidden + 1); }
};

struct NNPrediction {
    double score = 0.0; // in (0, 1)
    int label = 0;      // 1 iff score >= 0.5
};

namespace nn_detail {

inline double logistic(double z) { return 1.0 / (1.0 + std::exp(-z)); }

inline double forward(const NNModel& m, const double* row, std::vector<double>& hidden_act) {
    hidden_act.resize(m.hidden);
    const double* w1 = m.weights.data();
    for (std::size_t h = 0; h < m.hidden; ++h) {
        const double* wr = w1 + h * (m.inputs + 1);
        double z = wr[m.inputs]; // bias
        for (std::size_t i = 0; i < m.inputs; ++i) z += wr[i] * row[i];
        hidden_act[h] = logistic(z);
    }
    const double* w2 = m.weights.data() + m.hidden * (m.inputs + 1);
    double z = w2[m.hidden]; // bias
    for (std::size_t h = 0; h < m.hidden; ++h) z += w2[h] * hidden_act[h];
    return logistic(z);
}

} // namespace nn_detail

/// Cross-entropy loss and its analytic gradient over a batch. Exposed so the
/// gradient can be checked against finite differences independently of the
/// Rprop update.
inline double nn_loss_gradient(const NNModel& model, const Matrix& x,
                               const std::vector<int>& y, std::vector<double>& grad) {
    const std::size_t n = x.rows(), in = model.inputs, hid = model.hidden;
    grad.assign(model.weight_count(), 0.0);
    double loss = 0.0;
    std::vector<double> a1;
    const double* w2 = model.weights.data() + hid * (in + 1);
    double* g1 = grad.data();
    double* g2 = grad.data() + hid * (in + 1);

    for (std::size_t p = 0; p < n; ++p) {
        std::vector<double> row = x.row(p);
        const double yhat = nn_detail::forward(model, row.data(), a1);
        const double t = static_cast<double>(y[p]);
        const double eps = 1e-12;
        loss -= t * std::log(std::max(yhat, eps)) + (1.0 - t) * std::log(std::max(1.0 - yhat, eps));

        const double dout = yhat - t; // dE/dz for logistic output with cross-entropy
        for (std::size_t h = 0; h < hid; ++h) g2[h] += dout * a1[h];
        g2[hid] += dout;
        for (std::size_t h = 0; h < hid; ++h) {
            const double dh = dout * w2[h] * a1[h] * (1.0 - a1[h]);
            double* gr = g1 + h * (in + 1);
            for (std::size_t i = 0; i < in; ++i) gr[i] += dh * row[i];
            gr[in] += dh;
        }
    }
    return loss;
}

/// Batch Rprop without weight backtracking: per-weight step sizes grow by
/// eta_plus on gradient-sign agreement, shrink by eta_minus on a sign flip
/// (with the stored gradient zeroed), and the step is applied against the
/// gradient sign.
inline NNModel nn_train(const Matrix& x, const std::vector<int>& y, const NNConfig& cfg = {}) {
    if (x.rows() != y.size()) throw LengthMismatchError("nn_train: rows != labels");
    if (x.rows() == 0) throw EmptySetError("nn_train: empty training set");
    for (int label : y)
        if (label != 0 && label != 1)
            throw NonBinaryLabelsError("nn_train: labels must be 0 or 1");

    NNModel model;
    model.inputs = x.cols();
    model.hidden = cfg.hidden_neurons;
    model.config = cfg;
    const std::size_t nw = model.weight_count();
    model.weights.resize(nw);

    std::mt19937_64 rng(cfg.weight_init_seed);
    for (double& w : model.weights)
        w = (static_cast<double>(rng() >> 11) * 0x1.0p-53) - 0.5; // uniform [-0.5, 0.5)

    std::vector<double> grad(nw), prev_grad(nw, 0.0), step(nw, cfg.delta_init);

    for (std::size_t epoch = 0; epoch < cfg.max_epochs; ++epoch) {
        const double loss = nn_loss_gradient(model, x, y, grad);
        if (!std::isfinite(loss)) throw DivergedError("nn_train: non-finite loss");
        if (cfg.record_loss_history) model.loss_history.push_back(loss);
        model.final_error = loss;
        model.epochs = epoch + 1;

        double max_abs_grad = 0.0;
        for (double g : grad) max_abs_grad = std::max(max_abs_grad, std::fabs(g));
        if (max_abs_grad < cfg.gradient_threshold) {
            model.converged = true;
            break;
        }

        for (std::size_t w = 0; w < nw; ++w) {
            const double prod = prev_grad[w] * grad[w];
            if (prod > 0.0) {
                step[w] = std::min(step[w] * cfg.eta_plus, cfg.delta_max);
            } else if (prod < 0.0) {
                step[w] = std::max(step[w] * cfg.eta_minus, cfg.delta_min);
                grad[w] = 0.0; // suppress a second adaptation on the flip
            }
            if (grad[w] > 0.0)
                model.weights[w] -= step[w];
            else if (grad[w] < 0.0)
                model.weights[w] += step[w];
            prev_grad[w] = grad[w];
        }
    }

    // record the loss at the final weights
    model.final_error = nn_loss_gradient(model, x, y, grad);
    return model;
}

inline NNPrediction nn_predict(const NNModel& model, const std::vector<double>& row) {
    if (row.size() != model.inputs)
        throw DimensionMismatchError("nn_predict: row width does not match model");
    std::vector<double> a1;
    const double score = nn_detail::forward(model, row.data(), a1);
    return {score, score >= 0.5 ? 1 : 0};
}

} // namespace fpdetect

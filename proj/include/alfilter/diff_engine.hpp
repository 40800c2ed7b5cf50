#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "alfilter/errors.hpp"
#include "alfilter/model.hpp"

namespace alf {

/// Mean over samples of the squared L2 distance; samples are columns.
template <typename Real>
double loss_mse(const Mat<Real>& pred, const Mat<Real>& target) {
    if (pred.rows() != target.rows() || pred.cols() != target.cols()) {
        throw ShapeError("loss_mse: prediction and target shapes differ");
    }
    if (pred.cols() == 0) {
        throw InputError("loss_mse: empty batch");
    }
    return (pred - target).template cast<double>().squaredNorm() / static_cast<double>(pred.cols());
}

template <typename Real>
struct GradientSet {
    std::vector<Mat<Real>> weight;
    std::vector<Vec<Real>> bias;
    std::vector<double> alpha;  // one entry per grid node
};

struct LossParts {
    double total = 0.0;
    double mse = 0.0;
    double tv = 0.0;  // unweighted tv_penalty of the grid
};

template <typename Real>
struct BackwardResult {
    LossParts loss;
    GradientSet<Real> grads;
};

namespace detail {

template <typename Derived>
void require_finite(const Eigen::MatrixBase<Derived>& m, const std::string& where) {
    if (!m.allFinite()) {
        throw NumericalError("backward: non-finite value in " + where);
    }
}

}  // namespace detail

/// Routes per-sample d loss / d alpha into the grid nodes in sample order.
template <typename Real>
void scatter_alpha_grad(const CoordBatch<Real>& batch, const Eigen::VectorXd& dalpha, std::vector<double>& grad) {
    for (Eigen::Index p = 0; p < batch.size(); ++p) {
        const double g = dalpha[p];
        for (std::size_t i = batch.offsets[p]; i < batch.offsets[p + 1]; ++i) {
            grad[batch.weights[i].node] += batch.weights[i].weight * g;
        }
    }
}

/// d (sum of d_features . filtered features) / d alpha for each sample.
template <typename Real>
Eigen::VectorXd feature_grad_to_alpha(const Mat<Real>& d_features, const CoordBatch<Real>& batch,
                                      const ForwardCache<Real>& cache) {
    const Eigen::Index n = batch.size();
    Eigen::VectorXd out(n);
    for (Eigen::Index p = 0; p < n; ++p) {
        double s = 0.0;
        for (Eigen::Index c = 0; c < d_features.rows(); ++c) {
            s += static_cast<double>(d_features(c, p)) * static_cast<double>(batch.gamma(c, p)) *
                 static_cast<double>(cache.dresponse(c, p));
        }
        out[p] = s;
    }
    return out;
}

/// Exact gradients of MSE(batch) + tv_weight * tv_penalty(alpha grid) with
/// respect to every MLP parameter and every alpha-grid node.
template <typename Real>
BackwardResult<Real> backward(const InrModel<Real>& model, const CoordBatch<Real>& batch, const Mat<Real>& target,
                              double tv_weight) {
    if (target.cols() != batch.size() || target.rows() != model.output_dim()) {
        throw ShapeError("backward: target shape does not match batch/output");
    }
    if (batch.size() == 0) {
        throw InputError("backward: empty batch");
    }
    ForwardCache<Real> cache;
    const Mat<Real> pred = forward_batch(model, batch, &cache);

    BackwardResult<Real> r;
    r.loss.mse = loss_mse(pred, target);
    r.loss.tv = model.alpha.tv_penalty();
    r.loss.total = r.loss.mse + tv_weight * r.loss.tv;
    if (!std::isfinite(r.loss.total)) {
        throw NumericalError("backward: non-finite loss (mse=" + std::to_string(r.loss.mse) +
                             ", tv=" + std::to_string(r.loss.tv) + ")");
    }

    const Real scale = static_cast<Real>(2.0 / static_cast<double>(batch.size()));
    const Mat<Real> d_out = (pred - target) * scale;
    MlpGrads<Real> g = mlp_backward(model.mlp, cache.trace, d_out);
    for (std::size_t i = 0; i < g.weight.size(); ++i) {
        detail::require_finite(g.weight[i], "weight gradient of layer " + std::to_string(i));
        detail::require_finite(g.bias[i], "bias gradient of layer " + std::to_string(i));
    }
    r.grads.weight = std::move(g.weight);
    r.grads.bias = std::move(g.bias);
    r.grads.alpha.assign(model.alpha.size(), 0.0);
    if (model.mode == FilterMode::adaptive) {
        const Eigen::VectorXd dalpha = feature_grad_to_alpha(g.input, batch, cache);
        detail::require_finite(dalpha, "alpha gradient");
        scatter_alpha_grad(batch, dalpha, r.grads.alpha);
    }
    if (tv_weight != 0.0) {
        model.alpha.add_tv_subgradient(r.grads.alpha, tv_weight);
    }
    return r;
}

/// base_lr * decay^floor(step / step_size).
inline double lr_at(std::int64_t step, double base_lr, std::int64_t step_size = 1250, double decay = 0.6) {
    if (step < 0) {
        throw InputError("lr_at: negative step");
    }
    return base_lr * std::pow(decay, static_cast<double>(step / step_size));
}

struct AdamSettings {
    double lr_network = 1e-3;
    double lr_alpha = 3e-3;
    std::int64_t step_size = 1250;
    double decay = 0.6;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    bool train_alpha = true;
};

template <typename Real>
struct OptimState {
    AdamSettings settings;
    std::int64_t step = 0;  // completed updates
    std::vector<Mat<Real>> m_weight, v_weight;
    std::vector<Vec<Real>> m_bias, v_bias;
    std::vector<double> m_alpha, v_alpha;

    double current_lr_network() const { return lr_at(step, settings.lr_network, settings.step_size, settings.decay); }
    double current_lr_alpha() const { return lr_at(step, settings.lr_alpha, settings.step_size, settings.decay); }
};

template <typename Real>
OptimState<Real> make_optim_state(const InrModel<Real>& model, const AdamSettings& settings) {
    OptimState<Real> s;
    s.settings = settings;
    for (const auto& l : model.mlp.layers) {
        s.m_weight.push_back(Mat<Real>::Zero(l.weight.rows(), l.weight.cols()));
        s.v_weight.push_back(Mat<Real>::Zero(l.weight.rows(), l.weight.cols()));
        s.m_bias.push_back(Vec<Real>::Zero(l.bias.size()));
        s.v_bias.push_back(Vec<Real>::Zero(l.bias.size()));
    }
    s.m_alpha.assign(model.alpha.size(), 0.0);
    s.v_alpha.assign(model.alpha.size(), 0.0);
    return s;
}

namespace detail {

template <typename Real, typename P, typename G, typename M>
void adam_update(P& param, const G& grad, M& m, M& v, double lr, double bc1, double bc2, const AdamSettings& s) {
    const Real b1 = static_cast<Real>(s.beta1);
    const Real b2 = static_cast<Real>(s.beta2);
    m = b1 * m + (Real(1) - b1) * grad;
    v = b2 * v + (Real(1) - b2) * grad.cwiseProduct(grad);
    const Real step = static_cast<Real>(lr / bc1);
    const Real inv_bc2 = static_cast<Real>(1.0 / std::sqrt(bc2));
    param.array() -= step * m.array() / (v.array().sqrt() * inv_bc2 + static_cast<Real>(s.eps));
}

}  // namespace detail

/// One bias-corrected Adam update. The scheduler factor for the current step
/// applies to both parameter groups.
template <typename Real>
void adam_step(InrModel<Real>& model, const GradientSet<Real>& grads, OptimState<Real>& state) {
    const auto& s = state.settings;
    if (grads.weight.size() != model.mlp.layers.size() || grads.alpha.size() != model.alpha.size()) {
        throw ShapeError("adam_step: gradient set does not match model");
    }
    const double lr_net = state.current_lr_network();
    const double lr_alpha = state.current_lr_alpha();
    const std::int64_t t = state.step + 1;
    const double bc1 = 1.0 - std::pow(s.beta1, static_cast<double>(t));
    const double bc2 = 1.0 - std::pow(s.beta2, static_cast<double>(t));
    for (std::size_t i = 0; i < model.mlp.layers.size(); ++i) {
        auto& layer = model.mlp.layers[i];
        detail::adam_update<Real>(layer.weight, grads.weight[i], state.m_weight[i], state.v_weight[i], lr_net, bc1,
                                  bc2, s);
        detail::adam_update<Real>(layer.bias, grads.bias[i], state.m_bias[i], state.v_bias[i], lr_net, bc1, bc2, s);
    }
    if (s.train_alpha && model.mode == FilterMode::adaptive) {
        auto nodes = model.alpha.nodes();
        const double step = lr_alpha / bc1;
        const double sq = std::sqrt(bc2);
        for (std::size_t i = 0; i < nodes.size(); ++i) {
            const double g = grads.alpha[i];
            state.m_alpha[i] = s.beta1 * state.m_alpha[i] + (1.0 - s.beta1) * g;
            state.v_alpha[i] = s.beta2 * state.v_alpha[i] + (1.0 - s.beta2) * g * g;
            nodes[i] -= step * state.m_alpha[i] / (std::sqrt(state.v_alpha[i]) / sq + s.eps);
        }
    }
    state.step = t;
}

}  // namespace alf

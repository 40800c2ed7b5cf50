#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "alfilter/errors.hpp"

namespace alf {

template <typename Real>
using Mat = Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Real>
using Vec = Eigen::Matrix<Real, Eigen::Dynamic, 1>;

enum class Activation { relu, sine };

inline std::string to_string(Activation a) { return a == Activation::relu ? "relu" : "sine"; }

inline Activation parse_activation(const std::string& s) {
    if (s == "relu") return Activation::relu;
    if (s == "sine") return Activation::sine;
    throw ConfigError("unknown activation '" + s + "' (expected relu or sine)");
}

template <typename Real>
struct DenseLayer {
    Mat<Real> weight;  // out x in
    Vec<Real> bias;    // out

    int in() const { return static_cast<int>(weight.cols()); }
    int out() const { return static_cast<int>(weight.rows()); }
};

/// Affine layers with an activation between consecutive layers; the last layer
/// is affine only. For the sine variant the first hidden layer computes
/// sin(omega0 * (W z + b)) and later hidden layers sin(W z + b).
template <typename Real>
struct MlpParams {
    std::vector<DenseLayer<Real>> layers;
    Activation activation = Activation::sine;
    double omega0 = 30.0;

    int input_dim() const { return layers.front().in(); }
    int output_dim() const { return layers.back().out(); }

    std::vector<int> widths() const {
        std::vector<int> w;
        if (layers.empty()) return w;
        w.push_back(layers.front().in());
        for (const auto& l : layers) w.push_back(l.out());
        return w;
    }

    std::size_t parameter_count() const {
        std::size_t n = 0;
        for (const auto& l : layers) n += static_cast<std::size_t>(l.weight.size() + l.bias.size());
        return n;
    }

    void validate() const {
        if (layers.empty()) {
            throw ConfigError("mlp: no layers");
        }
        if (!(omega0 > 0.0)) {
            throw ConfigError("mlp: omega0 must be positive");
        }
        for (std::size_t i = 0; i < layers.size(); ++i) {
            if (layers[i].bias.size() != layers[i].weight.rows()) {
                throw ConfigError("mlp: layer " + std::to_string(i) + " bias length mismatch");
            }
            if (i > 0 && layers[i].in() != layers[i - 1].out()) {
                throw ConfigError("mlp: layer " + std::to_string(i) + " input width " +
                                  std::to_string(layers[i].in()) + " does not chain with previous output " +
                                  std::to_string(layers[i - 1].out()));
            }
        }
    }

    template <typename Other>
    MlpParams<Other> cast() const {
        MlpParams<Other> out;
        out.activation = activation;
        out.omega0 = omega0;
        for (const auto& l : layers) {
            out.layers.push_back({l.weight.template cast<Other>(), l.bias.template cast<Other>()});
        }
        return out;
    }
};

/// widths = {input, hidden..., output}.
///
/// relu: weights U(+-sqrt(6/fan_in)). sine: first layer U(+-1/fan_in), later
/// layers U(+-sqrt(6/fan_in)/omega0). Biases U(+-1/sqrt(fan_in)) in both
/// cases. Values are drawn in double so float and double models built from
/// the same seed agree up to rounding.
template <typename Real = double>
MlpParams<Real> init_params(const std::vector<int>& widths, Activation activation, std::uint64_t seed,
                            double omega0 = 30.0) {
    if (widths.size() < 2) {
        throw ConfigError("init_params: need at least input and output widths");
    }
    for (int w : widths) {
        if (w < 1) throw ConfigError("init_params: widths must be positive");
    }
    std::mt19937_64 rng(seed);
    MlpParams<Real> p;
    p.activation = activation;
    p.omega0 = omega0;
    for (std::size_t i = 0; i + 1 < widths.size(); ++i) {
        const int fan_in = widths[i];
        const int fan_out = widths[i + 1];
        double bound;
        if (activation == Activation::relu) {
            bound = std::sqrt(6.0 / fan_in);
        } else if (i == 0) {
            bound = 1.0 / fan_in;
        } else {
            bound = std::sqrt(6.0 / fan_in) / omega0;
        }
        std::uniform_real_distribution<double> wdist(-bound, bound);
        const double bbound = 1.0 / std::sqrt(static_cast<double>(fan_in));
        std::uniform_real_distribution<double> bdist(-bbound, bbound);
        DenseLayer<Real> layer{Mat<Real>(fan_out, fan_in), Vec<Real>(fan_out)};
        for (int r = 0; r < fan_out; ++r) {
            for (int c = 0; c < fan_in; ++c) {
                layer.weight(r, c) = static_cast<Real>(wdist(rng));
            }
        }
        for (int r = 0; r < fan_out; ++r) {
            layer.bias[r] = static_cast<Real>(bdist(rng));
        }
        p.layers.push_back(std::move(layer));
    }
    return p;
}

/// Per-batch intermediate values kept for the backward pass.
template <typename Real>
struct MlpTrace {
    std::vector<Mat<Real>> inputs;  // inputs[i] feeds layer i
    std::vector<Mat<Real>> pre;     // pre[i] = W_i inputs[i] + b_i
};

/// Forward pass over a batch (one column per sample). When trace is non-null
/// every layer input and pre-activation is recorded.
template <typename Real>
Mat<Real> mlp_forward(const MlpParams<Real>& p, const Mat<Real>& features, MlpTrace<Real>* trace = nullptr) {
    if (features.rows() != p.input_dim()) {
        throw ShapeError("mlp_forward: feature rows " + std::to_string(features.rows()) + " != input width " +
                         std::to_string(p.input_dim()));
    }
    if (trace) {
        trace->inputs.assign(p.layers.size(), Mat<Real>());
        trace->pre.assign(p.layers.size(), Mat<Real>());
    }
    Mat<Real> z = features;
    const std::size_t k = p.layers.size();
    for (std::size_t i = 0; i < k; ++i) {
        const auto& layer = p.layers[i];
        Mat<Real> pre(layer.out(), z.cols());
        pre.noalias() = layer.weight * z;
        pre.colwise() += layer.bias;
        if (trace) {
            trace->inputs[i] = std::move(z);
        }
        if (i + 1 == k) {
            if (trace) trace->pre[i] = pre;
            return pre;
        }
        if (p.activation == Activation::relu) {
            z = pre.cwiseMax(Real(0));
        } else if (i == 0) {
            z = (pre.array() * static_cast<Real>(p.omega0)).sin().matrix();
        } else {
            z = pre.array().sin().matrix();
        }
        if (trace) trace->pre[i] = std::move(pre);
    }
    return z;  // unreachable: layers is non-empty
}

/// Per-layer d(output functional)/d(pre-activation), one column per sample,
/// plus the gradient with respect to the network input. Columns stay separate,
/// which is what per-sample Jacobians need.
template <typename Real>
struct MlpDeltas {
    std::vector<Mat<Real>> pre;  // pre[i]: out_i x N
    Mat<Real> input;             // in_0 x N
};

template <typename Real>
MlpDeltas<Real> mlp_backward_deltas(const MlpParams<Real>& p, const MlpTrace<Real>& trace, const Mat<Real>& d_out) {
    const std::size_t k = p.layers.size();
    MlpDeltas<Real> d;
    d.pre.resize(k);
    d.pre[k - 1] = d_out;
    for (std::size_t i = k; i-- > 0;) {
        Mat<Real> dz(p.layers[i].in(), d_out.cols());
        dz.noalias() = p.layers[i].weight.transpose() * d.pre[i];
        if (i == 0) {
            d.input = std::move(dz);
            break;
        }
        const Mat<Real>& pre = trace.pre[i - 1];
        if (p.activation == Activation::relu) {
            d.pre[i - 1] = (pre.array() > Real(0)).select(dz.array(), Real(0)).matrix();
        } else if (i - 1 == 0) {
            const Real w0 = static_cast<Real>(p.omega0);
            d.pre[i - 1] = (dz.array() * (pre.array() * w0).cos() * w0).matrix();
        } else {
            d.pre[i - 1] = (dz.array() * pre.array().cos()).matrix();
        }
    }
    return d;
}

template <typename Real>
struct MlpGrads {
    std::vector<Mat<Real>> weight;
    std::vector<Vec<Real>> bias;
    Mat<Real> input;  // d loss / d features
};

/// Reverse pass: d_out is d loss / d output (one column per sample).
template <typename Real>
MlpGrads<Real> mlp_backward(const MlpParams<Real>& p, const MlpTrace<Real>& trace, const Mat<Real>& d_out) {
    MlpDeltas<Real> d = mlp_backward_deltas(p, trace, d_out);
    const std::size_t k = p.layers.size();
    MlpGrads<Real> g;
    g.weight.resize(k);
    g.bias.resize(k);
    for (std::size_t i = 0; i < k; ++i) {
        g.weight[i].noalias() = d.pre[i] * trace.inputs[i].transpose();
        g.bias[i] = d.pre[i].rowwise().sum();
    }
    g.input = std::move(d.input);
    return g;
}

}  // namespace alf

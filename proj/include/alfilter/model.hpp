#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "alfilter/adaptive_filter.hpp"
#include "alfilter/alpha_field.hpp"
#include "alfilter/errors.hpp"
#include "alfilter/fourier_encoding.hpp"
#include "alfilter/mlp.hpp"

namespace alf {

/// adaptive: features are modulated by H_B(alpha(x)).
/// all_pass: the filter stage is skipped (plain Fourier-feature network).
enum class FilterMode { adaptive, all_pass };

inline std::string to_string(FilterMode m) { return m == FilterMode::adaptive ? "adaptive" : "allpass"; }

inline FilterMode parse_filter_mode(const std::string& s) {
    if (s == "adaptive") return FilterMode::adaptive;
    if (s == "allpass" || s == "all_pass" || s == "all-pass") return FilterMode::all_pass;
    throw ConfigError("unknown filter mode '" + s + "' (expected adaptive or allpass)");
}

template <typename Real>
struct InrModel {
    EncodingConfig encoding;
    FilterConfig filter;
    FilterMode mode = FilterMode::adaptive;
    AlphaGrid alpha;
    MlpParams<Real> mlp;

    void validate() const {
        encoding.validate();
        filter.validate();
        mlp.validate();
        if (filter.channels != encoding.channels() || mlp.input_dim() != encoding.channels()) {
            throw ConfigError("model: channel count mismatch (encoding " + std::to_string(encoding.channels()) +
                              ", filter " + std::to_string(filter.channels) + ", mlp input " +
                              std::to_string(mlp.input_dim()) + ")");
        }
        if (alpha.dims() != encoding.d_in) {
            throw ConfigError("model: alpha grid rank " + std::to_string(alpha.dims()) + " != d_in " +
                              std::to_string(encoding.d_in));
        }
    }

    int output_dim() const { return mlp.output_dim(); }
};

struct ModelSpec {
    int d_in = 2;
    int d_out = 3;
    int levels = 8;
    double bandwidth = 20.0;
    double kappa = 10.0;
    int hidden_layers = 3;
    int hidden_width = 256;
    Activation activation = Activation::sine;
    double omega0 = 30.0;
    FilterMode mode = FilterMode::adaptive;
    std::vector<int> grid_resolution{512, 512};
    double alpha_init = -1.0;  // negative: C_N / 2
};

template <typename Real>
InrModel<Real> make_model(const ModelSpec& spec, std::uint64_t seed) {
    InrModel<Real> m;
    m.encoding = EncodingConfig(spec.d_in, spec.levels);
    const int cn = m.encoding.channels();
    m.filter = FilterConfig(spec.bandwidth, spec.kappa, cn);
    m.mode = spec.mode;
    if (static_cast<int>(spec.grid_resolution.size()) != spec.d_in) {
        throw ConfigError("model: grid resolution rank must equal d_in");
    }
    m.alpha = AlphaGrid(spec.grid_resolution, spec.alpha_init < 0.0 ? default_alpha_init(cn) : spec.alpha_init);
    if (spec.hidden_layers < 0) {
        throw ConfigError("model: hidden layer count must be >= 0");
    }
    std::vector<int> widths{cn};
    for (int i = 0; i < spec.hidden_layers; ++i) widths.push_back(spec.hidden_width);
    widths.push_back(spec.d_out);
    m.mlp = init_params<Real>(widths, spec.activation, seed, spec.omega0);
    m.validate();
    return m;
}

/// A fixed set of query points with everything that does not depend on the
/// trainable parameters precomputed: the encoded features and the grid
/// interpolation weights.
template <typename Real>
struct CoordBatch {
    Eigen::MatrixXd coords;  // d_in x N
    Mat<Real> gamma;         // C_N x N
    std::vector<NodeWeight> weights;
    std::vector<std::size_t> offsets;  // weights of sample n: [offsets[n], offsets[n+1])

    Eigen::Index size() const { return coords.cols(); }
};

template <typename Real>
CoordBatch<Real> make_batch(const InrModel<Real>& model, Eigen::MatrixXd coords) {
    CoordBatch<Real> b;
    b.gamma = encode_batch<Real>(coords, model.encoding);
    const Eigen::Index n = coords.cols();
    b.offsets.reserve(static_cast<std::size_t>(n) + 1);
    b.offsets.push_back(0);
    b.weights.reserve(static_cast<std::size_t>(n) << model.encoding.d_in);
    for (Eigen::Index p = 0; p < n; ++p) {
        model.alpha.query_weights_into(std::span<const double>(coords.col(p).data(), coords.rows()), b.weights);
        b.offsets.push_back(b.weights.size());
    }
    b.coords = std::move(coords);
    return b;
}

template <typename Real>
struct ForwardCache {
    Eigen::VectorXd alpha;  // alpha(x) per sample
    Mat<Real> dresponse;    // d H / d alpha, C_N x N (adaptive only)
    MlpTrace<Real> trace;
};

template <typename Real>
Eigen::VectorXd query_alpha(const InrModel<Real>& model, const CoordBatch<Real>& batch) {
    const Eigen::Index n = batch.size();
    Eigen::VectorXd a(n);
    const auto nodes = model.alpha.nodes();
    for (Eigen::Index p = 0; p < n; ++p) {
        double v = 0.0;
        for (std::size_t i = batch.offsets[p]; i < batch.offsets[p + 1]; ++i) {
            v += batch.weights[i].weight * nodes[batch.weights[i].node];
        }
        a[p] = v;
    }
    return a;
}

/// Filtered features gamma' = H_B(alpha(x)) * gamma(x) for the batch.
template <typename Real>
Mat<Real> filtered_features(const InrModel<Real>& model, const CoordBatch<Real>& batch,
                            ForwardCache<Real>* cache = nullptr) {
    if (model.mode == FilterMode::all_pass) {
        return batch.gamma;
    }
    Eigen::VectorXd a = query_alpha(model, batch);
    auto resp = response_batch<Real>(a, model.filter, cache != nullptr);
    Mat<Real> z = resp.response.cwiseProduct(batch.gamma);
    if (cache) {
        cache->alpha = std::move(a);
        cache->dresponse = std::move(resp.dalpha);
    }
    return z;
}

/// Model output for every sample of the batch, d_out x N.
template <typename Real>
Mat<Real> forward_batch(const InrModel<Real>& model, const CoordBatch<Real>& batch,
                        ForwardCache<Real>* cache = nullptr) {
    Mat<Real> z = filtered_features(model, batch, cache);
    return mlp_forward(model.mlp, z, cache ? &cache->trace : nullptr);
}

/// Single-point forward.
template <typename Real>
Vec<Real> forward(const InrModel<Real>& model, std::span<const double> x) {
    if (static_cast<int>(x.size()) != model.encoding.d_in) {
        throw ShapeError("forward: coordinate dimension mismatch");
    }
    Eigen::MatrixXd coords(model.encoding.d_in, 1);
    for (int k = 0; k < model.encoding.d_in; ++k) coords(k, 0) = x[k];
    return forward_batch(model, make_batch(model, std::move(coords))).col(0);
}

/// Forward over arbitrarily many points in fixed-size chunks.
template <typename Real>
Mat<Real> forward_chunked(const InrModel<Real>& model, const Eigen::MatrixXd& coords, Eigen::Index chunk = 4096) {
    const Eigen::Index n = coords.cols();
    Mat<Real> out(model.output_dim(), n);
    for (Eigen::Index start = 0; start < n; start += chunk) {
        const Eigen::Index len = std::min(chunk, n - start);
        auto b = make_batch(model, Eigen::MatrixXd(coords.middleCols(start, len)));
        out.middleCols(start, len) = forward_batch(model, b);
    }
    return out;
}

/// Pixel-centre coordinates of an H x W image, row-major sample order.
inline Eigen::MatrixXd pixel_grid_coords(int height, int width) {
    Eigen::MatrixXd c(2, static_cast<Eigen::Index>(height) * width);
    Eigen::Index p = 0;
    for (int r = 0; r < height; ++r) {
        for (int col = 0; col < width; ++col, ++p) {
            c(0, p) = (col + 0.5) / width;
            c(1, p) = (r + 0.5) / height;
        }
    }
    return c;
}

}  // namespace alf

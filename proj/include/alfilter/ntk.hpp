#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <limits>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "alfilter/adaptive_filter.hpp"
#include "alfilter/diff_engine.hpp"
#include "alfilter/errors.hpp"
#include "alfilter/model.hpp"

namespace alf {

/// Which parameters the tangent kernel differentiates with respect to.
struct TrainableSet {
    bool mlp_weights = true;
    bool mlp_biases = true;
    bool alpha = false;
};

/// Multi-output models are reduced to a scalar before differentiation:
/// either the sum of output channels or a single channel.
struct Scalarization {
    int channel = -1;  // -1: sum over channels

    static Scalarization sum() { return {}; }
    static Scalarization single(int k) { return {k}; }
};

struct NtkGram {
    Eigen::MatrixXd matrix;
    std::string fingerprint;
};

struct NtkSpectrum {
    std::vector<double> eigenvalues;  // descending
    std::vector<double> normalized;   // eigenvalues / eigenvalues[0]
};

template <typename Real>
std::string model_fingerprint(const InrModel<Real>& m) {
    // FNV-1a over the parameter values.
    std::uint64_t h = 1469598103934665603ull;
    auto mix = [&](double v) {
        const auto bits = std::bit_cast<std::uint64_t>(v);
        for (int i = 0; i < 8; ++i) {
            h ^= (bits >> (8 * i)) & 0xffu;
            h *= 1099511628211ull;
        }
    };
    for (const auto& l : m.mlp.layers) {
        for (Eigen::Index i = 0; i < l.weight.size(); ++i) mix(static_cast<double>(l.weight.data()[i]));
        for (Eigen::Index i = 0; i < l.bias.size(); ++i) mix(static_cast<double>(l.bias[i]));
    }
    for (double v : m.alpha.nodes()) mix(v);
    mix(m.mode == FilterMode::adaptive ? 0.0 : 1.0);
    char buf[24];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

/// Theta = J J^T where row n of J is the gradient of the scalarized output at
/// coords[:, n] with respect to the selected parameters. Built from per-sample
/// backprop deltas: a dense layer contributes (D^T D) o (Z^T Z) for its
/// weights and D^T D for its bias.
template <typename Real>
NtkGram empirical_ntk(const InrModel<Real>& model, const Eigen::MatrixXd& coords, const TrainableSet& trainable = {},
                      const Scalarization& scalar = {}) {
    model.validate();
    const Eigen::Index n = coords.cols();
    if (n < 2) {
        throw InputError("empirical_ntk: need at least 2 coordinates");
    }
    if (scalar.channel >= model.output_dim()) {
        throw ConfigError("empirical_ntk: scalarization channel out of range");
    }
    const CoordBatch<Real> batch = make_batch(model, coords);
    ForwardCache<Real> cache;
    forward_batch(model, batch, &cache);
    Mat<Real> seed = Mat<Real>::Zero(model.output_dim(), n);
    if (scalar.channel < 0) {
        seed.setOnes();
    } else {
        seed.row(scalar.channel).setOnes();
    }
    const MlpDeltas<Real> d = mlp_backward_deltas(model.mlp, cache.trace, seed);

    Eigen::MatrixXd theta = Eigen::MatrixXd::Zero(n, n);
    for (std::size_t i = 0; i < model.mlp.layers.size(); ++i) {
        const Eigen::MatrixXd delta = d.pre[i].template cast<double>();
        const Eigen::MatrixXd dd = delta.transpose() * delta;
        if (trainable.mlp_weights) {
            const Eigen::MatrixXd z = cache.trace.inputs[i].template cast<double>();
            theta.noalias() += dd.cwiseProduct(z.transpose() * z);
        }
        if (trainable.mlp_biases) {
            theta += dd;
        }
    }
    if (trainable.alpha && model.mode == FilterMode::adaptive) {
        const Eigen::VectorXd g = feature_grad_to_alpha(d.input, batch, cache);
        std::vector<Eigen::Triplet<double>> trip;
        trip.reserve(batch.weights.size());
        for (Eigen::Index p = 0; p < n; ++p) {
            for (std::size_t k = batch.offsets[p]; k < batch.offsets[p + 1]; ++k) {
                trip.emplace_back(static_cast<int>(p), static_cast<int>(batch.weights[k].node),
                                  batch.weights[k].weight * g[p]);
            }
        }
        Eigen::SparseMatrix<double> ja(n, static_cast<Eigen::Index>(model.alpha.size()));
        ja.setFromTriplets(trip.begin(), trip.end());
        const Eigen::SparseMatrix<double> prod = ja * Eigen::SparseMatrix<double>(ja.transpose());
        theta += Eigen::MatrixXd(prod);
    }
    if (!theta.allFinite()) {
        throw NumericalError("empirical_ntk: non-finite Jacobian entries");
    }
    return {theta, model_fingerprint(model)};
}

inline constexpr Eigen::Index kDefaultSpectrumCap = 2048;

inline NtkSpectrum spectrum(const Eigen::MatrixXd& gram, Eigen::Index cap = kDefaultSpectrumCap) {
    if (gram.rows() != gram.cols() || gram.rows() == 0) {
        throw ShapeError("spectrum: matrix must be square and non-empty");
    }
    if (gram.rows() > cap) {
        throw ResourceError("spectrum: N=" + std::to_string(gram.rows()) + " exceeds the cap of " +
                            std::to_string(cap));
    }
    const Eigen::MatrixXd sym = 0.5 * (gram + gram.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) {
        throw NumericalError("spectrum: eigen-decomposition failed");
    }
    NtkSpectrum s;
    const Eigen::VectorXd& ev = es.eigenvalues();  // ascending
    s.eigenvalues.assign(ev.data(), ev.data() + ev.size());
    std::reverse(s.eigenvalues.begin(), s.eigenvalues.end());
    const double top = s.eigenvalues.front();
    if (!(top > 0.0)) {
        throw NumericalError("spectrum: leading eigenvalue is not positive");
    }
    s.normalized.reserve(s.eigenvalues.size());
    for (double v : s.eigenvalues) s.normalized.push_back(v / top);
    s.normalized.front() = 1.0;
    return s;
}

inline NtkSpectrum spectrum(const NtkGram& gram, Eigen::Index cap = kDefaultSpectrumCap) {
    return spectrum(gram.matrix, cap);
}

/// Index-wise ratio of normalized eigenvalues. Entries whose baseline value is
/// below 1e-300 are set to +inf and flagged.
struct RetentionRatio {
    std::vector<double> ratio;
    std::vector<bool> overflow;
};

inline constexpr double kRetentionFloor = 1e-300;

inline RetentionRatio retention_ratio(const NtkSpectrum& ours, const NtkSpectrum& baseline) {
    if (ours.normalized.size() != baseline.normalized.size()) {
        throw ShapeError("retention_ratio: spectra have different lengths");
    }
    RetentionRatio r;
    r.ratio.resize(ours.normalized.size());
    r.overflow.resize(ours.normalized.size(), false);
    for (std::size_t j = 0; j < r.ratio.size(); ++j) {
        if (baseline.normalized[j] < kRetentionFloor) {
            r.ratio[j] = std::numeric_limits<double>::infinity();
            r.overflow[j] = true;
        } else {
            r.ratio[j] = ours.normalized[j] / baseline.normalized[j];
        }
    }
    return r;
}

/// sum_j cos(2^j pi (x - x')), 1D.
inline double analytic_unfiltered_kernel(double x, double xp, int levels) {
    double k = 0.0;
    double f = std::numbers::pi;
    for (int j = 0; j < levels; ++j, f *= 2.0) k += std::cos(f * (x - xp));
    return k;
}

/// sum_j lambda_j Hbar_j(alpha(x)) Hbar_j(alpha(x')) cos(2^j pi (x - x')), 1D.
/// Empty `lambdas` means all ones.
inline double analytic_filtered_kernel(double x, double xp, double alpha_x, double alpha_xp,
                                       const std::vector<double>& lambdas, const EncodingConfig& enc,
                                       const FilterConfig& cfg) {
    if (!lambdas.empty() && static_cast<int>(lambdas.size()) != enc.levels) {
        throw ShapeError("analytic_filtered_kernel: need one lambda per scale");
    }
    double k = 0.0;
    double f = std::numbers::pi;
    for (int j = 0; j < enc.levels; ++j, f *= 2.0) {
        const double lam = lambdas.empty() ? 1.0 : lambdas[static_cast<std::size_t>(j)];
        k += lam * aggregated_scale_response(alpha_x, j, enc, cfg) * aggregated_scale_response(alpha_xp, j, enc, cfg) *
             std::cos(f * (x - xp));
    }
    return k;
}

inline double analytic_filtered_kernel(double x, double xp, const std::function<double(double)>& alpha_fn,
                                       const std::vector<double>& lambdas, const EncodingConfig& enc,
                                       const FilterConfig& cfg) {
    return analytic_filtered_kernel(x, xp, alpha_fn(x), alpha_fn(xp), lambdas, enc, cfg);
}

/// Locally stationary form: sum_j lambda_j Hbar_j(alpha)^2 cos(2^j pi (x - x')).
inline double local_stationary_kernel(double x, double xp, double alpha, const std::vector<double>& lambdas,
                                      const EncodingConfig& enc, const FilterConfig& cfg) {
    if (!lambdas.empty() && static_cast<int>(lambdas.size()) != enc.levels) {
        throw ShapeError("local_stationary_kernel: need one lambda per scale");
    }
    double k = 0.0;
    double f = std::numbers::pi;
    for (int j = 0; j < enc.levels; ++j, f *= 2.0) {
        const double lam = lambdas.empty() ? 1.0 : lambdas[static_cast<std::size_t>(j)];
        const double h = aggregated_scale_response(alpha, j, enc, cfg);
        k += lam * h * h * std::cos(f * (x - xp));
    }
    return k;
}

/// lambda_j^AL = Hbar_j(alpha)^2 lambda_j.
inline std::vector<double> local_effective_eigs(double alpha, const std::vector<double>& lambdas,
                                                const EncodingConfig& enc, const FilterConfig& cfg) {
    if (static_cast<int>(lambdas.size()) != enc.levels) {
        throw ShapeError("local_effective_eigs: need one lambda per scale");
    }
    std::vector<double> out(lambdas.size());
    for (int j = 0; j < enc.levels; ++j) {
        const double h = aggregated_scale_response(alpha, j, enc, cfg);
        out[static_cast<std::size_t>(j)] = h * h * lambdas[static_cast<std::size_t>(j)];
    }
    return out;
}

/// Single affine readout of the (filtered) features with unit weights and
/// zero bias, and a constant alpha field. Its weight-only tangent kernel is
/// exactly the Gram matrix of the filtered features.
inline InrModel<double> make_linear_feature_model(int d_in, int levels, double alpha, FilterMode mode,
                                                  double bandwidth = 20.0, double kappa = 10.0) {
    InrModel<double> m;
    m.encoding = EncodingConfig(d_in, levels);
    m.filter = FilterConfig(bandwidth, kappa, m.encoding.channels());
    m.mode = mode;
    m.alpha = AlphaGrid(std::vector<int>(static_cast<std::size_t>(d_in), 2), alpha);
    m.mlp.activation = Activation::relu;
    m.mlp.layers.push_back({Mat<double>::Ones(1, m.encoding.channels()), Vec<double>::Zero(1)});
    m.validate();
    return m;
}

/// N points drawn uniformly from [0,1]^d.
inline Eigen::MatrixXd random_coords(int d_in, Eigen::Index n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    Eigen::MatrixXd c(d_in, n);
    for (Eigen::Index p = 0; p < n; ++p) {
        for (int k = 0; k < d_in; ++k) {
            c(k, p) = static_cast<double>(rng() >> 11) * 0x1.0p-53;
        }
    }
    return c;
}

inline std::string format_spectrum_csv(const NtkSpectrum& s, const std::vector<double>& ratio) {
    std::string out = "index,eigenvalue,normalized,retention_ratio\n";
    char buf[160];
    for (std::size_t j = 0; j < s.eigenvalues.size(); ++j) {
        std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g,%.17g\n", j, s.eigenvalues[j], s.normalized[j],
                      j < ratio.size() ? ratio[j] : 1.0);
        out += buf;
    }
    return out;
}

/// Rows (x - x', unfiltered, filtered) for offsets in [-range, range], 1D,
/// constant alpha and unit lambdas.
inline std::string format_kernel_curve_csv(int levels, double alpha, const FilterConfig& cfg, double range,
                                           int samples) {
    const EncodingConfig enc(1, levels);
    std::string out = "x_minus_xprime,unfiltered,filtered\n";
    char buf[128];
    for (int i = 0; i < samples; ++i) {
        const double t = samples > 1 ? -range + 2.0 * range * i / (samples - 1) : 0.0;
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", t, analytic_unfiltered_kernel(t, 0.0, levels),
                      local_stationary_kernel(t, 0.0, alpha, {}, enc, cfg));
        out += buf;
    }
    return out;
}

}  // namespace alf

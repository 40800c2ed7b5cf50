#pragma once

#include <cmath>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "alfilter/errors.hpp"
#include "alfilter/fourier_encoding.hpp"

namespace alf {

/// Band-pass response on the encoded-channel axis.
struct FilterConfig {
    double bandwidth = 20.0;  // B, in channel units
    double kappa = 10.0;      // transition sharpness, never trained
    int channels = 32;        // C_N

    FilterConfig() = default;
    FilterConfig(double b, double k, int c) : bandwidth(b), kappa(k), channels(c) { validate(); }

    void validate() const {
        if (!(bandwidth > 0.0) || !(kappa > 0.0) || channels < 1) {
            throw ConfigError("filter: B and kappa must be > 0 and C_N >= 1");
        }
    }
};

/// Two-branch logistic function; never evaluates exp of a positive argument.
inline double stable_sigmoid(double x) {
    if (x >= 0.0) {
        return 1.0 / (1.0 + std::exp(-x));
    }
    if (std::isnan(x)) {
        return x;
    }
    const double e = std::exp(x);
    return e / (1.0 + e);
}

// sigma'(x) = sigma(x) * sigma(-x), symmetric in x.
inline double stable_sigmoid_grad(double x) { return stable_sigmoid(x) * stable_sigmoid(-x); }

namespace detail {

// The response depends only on |c - alpha|. Evaluating it on the non-positive
// side keeps both sigmoids in their exp branch, so the far tails stay positive
// instead of cancelling to zero, and the symmetry about alpha is exact.
inline double response_from_offset(double dist, double half_band, double kappa) {
    return stable_sigmoid(kappa * (half_band - dist)) - stable_sigmoid(-kappa * (dist + half_band));
}

}  // namespace detail

/// H_B^c(alpha) = sigma(kappa (c - alpha + B/2)) - sigma(kappa (c - alpha - B/2)).
inline double channel_response(double c, double alpha, const FilterConfig& cfg) {
    return detail::response_from_offset(std::abs(c - alpha), 0.5 * cfg.bandwidth, cfg.kappa);
}

/// 1 - H_B^c(alpha), evaluated without cancellation. Positive even where the
/// response itself rounds to 1.
inline double channel_rejection(double c, double alpha, const FilterConfig& cfg) {
    const double dist = std::abs(c - alpha);
    const double half = 0.5 * cfg.bandwidth;
    return stable_sigmoid(-cfg.kappa * (half - dist)) + stable_sigmoid(-cfg.kappa * (dist + half));
}

/// d H_B^c / d alpha.
inline double channel_response_dalpha(double c, double alpha, const FilterConfig& cfg) {
    const double d = c - alpha;
    const double half = 0.5 * cfg.bandwidth;
    // dH/dd = kappa (sigma'(kappa (d + B/2)) - sigma'(kappa (d - B/2))), and dd/dalpha = -1.
    const double dh_dd =
        cfg.kappa * (stable_sigmoid_grad(cfg.kappa * (d + half)) - stable_sigmoid_grad(cfg.kappa * (d - half)));
    return -dh_dd;
}

inline std::vector<double> response_vector(double alpha, const FilterConfig& cfg) {
    std::vector<double> h(static_cast<std::size_t>(cfg.channels));
    for (int c = 0; c < cfg.channels; ++c) {
        h[static_cast<std::size_t>(c)] = channel_response(c, alpha, cfg);
    }
    return h;
}

inline std::vector<double> apply_filter(std::span<const double> gamma, std::span<const double> h) {
    if (gamma.size() != h.size()) {
        throw ShapeError("apply_filter: feature length " + std::to_string(gamma.size()) + " != response length " +
                         std::to_string(h.size()));
    }
    std::vector<double> out(gamma.size());
    for (std::size_t c = 0; c < gamma.size(); ++c) {
        out[c] = h[c] * gamma[c];
    }
    return out;
}

/// Mean response over the 2*d_in channels of dyadic scale j.
inline double aggregated_scale_response(double alpha, int j, const EncodingConfig& enc, const FilterConfig& cfg) {
    if (j < 0 || j >= enc.levels) {
        throw IndexError("aggregated_scale_response: scale " + std::to_string(j) + " out of range");
    }
    const int per_scale = enc.channels_per_scale();
    double sum = 0.0;
    for (int k = 0; k < per_scale; ++k) {
        sum += channel_response(j * per_scale + k, alpha, cfg);
    }
    return sum / per_scale;
}

/// Response and alpha-derivative for a batch of alpha values, C_N x N each.
template <typename Real>
struct BatchResponse {
    Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic> response;
    Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic> dalpha;
};

template <typename Real>
BatchResponse<Real> response_batch(const Eigen::VectorXd& alpha, const FilterConfig& cfg, bool with_derivative) {
    const Eigen::Index n = alpha.size();
    BatchResponse<Real> out;
    out.response.resize(cfg.channels, n);
    if (with_derivative) {
        out.dalpha.resize(cfg.channels, n);
    }
    for (Eigen::Index p = 0; p < n; ++p) {
        for (int c = 0; c < cfg.channels; ++c) {
            out.response(c, p) = static_cast<Real>(channel_response(c, alpha[p], cfg));
            if (with_derivative) {
                out.dalpha(c, p) = static_cast<Real>(channel_response_dalpha(c, alpha[p], cfg));
            }
        }
    }
    return out;
}

}  // namespace alf

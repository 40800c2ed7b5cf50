#pragma once

#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <string>

#include <Eigen/Core>

#include "alfilter/errors.hpp"

namespace alf {

/// Dyadic sin/cos feature layout.
///
/// Channels are scale-major: for scale j, coordinate m (0-based) and
/// phase s (0 = sin, 1 = cos) the channel index is j*2*d_in + 2*m + s.
/// Scale j uses the angle 2^j * pi * x_m.
struct EncodingConfig {
    int d_in = 2;
    int levels = 8;

    EncodingConfig() = default;
    EncodingConfig(int input_dim, int num_levels) : d_in(input_dim), levels(num_levels) { validate(); }

    void validate() const {
        if (d_in < 1 || levels < 1) {
            throw ConfigError("encoding: d_in and L must be >= 1 (got d_in=" + std::to_string(d_in) +
                              ", L=" + std::to_string(levels) + ")");
        }
    }

    int channels() const { return 2 * d_in * levels; }
    int channels_per_scale() const { return 2 * d_in; }
};

inline int encoded_dim(int d_in, int levels) {
    EncodingConfig cfg(d_in, levels);
    return cfg.channels();
}

struct ChannelLayout {
    int scale;
    int dim;
    int phase;  // 0 = sin, 1 = cos

    bool operator==(const ChannelLayout&) const = default;
};

inline int channel_index(const EncodingConfig& cfg, int scale, int dim, int phase) {
    if (scale < 0 || scale >= cfg.levels || dim < 0 || dim >= cfg.d_in || phase < 0 || phase > 1) {
        throw IndexError("encoding: (scale, dim, phase) out of range");
    }
    return scale * 2 * cfg.d_in + 2 * dim + phase;
}

inline ChannelLayout channel_layout(const EncodingConfig& cfg, int c) {
    if (c < 0 || c >= cfg.channels()) {
        throw IndexError("encoding: channel " + std::to_string(c) + " out of range [0, " +
                         std::to_string(cfg.channels()) + ")");
    }
    const int per_scale = cfg.channels_per_scale();
    const int within = c % per_scale;
    return {c / per_scale, within / 2, within % 2};
}

inline int scale_of_channel(int c, const EncodingConfig& cfg) { return channel_layout(cfg, c).scale; }

/// Encodes one coordinate. Output length is cfg.channels().
template <typename Real = double>
Eigen::Matrix<Real, Eigen::Dynamic, 1> encode(std::span<const double> x, const EncodingConfig& cfg) {
    if (static_cast<int>(x.size()) != cfg.d_in) {
        throw ShapeError("encode: coordinate has " + std::to_string(x.size()) + " entries, expected " +
                         std::to_string(cfg.d_in));
    }
    Eigen::Matrix<Real, Eigen::Dynamic, 1> out(cfg.channels());
    int c = 0;
    double freq = std::numbers::pi;
    for (int j = 0; j < cfg.levels; ++j, freq *= 2.0) {
        for (int m = 0; m < cfg.d_in; ++m) {
            const double angle = freq * x[m];
            out[c++] = static_cast<Real>(std::sin(angle));
            out[c++] = static_cast<Real>(std::cos(angle));
        }
    }
    return out;
}

/// Batched encoding: coords is d_in x N (one column per point), result is C_N x N.
template <typename Real = double>
Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic> encode_batch(const Eigen::MatrixXd& coords,
                                                                const EncodingConfig& cfg) {
    if (coords.rows() != cfg.d_in) {
        throw ShapeError("encode_batch: coordinate rows " + std::to_string(coords.rows()) + " != d_in " +
                         std::to_string(cfg.d_in));
    }
    const Eigen::Index n = coords.cols();
    Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic> out(cfg.channels(), n);
    for (Eigen::Index p = 0; p < n; ++p) {
        int c = 0;
        double freq = std::numbers::pi;
        for (int j = 0; j < cfg.levels; ++j, freq *= 2.0) {
            for (int m = 0; m < cfg.d_in; ++m) {
                const double angle = freq * coords(m, p);
                out(c++, p) = static_cast<Real>(std::sin(angle));
                out(c++, p) = static_cast<Real>(std::cos(angle));
            }
        }
    }
    return out;
}

}  // namespace alf

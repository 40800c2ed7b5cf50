#pragma once

// Reference implementations used as test oracles. They are written
// straight from the formulas with plain loops and long double arithmetic
// and share no code with the library beyond its data types.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "alfilter/alfilter.hpp"

namespace oracle {

inline long double sigmoid(long double x) { return 1.0L / (1.0L + std::exp(-x)); }

inline long double response(long double c, long double alpha, long double b, long double kappa) {
    return sigmoid(kappa * (c - alpha + b / 2)) - sigmoid(kappa * (c - alpha - b / 2));
}

// gamma(x) listed scale by scale, dimension by dimension, sin before cos.
inline std::vector<long double> encode(const std::vector<double>& x, int levels) {
    std::vector<long double> out;
    const long double pi = 3.141592653589793238462643383279502884L;
    for (int j = 0; j < levels; ++j) {
        for (double xm : x) {
            const long double a = std::ldexp(1.0L, j) * pi * xm;
            out.push_back(std::sin(a));
            out.push_back(std::cos(a));
        }
    }
    return out;
}

// Multilinear interpolation on [0,1]^d with axis 0 fastest, written as an
// explicit sum over the 2^d cell corners.
inline long double interpolate(const std::vector<int>& res, const std::vector<double>& nodes,
                               const std::vector<double>& x) {
    const std::size_t d = res.size();
    std::vector<int> lo(d);
    std::vector<long double> t(d);
    for (std::size_t k = 0; k < d; ++k) {
        long double u = std::clamp<long double>(x[k], 0.0L, 1.0L) * (res[k] - 1);
        int i = static_cast<int>(std::floor(u));
        if (i >= res[k] - 1) i = res[k] - 2;
        lo[k] = i;
        t[k] = u - i;
    }
    long double v = 0.0L;
    for (std::size_t corner = 0; corner < (std::size_t{1} << d); ++corner) {
        long double w = 1.0L;
        std::size_t flat = 0;
        std::size_t stride = 1;
        for (std::size_t k = 0; k < d; ++k) {
            const bool up = (corner >> k) & 1u;
            w *= up ? t[k] : 1.0L - t[k];
            flat += static_cast<std::size_t>(lo[k] + (up ? 1 : 0)) * stride;
            stride *= static_cast<std::size_t>(res[k]);
        }
        v += w * nodes[flat];
    }
    return v;
}

// Sum of absolute forward differences along every axis.
inline long double tv(const std::vector<int>& res, const std::vector<double>& nodes) {
    long double s = 0.0L;
    std::size_t stride = 1;
    for (std::size_t k = 0; k < res.size(); ++k) {
        for (std::size_t i = 0; i < nodes.size(); ++i) {
            const std::size_t coord = (i / stride) % static_cast<std::size_t>(res[k]);
            if (coord + 1 < static_cast<std::size_t>(res[k])) s += std::abs((long double)nodes[i + stride] - nodes[i]);
        }
        stride *= static_cast<std::size_t>(res[k]);
    }
    return s;
}

inline std::vector<long double> mlp(const alf::MlpParams<double>& p, std::vector<long double> z) {
    for (std::size_t i = 0; i < p.layers.size(); ++i) {
        const auto& l = p.layers[i];
        std::vector<long double> pre(static_cast<std::size_t>(l.out()));
        for (int r = 0; r < l.out(); ++r) {
            long double s = l.bias[r];
            for (int c = 0; c < l.in(); ++c) s += static_cast<long double>(l.weight(r, c)) * z[c];
            pre[r] = s;
        }
        if (i + 1 == p.layers.size()) return pre;
        for (auto& v : pre) {
            if (p.activation == alf::Activation::relu) {
                v = v > 0 ? v : 0;
            } else {
                v = std::sin(i == 0 ? p.omega0 * v : v);
            }
        }
        z = std::move(pre);
    }
    return z;
}

inline std::vector<long double> forward(const alf::InrModel<double>& m, const std::vector<double>& x) {
    std::vector<long double> g = encode(x, m.encoding.levels);
    if (m.mode == alf::FilterMode::adaptive) {
        std::vector<double> nodes(m.alpha.nodes().begin(), m.alpha.nodes().end());
        const long double a = interpolate(m.alpha.resolution(), nodes, x);
        for (std::size_t c = 0; c < g.size(); ++c) g[c] *= response(c, a, m.filter.bandwidth, m.filter.kappa);
    }
    return mlp(m.mlp, g);
}

// MSE over columns plus tv_weight * TV.
inline long double loss(const alf::InrModel<double>& m, const Eigen::MatrixXd& coords, const Eigen::MatrixXd& target,
                        double tv_weight) {
    long double s = 0.0L;
    for (Eigen::Index p = 0; p < coords.cols(); ++p) {
        std::vector<double> x(coords.col(p).data(), coords.col(p).data() + coords.rows());
        const auto y = forward(m, x);
        for (std::size_t k = 0; k < y.size(); ++k) {
            const long double d = y[k] - target(static_cast<Eigen::Index>(k), p);
            s += d * d;
        }
    }
    s /= coords.cols();
    std::vector<double> nodes(m.alpha.nodes().begin(), m.alpha.nodes().end());
    return s + tv_weight * tv(m.alpha.resolution(), nodes);
}

struct GradCheck {
    std::size_t compared = 0;
    std::size_t failed = 0;
    double worst_rel = 0.0;
    std::string first_failure;
};

// Central differences of the reference loss against backward() for every MLP
// parameter and every grid node. Entries with |fd| < abs_floor are compared
// absolutely.
inline GradCheck check_gradients(alf::InrModel<double> m, const Eigen::MatrixXd& coords,
                                 const Eigen::MatrixXd& target, double tv_weight, double h = 1e-5,
                                 double rel = 1e-4, double abs_floor = 1e-8) {
    const auto batch = alf::make_batch(m, coords);
    const auto br = alf::backward(m, batch, target, tv_weight);
    GradCheck out;
    auto compare = [&](double analytic, double& param, const std::string& name) {
        const double v = param;
        param = v + h;
        const long double up = loss(m, coords, target, tv_weight);
        param = v - h;
        const long double dn = loss(m, coords, target, tv_weight);
        param = v;
        const double fd = static_cast<double>((up - dn) / (2 * h));
        const double diff = std::abs(analytic - fd);
        bool ok;
        if (std::abs(fd) < abs_floor) {
            ok = diff <= abs_floor;
        } else {
            const double r = diff / std::abs(fd);
            out.worst_rel = std::max(out.worst_rel, r);
            ok = r <= rel;
        }
        ++out.compared;
        if (!ok) {
            if (out.failed == 0) {
                out.first_failure = name + ": analytic " + std::to_string(analytic) + " fd " + std::to_string(fd);
            }
            ++out.failed;
        }
    };
    for (std::size_t i = 0; i < m.mlp.layers.size(); ++i) {
        auto& l = m.mlp.layers[i];
        for (Eigen::Index k = 0; k < l.weight.size(); ++k) {
            compare(br.grads.weight[i].data()[k], l.weight.data()[k],
                    "W" + std::to_string(i) + "[" + std::to_string(k) + "]");
        }
        for (Eigen::Index k = 0; k < l.bias.size(); ++k) {
            compare(br.grads.bias[i][k], l.bias[k], "b" + std::to_string(i) + "[" + std::to_string(k) + "]");
        }
    }
    for (std::size_t k = 0; k < m.alpha.size(); ++k) {
        compare(br.grads.alpha[k], m.alpha.nodes()[k], "alpha[" + std::to_string(k) + "]");
    }
    return out;
}

// The seeded tiny model of the gradient check: 1D input, L = 2, two hidden
// layers of width 8, a 4-node alpha grid placed so the band edges cross the
// channel axis, and 5 samples.
struct TinyProblem {
    alf::InrModel<double> model;
    Eigen::MatrixXd coords;
    Eigen::MatrixXd target;
};

inline TinyProblem tiny_problem(alf::Activation act, std::uint64_t seed) {
    alf::ModelSpec s;
    s.d_in = 1;
    s.d_out = 2;
    s.levels = 2;
    s.hidden_layers = 2;
    s.hidden_width = 8;
    s.activation = act;
    s.omega0 = 3.0;
    s.grid_resolution = {4};
    TinyProblem p{alf::make_model<double>(s, seed), alf::random_coords(1, 5, seed + 1), Eigen::MatrixXd(2, 5)};
    std::mt19937_64 rng(seed + 2);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (double& v : p.model.alpha.nodes()) v = 10.0 + 4.0 * u(rng);
    for (Eigen::Index i = 0; i < p.target.size(); ++i) p.target.data()[i] = u(rng);
    return p;
}

}  // namespace oracle

namespace testutil {

inline std::filesystem::path temp_dir(const std::string& name) {
    auto p = std::filesystem::temp_directory_path() / ("alfilter_test_" + name);
    std::filesystem::remove_all(p);
    std::filesystem::create_directories(p);
    return p;
}

inline std::string read_file(const std::filesystem::path& p) {
    std::ifstream is(p, std::ios::binary);
    std::stringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

inline std::string data_path(const std::string& name) { return std::string(ALFILTER_TEST_DATA) + "/" + name; }

// Relative error with an absolute floor for tiny reference values.
inline bool close(double analytic, double reference, double rel, double abs_floor) {
    const double diff = std::abs(analytic - reference);
    if (std::abs(reference) < abs_floor) return diff <= abs_floor;
    return diff <= rel * std::abs(reference);
}

// |analytic - reference| <= rel * |reference| + abs.
inline bool within(double analytic, double reference, double rel, double abs) {
    return std::abs(analytic - reference) <= rel * std::abs(reference) + abs;
}

// Tiny seeded image with smooth structure and some texture.
inline alf::ImageSignal pattern_image(int h, int w, int channels, std::uint64_t seed) {
    alf::ImageSignal img(h, w, channels);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const double phase = u(rng) * 6.0;
    for (int r = 0; r < h; ++r) {
        for (int c = 0; c < w; ++c) {
            for (int k = 0; k < channels; ++k) {
                const double v = 0.5 + 0.3 * std::sin(0.3 * r + 0.2 * c + phase + k) + 0.15 * std::cos(0.9 * c - 0.4 * r);
                img.at(r, c, k) = std::clamp(v, 0.0, 1.0);
            }
        }
    }
    return img;
}

}  // namespace testutil

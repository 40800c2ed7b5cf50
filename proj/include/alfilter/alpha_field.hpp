#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <span>
#include <string>
#include <vector>

#include "alfilter/errors.hpp"

namespace alf {

struct NodeWeight {
    std::size_t node;
    double weight;
};

/// Regular grid of alpha values over [0,1]^d.
///
/// resolution[k] is the node count along coordinate k; node i along axis k
/// sits at i / (resolution[k] - 1). Storage is flat with axis 0 fastest, so
/// for a 2D image grid (axis 0 = x = column, axis 1 = y = row) the layout is
/// row-major. Coordinates outside the box are clamped before lookup.
class AlphaGrid {
public:
    AlphaGrid() = default;

    AlphaGrid(std::vector<int> resolution, double init_value) : resolution_(std::move(resolution)) {
        if (resolution_.empty()) {
            throw ConfigError("alpha grid: resolution must have at least one axis");
        }
        std::size_t total = 1;
        strides_.resize(resolution_.size());
        for (std::size_t k = 0; k < resolution_.size(); ++k) {
            if (resolution_[k] < 2) {
                throw ConfigError("alpha grid: every axis needs >= 2 nodes (axis " + std::to_string(k) + " has " +
                                  std::to_string(resolution_[k]) + ")");
            }
            strides_[k] = total;
            total *= static_cast<std::size_t>(resolution_[k]);
        }
        nodes_.assign(total, init_value);
    }

    int dims() const { return static_cast<int>(resolution_.size()); }
    const std::vector<int>& resolution() const { return resolution_; }
    std::size_t size() const { return nodes_.size(); }

    std::span<double> nodes() { return nodes_; }
    std::span<const double> nodes() const { return nodes_; }

    double& at(std::span<const int> index) { return nodes_[flat_index(index)]; }
    double at(std::span<const int> index) const { return nodes_[flat_index(index)]; }

    std::size_t flat_index(std::span<const int> index) const {
        if (index.size() != resolution_.size()) {
            throw ShapeError("alpha grid: index rank mismatch");
        }
        std::size_t flat = 0;
        for (std::size_t k = 0; k < index.size(); ++k) {
            if (index[k] < 0 || index[k] >= resolution_[k]) {
                throw IndexError("alpha grid: node index out of range on axis " + std::to_string(k));
            }
            flat += static_cast<std::size_t>(index[k]) * strides_[k];
        }
        return flat;
    }

    /// Interpolation weights of the (up to) 2^d surrounding nodes. Entries with
    /// zero weight are dropped, so a query exactly at a node yields one entry.
    template <typename Out>
    void query_weights_into(std::span<const double> x, Out& out) const {
        check_coord(x);
        const std::size_t d = resolution_.size();
        std::size_t base = 0;
        double frac[8];
        std::size_t step[8];
        for (std::size_t k = 0; k < d; ++k) {
            const double u = std::clamp(x[k], 0.0, 1.0) * (resolution_[k] - 1);
            int i0 = static_cast<int>(std::floor(u));
            i0 = std::min(i0, resolution_[k] - 2);
            frac[k] = u - i0;
            step[k] = strides_[k];
            base += static_cast<std::size_t>(i0) * strides_[k];
        }
        const std::size_t corners = std::size_t{1} << d;
        for (std::size_t mask = 0; mask < corners; ++mask) {
            double w = 1.0;
            std::size_t node = base;
            for (std::size_t k = 0; k < d; ++k) {
                if (mask & (std::size_t{1} << k)) {
                    w *= frac[k];
                    node += step[k];
                } else {
                    w *= 1.0 - frac[k];
                }
            }
            if (w != 0.0) {
                out.push_back(NodeWeight{node, w});
            }
        }
    }

    std::vector<NodeWeight> query_weights(std::span<const double> x) const {
        std::vector<NodeWeight> out;
        out.reserve(std::size_t{1} << resolution_.size());
        query_weights_into(x, out);
        return out;
    }

    double query(std::span<const double> x) const {
        SmallWeights w;
        query_weights_into(x, w);
        double v = 0.0;
        for (std::size_t i = 0; i < w.count; ++i) {
            v += w.items[i].weight * nodes_[w.items[i].node];
        }
        return v;
    }

    /// Anisotropic TV: sum of |forward differences| along every axis.
    double tv_penalty() const {
        double total = 0.0;
        for_each_forward_pair([&](std::size_t lo, std::size_t hi) { total += std::abs(nodes_[hi] - nodes_[lo]); });
        return total;
    }

    /// Adds scale * (sub)gradient of tv_penalty into grad. sign(0) is taken as 0.
    void add_tv_subgradient(std::span<double> grad, double scale) const {
        if (grad.size() != nodes_.size()) {
            throw ShapeError("alpha grid: gradient size mismatch");
        }
        for_each_forward_pair([&](std::size_t lo, std::size_t hi) {
            const double diff = nodes_[hi] - nodes_[lo];
            const double s = diff > 0.0 ? 1.0 : (diff < 0.0 ? -1.0 : 0.0);
            grad[hi] += scale * s;
            grad[lo] -= scale * s;
        });
    }

    std::vector<double> tv_subgradient() const {
        std::vector<double> g(nodes_.size(), 0.0);
        add_tv_subgradient(g, 1.0);
        return g;
    }

    double min_value() const { return *std::min_element(nodes_.begin(), nodes_.end()); }
    double max_value() const { return *std::max_element(nodes_.begin(), nodes_.end()); }

private:
    struct SmallWeights {
        NodeWeight items[8];
        std::size_t count = 0;
        void push_back(const NodeWeight& w) { items[count++] = w; }
    };

    void check_coord(std::span<const double> x) const {
        if (x.size() != resolution_.size()) {
            throw ShapeError("alpha grid: coordinate has " + std::to_string(x.size()) + " entries, grid has " +
                             std::to_string(resolution_.size()) + " axes");
        }
        if (resolution_.size() > 3) {
            throw ConfigError("alpha grid: at most 3 axes supported for queries");
        }
        for (double v : x) {
            if (!std::isfinite(v)) {
                throw InputError("alpha grid: non-finite query coordinate");
            }
        }
    }

    template <typename F>
    void for_each_forward_pair(F&& f) const {
        const std::size_t d = resolution_.size();
        std::vector<int> idx(d, 0);
        for (std::size_t flat = 0; flat < nodes_.size(); ++flat) {
            for (std::size_t k = 0; k < d; ++k) {
                if (idx[k] + 1 < resolution_[k]) {
                    f(flat, flat + strides_[k]);
                }
            }
            for (std::size_t k = 0; k < d; ++k) {
                if (++idx[k] < resolution_[k]) {
                    break;
                }
                idx[k] = 0;
            }
        }
    }

    std::vector<int> resolution_;
    std::vector<std::size_t> strides_;
    std::vector<double> nodes_;
};

inline AlphaGrid init_grid(std::vector<int> resolution, double init_value) {
    return AlphaGrid(std::move(resolution), init_value);
}

/// Default initial value: the band centre C_N / 2.
inline double default_alpha_init(int channels) { return 0.5 * channels; }

/// Row-major CSV of a 2D grid: one line per grid row (axis 1), columns along axis 0.
inline void write_alpha_csv(const AlphaGrid& grid, const std::string& path) {
    if (grid.dims() != 2) {
        throw ConfigError("alpha export: CSV export needs a 2D grid");
    }
    std::ofstream os(path);
    if (!os) {
        throw IoError("cannot open " + path + " for writing");
    }
    const int w = grid.resolution()[0];
    const int h = grid.resolution()[1];
    char buf[32];
    for (int r = 0; r < h; ++r) {
        for (int c = 0; c < w; ++c) {
            std::snprintf(buf, sizeof buf, "%.17g", grid.nodes()[static_cast<std::size_t>(r) * w + c]);
            os << (c ? "," : "") << buf;
        }
        os << '\n';
    }
    if (!os) {
        throw IoError("write failed: " + path);
    }
}

/// 8-bit grey levels of (alpha - min) / (max - min); a constant grid maps to 0.
inline std::vector<std::uint8_t> alpha_to_gray(const AlphaGrid& grid) {
    const double lo = grid.min_value();
    const double hi = grid.max_value();
    const double span = hi - lo;
    std::vector<std::uint8_t> out(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double t = span > 0.0 ? (grid.nodes()[i] - lo) / span : 0.0;
        out[i] = static_cast<std::uint8_t>(std::lround(std::clamp(t, 0.0, 1.0) * 255.0));
    }
    return out;
}

}  // namespace alf

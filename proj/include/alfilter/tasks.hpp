#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <functional>
#include <limits>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "alfilter/diff_engine.hpp"
#include "alfilter/errors.hpp"
#include "alfilter/image_io.hpp"
#include "alfilter/metrics.hpp"
#include "alfilter/model.hpp"

namespace alf {

struct TrainConfig {
    int iterations = 5000;
    int levels = 8;
    double bandwidth = 20.0;
    double kappa = 10.0;
    int grid_width = 0;   // 0: one node per pixel, capped at grid_cap
    int grid_height = 0;
    int grid_cap = 512;
    int hidden_layers = 3;
    int hidden_width = 256;
    Activation activation = Activation::sine;
    double omega0 = 30.0;
    FilterMode filter_mode = FilterMode::adaptive;
    double alpha_init = -1.0;  // negative: C_N / 2
    AdamSettings adam{};
    double tv_weight = 0.0;
    std::uint64_t seed = 0;
    int log_every = 50;
    int full_batch_limit = 128 * 128;  // larger training sets use minibatches
    int batch_size = 16384;

    void validate() const {
        if (iterations < 0 || levels < 1 || hidden_layers < 0 || hidden_width < 1 || log_every < 1 ||
            batch_size < 1 || grid_cap < 2) {
            throw ConfigError("train config: counts must be positive");
        }
        if (!(bandwidth > 0) || !(kappa > 0) || !(omega0 > 0) || !(adam.lr_network > 0) || !(adam.lr_alpha >= 0) ||
            adam.step_size < 1 || !(adam.decay > 0) || !(tv_weight >= 0)) {
            throw ConfigError("train config: rates and filter constants must be positive");
        }
        if ((grid_width != 0 && grid_width < 2) || (grid_height != 0 && grid_height < 2)) {
            throw ConfigError("train config: grid resolution must be >= 2 per axis");
        }
    }

    /// Baseline: all-pass filter and frozen alpha grid.
    TrainConfig as_baseline() const {
        TrainConfig c = *this;
        c.filter_mode = FilterMode::all_pass;
        c.adam.train_alpha = false;
        return c;
    }
};

struct LogRow {
    std::int64_t step = 0;
    double lr_network = 0.0;
    double lr_alpha = 0.0;
    double mse = 0.0;
    double tv = 0.0;
    double psnr = 0.0;
};

inline std::string format_log_csv(const std::vector<LogRow>& rows) {
    std::string out = "step,lr_network,lr_alpha,mse,tv,psnr\n";
    char buf[256];
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof buf, "%lld,%.17g,%.17g,%.17g,%.17g,%.17g\n", static_cast<long long>(r.step),
                      r.lr_network, r.lr_alpha, r.mse, r.tv, r.psnr);
        out += buf;
    }
    return out;
}

inline void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot open " + path + " for writing");
    os << text;
    if (!os) throw IoError("write failed: " + path);
}

template <typename Real>
ModelSpec model_spec_for(const ImageSignal& image, const TrainConfig& cfg) {
    ModelSpec s;
    s.d_in = 2;
    s.d_out = image.channels;
    s.levels = cfg.levels;
    s.bandwidth = cfg.bandwidth;
    s.kappa = cfg.kappa;
    s.hidden_layers = cfg.hidden_layers;
    s.hidden_width = cfg.hidden_width;
    s.activation = cfg.activation;
    s.omega0 = cfg.omega0;
    s.mode = cfg.filter_mode;
    const int gw = cfg.grid_width > 0 ? cfg.grid_width : std::clamp(image.width, 2, cfg.grid_cap);
    const int gh = cfg.grid_height > 0 ? cfg.grid_height : std::clamp(image.height, 2, cfg.grid_cap);
    s.grid_resolution = {gw, gh};
    s.alpha_init = cfg.alpha_init;
    return s;
}

/// Target matrix (channels x samples) for the listed pixel indices.
template <typename Real>
Mat<Real> gather_targets(const ImageSignal& image, const std::vector<std::size_t>& pixels) {
    Mat<Real> t(image.channels, static_cast<Eigen::Index>(pixels.size()));
    for (std::size_t i = 0; i < pixels.size(); ++i) {
        for (int k = 0; k < image.channels; ++k) {
            t(k, static_cast<Eigen::Index>(i)) = static_cast<Real>(image.pixels[pixels[i] * image.channels + k]);
        }
    }
    return t;
}

inline Eigen::MatrixXd gather_pixel_coords(const ImageSignal& image, const std::vector<std::size_t>& pixels) {
    Eigen::MatrixXd c(2, static_cast<Eigen::Index>(pixels.size()));
    for (std::size_t i = 0; i < pixels.size(); ++i) {
        const int r = static_cast<int>(pixels[i] / image.width);
        const int col = static_cast<int>(pixels[i] % image.width);
        c(0, static_cast<Eigen::Index>(i)) = (col + 0.5) / image.width;
        c(1, static_cast<Eigen::Index>(i)) = (r + 0.5) / image.height;
    }
    return c;
}

template <typename Real>
CoordBatch<Real> subset_batch(const CoordBatch<Real>& full, const std::vector<Eigen::Index>& cols) {
    CoordBatch<Real> b;
    b.coords.resize(full.coords.rows(), static_cast<Eigen::Index>(cols.size()));
    b.gamma.resize(full.gamma.rows(), static_cast<Eigen::Index>(cols.size()));
    b.offsets.reserve(cols.size() + 1);
    b.offsets.push_back(0);
    for (std::size_t i = 0; i < cols.size(); ++i) {
        const auto p = cols[i];
        b.coords.col(static_cast<Eigen::Index>(i)) = full.coords.col(p);
        b.gamma.col(static_cast<Eigen::Index>(i)) = full.gamma.col(p);
        b.weights.insert(b.weights.end(), full.weights.begin() + static_cast<std::ptrdiff_t>(full.offsets[p]),
                         full.weights.begin() + static_cast<std::ptrdiff_t>(full.offsets[p + 1]));
        b.offsets.push_back(b.weights.size());
    }
    return b;
}

/// Evaluates the model at pixel centres of an H x W image, clamped to [0,1].
template <typename Real>
ImageSignal render(const InrModel<Real>& model, int height, int width) {
    if (model.encoding.d_in != 2) {
        throw ConfigError("render: model input must be 2D");
    }
    const int ch = model.output_dim();
    if (ch != 1 && ch != 3) {
        throw ConfigError("render: model output must have 1 or 3 channels");
    }
    ImageSignal img(height, width, ch);
    const Mat<Real> out = forward_chunked(model, pixel_grid_coords(height, width));
    for (Eigen::Index p = 0; p < out.cols(); ++p) {
        for (int k = 0; k < ch; ++k) {
            img.pixels[static_cast<std::size_t>(p) * ch + k] =
                std::clamp(static_cast<double>(out(k, p)), 0.0, 1.0);
        }
    }
    return img;
}

inline ImageSignal abs_error_map(const ImageSignal& pred, const ImageSignal& truth) {
    if (!pred.same_shape(truth)) throw InputError("error map: shapes differ");
    ImageSignal e(pred.height, pred.width, pred.channels);
    for (std::size_t i = 0; i < e.pixels.size(); ++i) e.pixels[i] = std::abs(pred.pixels[i] - truth.pixels[i]);
    return e;
}

struct ObservationMask {
    int height = 0;
    int width = 0;
    double fraction = 1.0;
    std::uint64_t seed = 0;
    std::vector<bool> observed;

    std::size_t count() const { return static_cast<std::size_t>(std::count(observed.begin(), observed.end(), true)); }
};

/// Uniform sample of round(fraction * H * W) pixels without replacement.
inline ObservationMask sample_mask(int height, int width, double fraction, std::uint64_t seed) {
    if (!(fraction > 0.0 && fraction <= 1.0)) {
        throw InputError("sample_mask: fraction must be in (0, 1]");
    }
    if (height < 1 || width < 1) {
        throw InputError("sample_mask: empty image");
    }
    const std::size_t total = static_cast<std::size_t>(height) * width;
    const auto keep = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(total)));
    std::vector<std::size_t> order(total);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::mt19937_64 rng(seed);
    // Partial Fisher-Yates with an explicit index draw keeps the mask identical
    // across standard libraries.
    for (std::size_t i = 0; i < keep && i + 1 < total; ++i) {
        const std::size_t j = i + static_cast<std::size_t>(rng() % (total - i));
        std::swap(order[i], order[j]);
    }
    ObservationMask m{height, width, fraction, seed, std::vector<bool>(total, false)};
    for (std::size_t i = 0; i < keep; ++i) m.observed[order[i]] = true;
    return m;
}

template <typename Real>
struct TrainResult {
    InrModel<Real> model;
    std::vector<LogRow> log;
};

using LogCallback = std::function<void(const LogRow&)>;

/// Shared training loop over a fixed set of pixels of `image`.
template <typename Real>
TrainResult<Real> train_on_pixels(const ImageSignal& image, const std::vector<std::size_t>& pixels,
                                  const TrainConfig& cfg, const LogCallback& on_log = {}) {
    cfg.validate();
    image.validate();
    if (pixels.empty()) {
        throw InputError("training: no observed pixels");
    }
    TrainResult<Real> res{make_model<Real>(model_spec_for<Real>(image, cfg), cfg.seed), {}};
    InrModel<Real>& model = res.model;
    const CoordBatch<Real> full = make_batch(model, gather_pixel_coords(image, pixels));
    const Mat<Real> targets = gather_targets<Real>(image, pixels);
    AdamSettings adam = cfg.adam;
    if (cfg.filter_mode == FilterMode::all_pass) adam.train_alpha = false;
    OptimState<Real> opt = make_optim_state(model, adam);

    const bool minibatch = static_cast<long long>(pixels.size()) > cfg.full_batch_limit;
    std::mt19937_64 shuffle_rng(cfg.seed ^ 0x9e3779b97f4a7c15ull);
    std::vector<Eigen::Index> order(pixels.size());
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::size_t cursor = order.size();

    auto emit = [&](const LogRow& row) {
        res.log.push_back(row);
        if (on_log) on_log(row);
    };

    for (int it = 0; it < cfg.iterations; ++it) {
        BackwardResult<Real> br;
        try {
            if (!minibatch) {
                br = backward(model, full, targets, cfg.tv_weight);
            } else {
                std::vector<Eigen::Index> cols;
                cols.reserve(static_cast<std::size_t>(cfg.batch_size));
                while (static_cast<int>(cols.size()) < cfg.batch_size) {
                    if (cursor == order.size()) {
                        for (std::size_t i = order.size(); i > 1; --i) {
                            std::swap(order[i - 1], order[static_cast<std::size_t>(shuffle_rng() % i)]);
                        }
                        cursor = 0;
                    }
                    cols.push_back(order[cursor++]);
                    if (cols.size() == order.size()) break;
                }
                const Mat<Real> t = targets(Eigen::all, cols);
                br = backward(model, subset_batch(full, cols), t, cfg.tv_weight);
            }
        } catch (const NumericalError& e) {
            throw NumericalError("step " + std::to_string(it) + ": " + e.what());
        }
        if (it % cfg.log_every == 0) {
            emit({it, opt.current_lr_network(), opt.current_lr_alpha(), br.loss.mse, br.loss.tv,
                  psnr_from_mse(br.loss.mse / image.channels)});
        }
        adam_step(model, br.grads, opt);
    }
    // Closing row: metrics of the trained model on the listed pixels, from the
    // same clamped rendering path used for exported images.
    const ImageSignal rendered = render(model, image.height, image.width);
    double se = 0.0;
    for (std::size_t p : pixels) {
        for (int k = 0; k < image.channels; ++k) {
            const double d = rendered.pixels[p * image.channels + k] - image.pixels[p * image.channels + k];
            se += d * d;
        }
    }
    const double mse = se / static_cast<double>(pixels.size());
    emit({cfg.iterations, opt.current_lr_network(), opt.current_lr_alpha(), mse, model.alpha.tv_penalty(),
          psnr_from_mse(mse / image.channels)});
    return res;
}

template <typename Real>
struct FitResult {
    InrModel<Real> model;
    std::vector<LogRow> log;
    ImageSignal reconstruction;
    ImageSignal error_map;
    double psnr = 0.0;
    double ssim = std::numeric_limits<double>::quiet_NaN();
};

/// Dense image fitting on every pixel.
template <typename Real = float>
FitResult<Real> fit_image(const ImageSignal& image, const TrainConfig& cfg, const LogCallback& on_log = {}) {
    std::vector<std::size_t> all(image.pixel_count());
    std::iota(all.begin(), all.end(), std::size_t{0});
    TrainResult<Real> tr = train_on_pixels<Real>(image, all, cfg, on_log);
    FitResult<Real> out{std::move(tr.model), std::move(tr.log), {}, {}, 0.0};
    out.reconstruction = render(out.model, image.height, image.width);
    out.error_map = abs_error_map(out.reconstruction, image);
    out.psnr = psnr(out.reconstruction, image);
    if (image.height >= 11 && image.width >= 11) out.ssim = ssim(out.reconstruction, image);
    return out;
}

template <typename Real>
struct SparseResult {
    InrModel<Real> model;
    std::vector<LogRow> log;
    ImageSignal reconstruction;
    ImageSignal masked_error;          // |pred - truth| on observed pixels, 0 elsewhere
    ImageSignal reconstruction_error;  // |pred - truth| everywhere
    double psnr_all = 0.0;
    double psnr_observed = 0.0;
    double psnr_unobserved = std::numeric_limits<double>::quiet_NaN();
    double ssim = std::numeric_limits<double>::quiet_NaN();
};

/// Masked reconstruction: MSE over observed pixels plus tv_weight * TV(alpha).
template <typename Real = float>
SparseResult<Real> reconstruct_sparse(const ImageSignal& image, const ObservationMask& mask, const TrainConfig& cfg,
                                      const LogCallback& on_log = {}) {
    if (mask.height != image.height || mask.width != image.width || mask.observed.size() != image.pixel_count()) {
        throw InputError("reconstruct_sparse: mask does not match image");
    }
    std::vector<std::size_t> seen;
    for (std::size_t p = 0; p < mask.observed.size(); ++p) {
        if (mask.observed[p]) seen.push_back(p);
    }
    if (seen.empty()) {
        throw InputError("reconstruct_sparse: mask has no observed pixels");
    }
    TrainResult<Real> tr = train_on_pixels<Real>(image, seen, cfg, on_log);
    SparseResult<Real> out{std::move(tr.model), std::move(tr.log), {}, {}, {}};
    out.reconstruction = render(out.model, image.height, image.width);
    out.reconstruction_error = abs_error_map(out.reconstruction, image);
    out.masked_error = out.reconstruction_error;
    for (std::size_t p = 0; p < mask.observed.size(); ++p) {
        if (mask.observed[p]) continue;
        for (int k = 0; k < image.channels; ++k) out.masked_error.pixels[p * image.channels + k] = 0.0;
    }
    out.psnr_all = psnr(out.reconstruction, image);
    out.psnr_observed = psnr_masked(out.reconstruction, image, mask.observed, true);
    if (seen.size() < mask.observed.size()) {
        out.psnr_unobserved = psnr_masked(out.reconstruction, image, mask.observed, false);
    }
    if (image.height >= 11 && image.width >= 11) out.ssim = ssim(out.reconstruction, image);
    return out;
}

}  // namespace alf

#pragma once

#include <cmath>
#include <vector>

#include "alfilter/errors.hpp"
#include "alfilter/image_io.hpp"

namespace alf {

/// Reported for identical images instead of +inf.
inline constexpr double kPsnrCap = 100.0;

/// 10 log10(1 / mse) for unit peak, capped at kPsnrCap.
inline double psnr_from_mse(double mse) {
    if (mse <= 0.0) return kPsnrCap;
    return std::min(kPsnrCap, 10.0 * std::log10(1.0 / mse));
}

inline double mean_squared_error(const ImageSignal& a, const ImageSignal& b) {
    if (!a.same_shape(b)) {
        throw InputError("metrics: image shapes differ");
    }
    double s = 0.0;
    for (std::size_t i = 0; i < a.pixels.size(); ++i) {
        const double d = a.pixels[i] - b.pixels[i];
        s += d * d;
    }
    return s / static_cast<double>(a.pixels.size());
}

inline double psnr(const ImageSignal& a, const ImageSignal& b) { return psnr_from_mse(mean_squared_error(a, b)); }

/// PSNR restricted to pixels whose mask entry equals `select`.
inline double psnr_masked(const ImageSignal& a, const ImageSignal& b, const std::vector<bool>& mask, bool select) {
    if (!a.same_shape(b) || mask.size() != a.pixel_count()) {
        throw InputError("metrics: image/mask shapes differ");
    }
    double s = 0.0;
    std::size_t n = 0;
    for (std::size_t p = 0; p < mask.size(); ++p) {
        if (mask[p] != select) continue;
        for (int k = 0; k < a.channels; ++k) {
            const double d = a.pixels[p * a.channels + k] - b.pixels[p * a.channels + k];
            s += d * d;
            ++n;
        }
    }
    if (n == 0) {
        throw InputError("metrics: mask selects no pixels");
    }
    return psnr_from_mse(s / static_cast<double>(n));
}

/// Rec. 601 luma for RGB, identity for grey.
inline std::vector<double> luma(const ImageSignal& img) {
    std::vector<double> y(img.pixel_count());
    for (std::size_t p = 0; p < y.size(); ++p) {
        if (img.channels == 1) {
            y[p] = img.pixels[p];
        } else {
            y[p] = 0.299 * img.pixels[3 * p] + 0.587 * img.pixels[3 * p + 1] + 0.114 * img.pixels[3 * p + 2];
        }
    }
    return y;
}

struct SsimSettings {
    int window = 11;
    double sigma = 1.5;
    double k1 = 0.01;
    double k2 = 0.03;
};

/// Mean SSIM over all fully-contained Gaussian windows of the luma planes.
inline double ssim(const ImageSignal& a, const ImageSignal& b, const SsimSettings& s = {}) {
    if (!a.same_shape(b)) {
        throw InputError("ssim: image shapes differ");
    }
    if (a.height < s.window || a.width < s.window) {
        throw InputError("ssim: image smaller than the " + std::to_string(s.window) + "x" +
                         std::to_string(s.window) + " window");
    }
    const std::vector<double> x = luma(a);
    const std::vector<double> y = luma(b);
    const int r = s.window / 2;
    std::vector<double> g(static_cast<std::size_t>(s.window));
    double gsum = 0.0;
    for (int i = 0; i < s.window; ++i) {
        g[i] = std::exp(-0.5 * (i - r) * (i - r) / (s.sigma * s.sigma));
        gsum += g[i];
    }
    for (double& v : g) v /= gsum;

    const double c1 = s.k1 * s.k1;
    const double c2 = s.k2 * s.k2;
    const int w = a.width;
    double total = 0.0;
    std::size_t count = 0;
    for (int r0 = 0; r0 + s.window <= a.height; ++r0) {
        for (int c0 = 0; c0 + s.window <= w; ++c0) {
            double mx = 0, my = 0, sxx = 0, syy = 0, sxy = 0;
            for (int i = 0; i < s.window; ++i) {
                for (int j = 0; j < s.window; ++j) {
                    const double wt = g[i] * g[j];
                    const std::size_t idx = static_cast<std::size_t>(r0 + i) * w + (c0 + j);
                    mx += wt * x[idx];
                    my += wt * y[idx];
                    sxx += wt * x[idx] * x[idx];
                    syy += wt * y[idx] * y[idx];
                    sxy += wt * x[idx] * y[idx];
                }
            }
            const double vx = sxx - mx * mx;
            const double vy = syy - my * my;
            const double cxy = sxy - mx * my;
            total += ((2 * mx * my + c1) * (2 * cxy + c2)) / ((mx * mx + my * my + c1) * (vx + vy + c2));
            ++count;
        }
    }
    return total / static_cast<double>(count);
}

}  // namespace alf

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include "alfilter/errors.hpp"

namespace alf {

/// Interleaved image with values in [0,1]; pixel (r, c) channel k lives at
/// (r * width + c) * channels + k.
struct ImageSignal {
    int height = 0;
    int width = 0;
    int channels = 1;
    std::vector<double> pixels;

    ImageSignal() = default;
    ImageSignal(int h, int w, int ch, double fill = 0.0)
        : height(h), width(w), channels(ch), pixels(static_cast<std::size_t>(h) * w * ch, fill) {
        if (h < 1 || w < 1 || (ch != 1 && ch != 3)) {
            throw InputError("image: need positive size and 1 or 3 channels");
        }
    }

    std::size_t pixel_count() const { return static_cast<std::size_t>(height) * width; }
    double& at(int r, int c, int k) { return pixels[(static_cast<std::size_t>(r) * width + c) * channels + k]; }
    double at(int r, int c, int k) const { return pixels[(static_cast<std::size_t>(r) * width + c) * channels + k]; }

    bool same_shape(const ImageSignal& o) const {
        return height == o.height && width == o.width && channels == o.channels;
    }

    void validate() const {
        if (pixels.size() != pixel_count() * static_cast<std::size_t>(channels)) {
            throw InputError("image: pixel buffer does not match dimensions");
        }
        for (double v : pixels) {
            if (!(v >= 0.0 && v <= 1.0)) {
                throw InputError("image: pixel value outside [0,1]");
            }
        }
    }
};

/// Canonical coordinate of pixel (r, c): ((c + 0.5) / W, (r + 0.5) / H).
inline std::pair<double, double> pixel_center(int r, int c, int height, int width) {
    return {(c + 0.5) / width, (r + 0.5) / height};
}

namespace detail {

inline void skip_pnm_space(std::istream& is) {
    for (;;) {
        const int ch = is.peek();
        if (ch == '#') {
            std::string line;
            std::getline(is, line);
        } else if (ch == ' ' || ch == '\t' || ch == '\n' || ch == '\r') {
            is.get();
        } else {
            return;
        }
    }
}

inline int read_pnm_int(std::istream& is, const std::string& path) {
    skip_pnm_space(is);
    int v = 0;
    if (!(is >> v)) {
        throw FormatError(path + ": malformed PNM header");
    }
    return v;
}

}  // namespace detail

/// Reads binary PGM (P5) or PPM (P6), 8-bit.
inline ImageSignal read_pnm(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) {
        throw IoError("cannot open " + path);
    }
    char magic[2] = {0, 0};
    is.read(magic, 2);
    if (!is || magic[0] != 'P' || (magic[1] != '5' && magic[1] != '6')) {
        throw FormatError(path + ": not a binary PGM/PPM file");
    }
    const int channels = magic[1] == '6' ? 3 : 1;
    const int width = detail::read_pnm_int(is, path);
    const int height = detail::read_pnm_int(is, path);
    const int maxval = detail::read_pnm_int(is, path);
    if (width < 1 || height < 1 || maxval != 255) {
        throw FormatError(path + ": only 8-bit images with maxval 255 are supported");
    }
    is.get();  // single whitespace before raster
    std::vector<unsigned char> raw(static_cast<std::size_t>(width) * height * channels);
    is.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
    if (!is) {
        throw FormatError(path + ": truncated raster");
    }
    ImageSignal img(height, width, channels);
    for (std::size_t i = 0; i < raw.size(); ++i) {
        img.pixels[i] = raw[i] / 255.0;
    }
    return img;
}

inline std::uint8_t to_byte(double v) {
    return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
}

inline void write_pnm_bytes(const std::string& path, int height, int width, int channels,
                            const std::vector<std::uint8_t>& bytes) {
    std::ofstream os(path, std::ios::binary);
    if (!os) {
        throw IoError("cannot open " + path + " for writing");
    }
    os << (channels == 3 ? "P6" : "P5") << '\n' << width << ' ' << height << "\n255\n";
    os.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!os) {
        throw IoError("write failed: " + path);
    }
}

/// Writes P5 for one channel, P6 for three; values are clamped and scaled by 255.
inline void write_pnm(const std::string& path, const ImageSignal& img) {
    std::vector<std::uint8_t> bytes(img.pixels.size());
    std::transform(img.pixels.begin(), img.pixels.end(), bytes.begin(), to_byte);
    write_pnm_bytes(path, img.height, img.width, img.channels, bytes);
}

}  // namespace alf

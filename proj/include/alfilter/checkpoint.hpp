#pragma once

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include "alfilter/errors.hpp"
#include "alfilter/model.hpp"

namespace alf {

// Checkpoint layout (all integers u32, all reals f64, little-endian):
//
//   magic        8 bytes  "ALFCKPT\0"
//   version      u32      = 1
//   d_in         u32
//   levels       u32      L
//   activation   u32      0 = relu, 1 = sine
//   filter_mode  u32      0 = adaptive, 1 = all-pass
//   precision    u32      bytes per scalar the model was trained with (4 or 8)
//   omega0       f64
//   bandwidth    f64      B
//   kappa        f64
//   layer_count  u32      K
//   widths       u32 x (K + 1)
//   grid_dims    u32      D
//   resolution   u32 x D  node counts, axis 0 first
//   payload      f64 ...  per layer: weight row-major (out x in), then bias;
//                         then grid nodes in storage order (axis 0 fastest)
inline constexpr std::array<char, 8> kCheckpointMagic{'A', 'L', 'F', 'C', 'K', 'P', 'T', '\0'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

namespace detail {

class ByteWriter {
public:
    void u32(std::uint32_t v) {
        for (int i = 0; i < 4; ++i) bytes_.push_back(static_cast<char>((v >> (8 * i)) & 0xffu));
    }
    void f64(double v) {
        const auto bits = std::bit_cast<std::uint64_t>(v);
        for (int i = 0; i < 8; ++i) bytes_.push_back(static_cast<char>((bits >> (8 * i)) & 0xffu));
    }
    void raw(const char* p, std::size_t n) { bytes_.insert(bytes_.end(), p, p + n); }
    const std::vector<char>& bytes() const { return bytes_; }

private:
    std::vector<char> bytes_;
};

class ByteReader {
public:
    explicit ByteReader(std::vector<char> bytes) : bytes_(std::move(bytes)) {}

    std::uint32_t u32() {
        need(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i);
        pos_ += 4;
        return v;
    }
    double f64() {
        need(8);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i);
        pos_ += 8;
        return std::bit_cast<double>(v);
    }
    void raw(char* out, std::size_t n) {
        need(n);
        std::memcpy(out, bytes_.data() + pos_, n);
        pos_ += n;
    }
    bool at_end() const { return pos_ == bytes_.size(); }
    std::size_t remaining() const { return bytes_.size() - pos_; }

private:
    void need(std::size_t n) const {
        if (pos_ + n > bytes_.size()) {
            throw FormatError("checkpoint: truncated file");
        }
    }
    std::vector<char> bytes_;
    std::size_t pos_ = 0;
};

}  // namespace detail

template <typename Real>
std::vector<char> serialize_checkpoint(const InrModel<Real>& model) {
    model.validate();
    detail::ByteWriter w;
    w.raw(kCheckpointMagic.data(), kCheckpointMagic.size());
    w.u32(kCheckpointVersion);
    w.u32(static_cast<std::uint32_t>(model.encoding.d_in));
    w.u32(static_cast<std::uint32_t>(model.encoding.levels));
    w.u32(model.mlp.activation == Activation::relu ? 0u : 1u);
    w.u32(model.mode == FilterMode::adaptive ? 0u : 1u);
    w.u32(static_cast<std::uint32_t>(sizeof(Real)));
    w.f64(model.mlp.omega0);
    w.f64(model.filter.bandwidth);
    w.f64(model.filter.kappa);
    const auto widths = model.mlp.widths();
    w.u32(static_cast<std::uint32_t>(model.mlp.layers.size()));
    for (int v : widths) w.u32(static_cast<std::uint32_t>(v));
    w.u32(static_cast<std::uint32_t>(model.alpha.dims()));
    for (int v : model.alpha.resolution()) w.u32(static_cast<std::uint32_t>(v));
    for (const auto& layer : model.mlp.layers) {
        for (Eigen::Index r = 0; r < layer.weight.rows(); ++r) {
            for (Eigen::Index c = 0; c < layer.weight.cols(); ++c) {
                w.f64(static_cast<double>(layer.weight(r, c)));
            }
        }
        for (Eigen::Index r = 0; r < layer.bias.size(); ++r) w.f64(static_cast<double>(layer.bias[r]));
    }
    for (double v : model.alpha.nodes()) w.f64(v);
    return w.bytes();
}

template <typename Real>
InrModel<Real> deserialize_checkpoint(std::vector<char> bytes) {
    detail::ByteReader r(std::move(bytes));
    std::array<char, 8> magic{};
    r.raw(magic.data(), magic.size());
    if (magic != kCheckpointMagic) {
        throw FormatError("checkpoint: bad magic");
    }
    if (const auto version = r.u32(); version != kCheckpointVersion) {
        throw FormatError("checkpoint: unsupported version " + std::to_string(version));
    }
    constexpr std::uint32_t kSane = 1u << 20;
    const std::uint32_t d_in = r.u32();
    const std::uint32_t levels = r.u32();
    const std::uint32_t act = r.u32();
    const std::uint32_t mode = r.u32();
    const std::uint32_t precision = r.u32();
    if (d_in == 0 || d_in > 3 || levels == 0 || levels > 64 || act > 1 || mode > 1 ||
        (precision != 4 && precision != 8)) {
        throw FormatError("checkpoint: invalid header fields");
    }
    InrModel<Real> m;
    m.encoding = EncodingConfig(static_cast<int>(d_in), static_cast<int>(levels));
    m.mlp.activation = act == 0 ? Activation::relu : Activation::sine;
    m.mode = mode == 0 ? FilterMode::adaptive : FilterMode::all_pass;
    m.mlp.omega0 = r.f64();
    const double bandwidth = r.f64();
    const double kappa = r.f64();
    if (!(bandwidth > 0.0) || !(kappa > 0.0) || !(m.mlp.omega0 > 0.0)) {
        throw FormatError("checkpoint: invalid filter or activation constants");
    }
    m.filter = FilterConfig(bandwidth, kappa, m.encoding.channels());
    const std::uint32_t k = r.u32();
    if (k == 0 || k > 1024) {
        throw FormatError("checkpoint: invalid layer count");
    }
    std::vector<int> widths(k + 1);
    for (auto& v : widths) {
        const std::uint32_t x = r.u32();
        if (x == 0 || x > kSane) throw FormatError("checkpoint: invalid layer width");
        v = static_cast<int>(x);
    }
    const std::uint32_t dims = r.u32();
    if (dims != d_in) {
        throw FormatError("checkpoint: grid rank does not match d_in");
    }
    std::vector<int> res(dims);
    for (auto& v : res) {
        const std::uint32_t x = r.u32();
        if (x < 2 || x > kSane) throw FormatError("checkpoint: invalid grid resolution");
        v = static_cast<int>(x);
    }
    std::size_t payload = 0;
    for (std::uint32_t i = 0; i < k; ++i) payload += static_cast<std::size_t>(widths[i + 1]) * (widths[i] + 1);
    std::size_t nodes = 1;
    for (int v : res) nodes *= static_cast<std::size_t>(v);
    if ((payload + nodes) * 8 != r.remaining()) {
        throw FormatError("checkpoint: payload size does not match header");
    }
    for (std::uint32_t i = 0; i < k; ++i) {
        DenseLayer<Real> layer{Mat<Real>(widths[i + 1], widths[i]), Vec<Real>(widths[i + 1])};
        for (Eigen::Index rr = 0; rr < layer.weight.rows(); ++rr) {
            for (Eigen::Index c = 0; c < layer.weight.cols(); ++c) layer.weight(rr, c) = static_cast<Real>(r.f64());
        }
        for (Eigen::Index rr = 0; rr < layer.bias.size(); ++rr) layer.bias[rr] = static_cast<Real>(r.f64());
        m.mlp.layers.push_back(std::move(layer));
    }
    m.alpha = AlphaGrid(res, 0.0);
    for (double& v : m.alpha.nodes()) v = r.f64();
    if (!r.at_end()) {
        throw FormatError("checkpoint: trailing bytes");
    }
    try {
        m.validate();
    } catch (const ConfigError& e) {
        throw FormatError(std::string("checkpoint: inconsistent model: ") + e.what());
    }
    return m;
}

/// Scalar width (4 or 8 bytes) recorded in a checkpoint file.
inline int checkpoint_precision(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open " + path);
    std::vector<char> head(32);
    is.read(head.data(), static_cast<std::streamsize>(head.size()));
    if (is.gcount() < 32) throw FormatError("checkpoint: truncated file");
    detail::ByteReader r(std::move(head));
    std::array<char, 8> magic{};
    r.raw(magic.data(), magic.size());
    if (magic != kCheckpointMagic) throw FormatError("checkpoint: bad magic");
    for (int i = 0; i < 5; ++i) r.u32();
    const auto precision = r.u32();
    if (precision != 4 && precision != 8) throw FormatError("checkpoint: invalid precision field");
    return static_cast<int>(precision);
}

template <typename Real>
void save_checkpoint(const InrModel<Real>& model, const std::string& path) {
    const auto bytes = serialize_checkpoint(model);
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot open " + path + " for writing");
    os.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!os) throw IoError("write failed: " + path);
}

template <typename Real>
InrModel<Real> load_checkpoint(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open " + path);
    std::vector<char> bytes((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
    return deserialize_checkpoint<Real>(std::move(bytes));
}

}  // namespace alf

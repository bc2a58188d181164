#pragma once

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "digitsum/adadelta.hpp"
#include "digitsum/errors.hpp"
#include "digitsum/model.hpp"

namespace digitsum {

// Checkpoint container, version 1. Fixed little-endian byte order:
//
//   "DSUMCKPT"             8-byte magic
//   version                u32 (=1)
//   scalar width           u32 (4 = float, 8 = double)
//   in_channels,in_h,in_w  u32 x3
//   layer count            u32
//   per layer: kind u32 (0 conv, 1 pool, 2 flatten, 3 dense) + kind fields
//   tensor count           u32 (weights then biases, interleaved per layer)
//   per tensor: ndim u32, dims u32..., payload scalar[numel]
//   optimizer flag         u8; when 1: rho f64, eps f64, then the four
//                          accumulator tensor groups in the same layout
//
// Save/load round-trips bit-exactly in the stored precision.

namespace ckpt_detail {

inline constexpr char kMagic[8] = {'D', 'S', 'U', 'M', 'C', 'K', 'P', 'T'};
inline constexpr std::uint32_t kVersion = 1;

struct Writer {
    std::ofstream f;
    explicit Writer(const std::filesystem::path& p)
        : f(p, std::ios::binary | std::ios::trunc) {
        if (!f) throw IoError("cannot open " + p.string() + " for writing");
    }
    void bytes(const void* p, std::size_t n) {
        f.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
    }
    void u8(std::uint8_t v) { bytes(&v, 1); }
    void u32(std::uint32_t v) {
        std::uint8_t b[4] = {std::uint8_t(v), std::uint8_t(v >> 8),
                             std::uint8_t(v >> 16), std::uint8_t(v >> 24)};
        bytes(b, 4);
    }
    void f64(double v) {
        std::uint64_t u;
        std::memcpy(&u, &v, 8);
        std::uint8_t b[8];
        for (int i = 0; i < 8; ++i) b[i] = std::uint8_t(u >> (8 * i));
        bytes(b, 8);
    }
};

struct Reader {
    std::vector<std::uint8_t> buf;
    std::size_t pos = 0;
    explicit Reader(const std::filesystem::path& p) {
        std::ifstream f(p, std::ios::binary);
        if (!f) throw IoError("cannot open " + p.string());
        buf.assign((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    }
    void bytes(void* out, std::size_t n) {
        if (pos + n > buf.size()) {
            throw IncompatibleCheckpoint("checkpoint truncated");
        }
        std::memcpy(out, buf.data() + pos, n);
        pos += n;
    }
    std::uint8_t u8() {
        std::uint8_t v;
        bytes(&v, 1);
        return v;
    }
    std::uint32_t u32() {
        std::uint8_t b[4];
        bytes(b, 4);
        return std::uint32_t(b[0]) | (std::uint32_t(b[1]) << 8) |
               (std::uint32_t(b[2]) << 16) | (std::uint32_t(b[3]) << 24);
    }
    double f64() {
        std::uint8_t b[8];
        bytes(b, 8);
        std::uint64_t u = 0;
        for (int i = 0; i < 8; ++i) u |= std::uint64_t(b[i]) << (8 * i);
        double v;
        std::memcpy(&v, &u, 8);
        return v;
    }
};

// Scalars are stored little-endian; on the (little-endian) platforms this
// project targets the payload is written directly.
template <class S>
void write_tensor(Writer& w, const Tensor<S>& t) {
    w.u32(static_cast<std::uint32_t>(t.shape.size()));
    for (std::size_t d : t.shape) w.u32(static_cast<std::uint32_t>(d));
    w.bytes(t.data.data(), t.data.size() * sizeof(S));
}

template <class S>
Tensor<S> read_tensor(Reader& r) {
    const std::uint32_t ndim = r.u32();
    std::vector<std::size_t> shape(ndim);
    for (auto& d : shape) d = r.u32();
    Tensor<S> t(shape);
    r.bytes(t.data.data(), t.data.size() * sizeof(S));
    return t;
}

inline void write_specs(Writer& w, const std::vector<LayerSpec>& specs) {
    w.u32(static_cast<std::uint32_t>(specs.size()));
    for (const LayerSpec& s : specs) {
        if (const auto* c = std::get_if<ConvSpec>(&s)) {
            w.u32(0);
            w.u32(static_cast<std::uint32_t>(c->out_channels));
            w.u32(static_cast<std::uint32_t>(c->kh));
            w.u32(static_cast<std::uint32_t>(c->kw));
            w.u32(static_cast<std::uint32_t>(c->act));
        } else if (const auto* p = std::get_if<PoolSpec>(&s)) {
            w.u32(1);
            w.u32(static_cast<std::uint32_t>(p->ph));
            w.u32(static_cast<std::uint32_t>(p->pw));
        } else if (std::get_if<FlattenSpec>(&s)) {
            w.u32(2);
        } else {
            const auto& d = std::get<DenseSpec>(s);
            w.u32(3);
            w.u32(static_cast<std::uint32_t>(d.units));
            w.u32(static_cast<std::uint32_t>(d.act));
        }
    }
}

inline std::vector<LayerSpec> read_specs(Reader& r) {
    const std::uint32_t n = r.u32();
    std::vector<LayerSpec> specs;
    specs.reserve(n);
    for (std::uint32_t i = 0; i < n; ++i) {
        switch (r.u32()) {
            case 0: {
                ConvSpec c;
                c.out_channels = r.u32();
                c.kh = r.u32();
                c.kw = r.u32();
                c.act = static_cast<Activation>(r.u32());
                specs.push_back(c);
                break;
            }
            case 1: {
                PoolSpec p;
                p.ph = r.u32();
                p.pw = r.u32();
                specs.push_back(p);
                break;
            }
            case 2:
                specs.push_back(FlattenSpec{});
                break;
            case 3: {
                DenseSpec d;
                d.units = r.u32();
                d.act = static_cast<Activation>(r.u32());
                specs.push_back(d);
                break;
            }
            default:
                throw IncompatibleCheckpoint("unknown layer kind in checkpoint");
        }
    }
    return specs;
}

}  // namespace ckpt_detail

template <class S>
void save_checkpoint(const std::filesystem::path& path, const Model<S>& model,
                     const AdadeltaState<S>* opt = nullptr) {
    ckpt_detail::Writer w(path);
    w.bytes(ckpt_detail::kMagic, 8);
    w.u32(ckpt_detail::kVersion);
    w.u32(sizeof(S));
    w.u32(static_cast<std::uint32_t>(model.in_channels()));
    w.u32(static_cast<std::uint32_t>(model.in_height()));
    w.u32(static_cast<std::uint32_t>(model.in_width()));
    ckpt_detail::write_specs(w, model.specs());
    w.u32(static_cast<std::uint32_t>(model.weights().size()));
    for (std::size_t i = 0; i < model.weights().size(); ++i) {
        ckpt_detail::write_tensor(w, model.weights()[i]);
        ckpt_detail::write_tensor(w, model.biases()[i]);
    }
    if (opt) {
        w.u8(1);
        w.f64(double(opt->rho));
        w.f64(double(opt->eps));
        for (std::size_t i = 0; i < opt->g2_weights.size(); ++i) {
            ckpt_detail::write_tensor(w, opt->g2_weights[i]);
            ckpt_detail::write_tensor(w, opt->dx2_weights[i]);
            ckpt_detail::write_tensor(w, opt->g2_biases[i]);
            ckpt_detail::write_tensor(w, opt->dx2_biases[i]);
        }
    } else {
        w.u8(0);
    }
    if (!w.f) throw IoError("short write to " + path.string());
}

template <class S>
struct LoadedCheckpoint {
    Model<S> model;
    std::optional<AdadeltaState<S>> optimizer;
};

template <class S>
LoadedCheckpoint<S> load_checkpoint(const std::filesystem::path& path) {
    ckpt_detail::Reader r(path);
    char magic[8];
    r.bytes(magic, 8);
    if (std::memcmp(magic, ckpt_detail::kMagic, 8) != 0) {
        throw IncompatibleCheckpoint(path.string() + ": not a checkpoint file");
    }
    const std::uint32_t version = r.u32();
    if (version != ckpt_detail::kVersion) {
        throw IncompatibleCheckpoint("unsupported checkpoint version " +
                                     std::to_string(version));
    }
    const std::uint32_t width = r.u32();
    if (width != sizeof(S)) {
        throw IncompatibleCheckpoint("checkpoint stores " + std::to_string(width * 8) +
                                     "-bit scalars, loader expects " +
                                     std::to_string(sizeof(S) * 8) + "-bit");
    }
    const std::uint32_t in_c = r.u32();
    const std::uint32_t in_h = r.u32();
    const std::uint32_t in_w = r.u32();
    std::vector<LayerSpec> specs = ckpt_detail::read_specs(r);

    LoadedCheckpoint<S> out{Model<S>(specs, in_c, in_h, in_w), std::nullopt};
    const std::uint32_t n_params = r.u32();
    if (n_params != out.model.weights().size()) {
        throw IncompatibleCheckpoint("parameter tensor count mismatch");
    }
    for (std::uint32_t i = 0; i < n_params; ++i) {
        Tensor<S> w = ckpt_detail::read_tensor<S>(r);
        Tensor<S> b = ckpt_detail::read_tensor<S>(r);
        if (w.shape != out.model.weights()[i].shape ||
            b.shape != out.model.biases()[i].shape) {
            throw IncompatibleCheckpoint("parameter tensor shape mismatch at index " +
                                         std::to_string(i));
        }
        out.model.weights()[i] = std::move(w);
        out.model.biases()[i] = std::move(b);
    }
    if (r.u8() == 1) {
        AdadeltaState<S> opt(out.model);
        opt.rho = static_cast<S>(r.f64());
        opt.eps = static_cast<S>(r.f64());
        for (std::size_t i = 0; i < opt.g2_weights.size(); ++i) {
            opt.g2_weights[i] = ckpt_detail::read_tensor<S>(r);
            opt.dx2_weights[i] = ckpt_detail::read_tensor<S>(r);
            opt.g2_biases[i] = ckpt_detail::read_tensor<S>(r);
            opt.dx2_biases[i] = ckpt_detail::read_tensor<S>(r);
        }
        out.optimizer = std::move(opt);
    }
    return out;
}

}  // namespace digitsum

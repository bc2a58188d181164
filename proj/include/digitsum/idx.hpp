#pragma once

#include <zlib.h>

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "digitsum/errors.hpp"

namespace digitsum::idx {

// IDX is the MNIST container format. Everything is big-endian:
//
//   images: magic 0x00000803 | count u32 | rows u32 | cols u32 | pixels u8[count*rows*cols]
//   labels: magic 0x00000801 | count u32 | labels u8[count]
//
// The canonical distribution ships these files gzipped; read_file() inflates
// transparently when it sees the 2-byte gzip signature 0x1f 0x8b.

inline constexpr std::uint32_t kImageMagic = 0x00000803u;
inline constexpr std::uint32_t kLabelMagic = 0x00000801u;

struct Images {
    std::uint32_t count = 0;
    std::uint32_t rows = 0;
    std::uint32_t cols = 0;
    std::vector<std::uint8_t> pixels;  // row-major, count * rows * cols bytes

    std::size_t image_size() const { return std::size_t(rows) * cols; }
    const std::uint8_t* image(std::size_t i) const { return pixels.data() + i * image_size(); }
    std::uint8_t* image(std::size_t i) { return pixels.data() + i * image_size(); }
};

namespace detail {

inline std::uint32_t read_be32(const std::uint8_t* p) {
    return (std::uint32_t(p[0]) << 24) | (std::uint32_t(p[1]) << 16) |
           (std::uint32_t(p[2]) << 8) | std::uint32_t(p[3]);
}

inline void write_be32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    out.push_back(std::uint8_t(v >> 24));
    out.push_back(std::uint8_t(v >> 16));
    out.push_back(std::uint8_t(v >> 8));
    out.push_back(std::uint8_t(v));
}

inline std::vector<std::uint8_t> gunzip(const std::vector<std::uint8_t>& in,
                                        const std::string& context) {
    z_stream zs;
    std::memset(&zs, 0, sizeof(zs));
    // 15 window bits + 16 selects gzip decoding.
    if (inflateInit2(&zs, 15 + 16) != Z_OK) {
        throw IoError(context + ": zlib init failed");
    }
    std::vector<std::uint8_t> out;
    std::vector<std::uint8_t> buf(1 << 16);
    zs.next_in = const_cast<Bytef*>(in.data());
    zs.avail_in = static_cast<uInt>(in.size());
    int rc = Z_OK;
    while (rc != Z_STREAM_END) {
        zs.next_out = buf.data();
        zs.avail_out = static_cast<uInt>(buf.size());
        rc = inflate(&zs, Z_NO_FLUSH);
        if (rc != Z_OK && rc != Z_STREAM_END) {
            inflateEnd(&zs);
            throw IoError(context + ": corrupt gzip stream");
        }
        out.insert(out.end(), buf.data(), buf.data() + (buf.size() - zs.avail_out));
    }
    inflateEnd(&zs);
    return out;
}

}  // namespace detail

// Reads a whole file; gunzips if the gzip signature is present.
inline std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) {
        throw IoError("cannot open " + path.string());
    }
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(f)),
                                    std::istreambuf_iterator<char>());
    if (bytes.size() >= 2 && bytes[0] == 0x1f && bytes[1] == 0x8b) {
        return detail::gunzip(bytes, path.string());
    }
    return bytes;
}

inline void write_file(const std::filesystem::path& path,
                       const std::vector<std::uint8_t>& bytes) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) {
        throw IoError("cannot open " + path.string() + " for writing");
    }
    f.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
    if (!f) {
        throw IoError("short write to " + path.string());
    }
}

// Parses an IDX image payload. The caller states the geometry it expects;
// anything else is a DimensionMismatch because every consumer in this project
// has fixed geometry (28x28 source digits, 28x56 generated samples).
inline Images parse_images(const std::vector<std::uint8_t>& bytes,
                           std::uint32_t expect_rows = 28,
                           std::uint32_t expect_cols = 28) {
    if (bytes.size() < 16) {
        throw TruncatedFile("image header needs 16 bytes, got " +
                            std::to_string(bytes.size()));
    }
    const std::uint32_t magic = detail::read_be32(bytes.data());
    if (magic != kImageMagic) {
        throw BadMagic("image magic: expected 0x00000803, got 0x" +
                       [](std::uint32_t m) {
                           char b[9];
                           std::snprintf(b, sizeof b, "%08x", m);
                           return std::string(b);
                       }(magic));
    }
    Images out;
    out.count = detail::read_be32(bytes.data() + 4);
    out.rows = detail::read_be32(bytes.data() + 8);
    out.cols = detail::read_be32(bytes.data() + 12);
    if (out.rows != expect_rows || out.cols != expect_cols) {
        throw DimensionMismatch("expected " + std::to_string(expect_rows) + "x" +
                                std::to_string(expect_cols) + " images, file says " +
                                std::to_string(out.rows) + "x" + std::to_string(out.cols));
    }
    const std::size_t need = std::size_t(out.count) * out.rows * out.cols;
    if (bytes.size() - 16 < need) {
        throw TruncatedFile("image payload: header promises " + std::to_string(need) +
                            " bytes, file has " + std::to_string(bytes.size() - 16));
    }
    out.pixels.assign(bytes.begin() + 16, bytes.begin() + 16 + static_cast<std::ptrdiff_t>(need));
    return out;
}

// Parses an IDX label payload. max_label is 9 for MNIST digits and 18 for
// generated pair sums.
inline std::vector<std::uint8_t> parse_labels(const std::vector<std::uint8_t>& bytes,
                                              std::uint8_t max_label = 9) {
    if (bytes.size() < 8) {
        throw TruncatedFile("label header needs 8 bytes, got " +
                            std::to_string(bytes.size()));
    }
    const std::uint32_t magic = detail::read_be32(bytes.data());
    if (magic != kLabelMagic) {
        throw BadMagic("label magic: expected 0x00000801, got 0x" +
                       [](std::uint32_t m) {
                           char b[9];
                           std::snprintf(b, sizeof b, "%08x", m);
                           return std::string(b);
                       }(magic));
    }
    const std::uint32_t count = detail::read_be32(bytes.data() + 4);
    if (bytes.size() - 8 < count) {
        throw TruncatedFile("label payload: header promises " + std::to_string(count) +
                            " bytes, file has " + std::to_string(bytes.size() - 8));
    }
    std::vector<std::uint8_t> labels(bytes.begin() + 8,
                                     bytes.begin() + 8 + static_cast<std::ptrdiff_t>(count));
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] > max_label) {
            throw InvalidLabel("label " + std::to_string(labels[i]) + " at index " +
                               std::to_string(i) + " exceeds " + std::to_string(max_label));
        }
    }
    return labels;
}

inline std::vector<std::uint8_t> serialize_images(const Images& images) {
    std::vector<std::uint8_t> out;
    out.reserve(16 + images.pixels.size());
    detail::write_be32(out, kImageMagic);
    detail::write_be32(out, images.count);
    detail::write_be32(out, images.rows);
    detail::write_be32(out, images.cols);
    out.insert(out.end(), images.pixels.begin(), images.pixels.end());
    return out;
}

inline std::vector<std::uint8_t> serialize_labels(const std::vector<std::uint8_t>& labels) {
    std::vector<std::uint8_t> out;
    out.reserve(8 + labels.size());
    detail::write_be32(out, kLabelMagic);
    detail::write_be32(out, static_cast<std::uint32_t>(labels.size()));
    out.insert(out.end(), labels.begin(), labels.end());
    return out;
}

}  // namespace digitsum::idx

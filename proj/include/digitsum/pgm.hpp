#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <span>
#include <string>

#include "digitsum/errors.hpp"

namespace digitsum {

// Binary PGM (P5): readable by any image viewer, no library needed.
inline void write_pgm(const std::filesystem::path& path, std::size_t rows,
                      std::size_t cols, std::span<const std::uint8_t> pixels) {
    if (pixels.size() != rows * cols) {
        throw ShapeMismatch("pgm: " + std::to_string(pixels.size()) + " bytes for " +
                            std::to_string(rows) + "x" + std::to_string(cols));
    }
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("cannot open " + path.string() + " for writing");
    f << "P5\n" << cols << " " << rows << "\n255\n";
    f.write(reinterpret_cast<const char*>(pixels.data()),
            static_cast<std::streamsize>(pixels.size()));
    if (!f) throw IoError("short write to " + path.string());
}

}  // namespace digitsum

#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "digitsum/errors.hpp"
#include "digitsum/idx.hpp"

namespace digitsum {

enum class Partition { Train, Test };

inline const char* to_string(Partition p) {
    return p == Partition::Train ? "train" : "test";
}

// Parsed MNIST digits for one partition. Pixels stay raw 8-bit here; the
// training code converts to real values at batch-assembly time.
struct MnistDataset {
    static constexpr std::uint32_t kRows = 28;
    static constexpr std::uint32_t kCols = 28;
    static constexpr std::size_t kImageSize = std::size_t(kRows) * kCols;

    Partition partition = Partition::Train;
    std::vector<std::uint8_t> pixels;  // count * 784, row-major
    std::vector<std::uint8_t> labels;  // digits 0..9

    std::size_t size() const { return labels.size(); }

    std::span<const std::uint8_t> image(std::size_t i) const {
        return {pixels.data() + i * kImageSize, kImageSize};
    }
    std::uint8_t label(std::size_t i) const { return labels[i]; }
};

inline MnistDataset load_dataset(const std::filesystem::path& images_path,
                                 const std::filesystem::path& labels_path,
                                 Partition partition) {
    idx::Images images = idx::parse_images(idx::read_file(images_path));
    std::vector<std::uint8_t> labels = idx::parse_labels(idx::read_file(labels_path));
    if (images.count != labels.size()) {
        throw CountMismatch(images_path.filename().string() + " has " +
                            std::to_string(images.count) + " images but " +
                            labels_path.filename().string() + " has " +
                            std::to_string(labels.size()) + " labels");
    }
    MnistDataset ds;
    ds.partition = partition;
    ds.pixels = std::move(images.pixels);
    ds.labels = std::move(labels);
    return ds;
}

inline std::vector<std::uint8_t> serialize_images(const MnistDataset& ds) {
    idx::Images images;
    images.count = static_cast<std::uint32_t>(ds.size());
    images.rows = MnistDataset::kRows;
    images.cols = MnistDataset::kCols;
    images.pixels = ds.pixels;
    return idx::serialize_images(images);
}

inline std::vector<std::uint8_t> serialize_labels(const MnistDataset& ds) {
    return idx::serialize_labels(ds.labels);
}

// Positions of every image with a given digit label. Answers the
// "random index with label d" lookups during sample generation in O(1).
struct LabelIndex {
    std::array<std::vector<std::uint32_t>, 10> buckets;

    const std::vector<std::uint32_t>& bucket(std::uint8_t digit) const {
        return buckets[digit];
    }
};

inline LabelIndex build_label_index(const MnistDataset& ds) {
    LabelIndex index;
    for (std::size_t i = 0; i < ds.size(); ++i) {
        index.buckets[ds.labels[i]].push_back(static_cast<std::uint32_t>(i));
    }
    return index;
}

}  // namespace digitsum

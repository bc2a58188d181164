#pragma once

#include <algorithm>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "digitsum/errors.hpp"
#include "digitsum/idx.hpp"
#include "digitsum/mnist.hpp"
#include "digitsum/pairs.hpp"
#include "digitsum/rng.hpp"

namespace digitsum {

struct GenConfig {
    std::uint32_t samples_per_pair = 1000;
    int digit_base = 10;
    int pair_length = 2;
    std::uint64_t seed = 0;
};

// Generated samples: two side-by-side source digits per image, labelled with
// their sum. Stored columnar; sample(i) gives a per-sample view.
struct PairDataset {
    static constexpr std::uint32_t kRows = 28;
    static constexpr std::uint32_t kCols = 56;
    static constexpr std::size_t kImageSize = std::size_t(kRows) * kCols;

    Partition source_partition = Partition::Train;
    std::vector<std::uint8_t> pixels;        // count * 28*56
    std::vector<std::uint8_t> labels;        // 0..18
    std::vector<PermutationPair> pair_of;    // provenance pair per sample
    std::vector<std::uint32_t> left_index;   // provenance index r1 per sample
    std::vector<std::uint32_t> right_index;  // provenance index r2 per sample
    std::vector<PermutationPair> pairs_covered;

    std::size_t size() const { return labels.size(); }

    std::span<const std::uint8_t> image(std::size_t i) const {
        return {pixels.data() + i * kImageSize, kImageSize};
    }

    struct Sample {
        std::span<const std::uint8_t> image;  // 28x56 row-major
        std::uint8_t label;
        PermutationPair pair;
        std::uint32_t left_index;
        std::uint32_t right_index;
    };

    Sample sample(std::size_t i) const {
        return {image(i), labels[i], pair_of[i], left_index[i], right_index[i]};
    }
};

// Places `left` in columns 0..27 and `right` in columns 28..55 of `out`,
// row by row. Pixels pass through untouched.
inline void concatenate_images(std::span<const std::uint8_t> left,
                               std::span<const std::uint8_t> right,
                               std::span<std::uint8_t> out) {
    constexpr std::size_t w = MnistDataset::kCols;
    for (std::size_t row = 0; row < MnistDataset::kRows; ++row) {
        std::memcpy(out.data() + row * 2 * w, left.data() + row * w, w);
        std::memcpy(out.data() + row * 2 * w + w, right.data() + row * w, w);
    }
}

inline std::vector<std::uint8_t> concatenate_images(std::span<const std::uint8_t> left,
                                                    std::span<const std::uint8_t> right) {
    std::vector<std::uint8_t> out(PairDataset::kImageSize);
    concatenate_images(left, right, out);
    return out;
}

// Generates m samples for every pair: each draws two random source indices
// with the pair's digit labels (with replacement) and concatenates the
// images. Every pair uses its own RNG substream keyed on (seed, pair), so the
// result does not depend on iteration order or scheduling.
inline PairDataset generate_pair_dataset(const std::vector<PermutationPair>& pairs,
                                         const MnistDataset& source,
                                         const LabelIndex& index,
                                         std::uint32_t samples_per_pair,
                                         std::uint64_t seed) {
    for (const PermutationPair& p : pairs) {
        if (index.bucket(p.first).empty() || index.bucket(p.second).empty()) {
            throw EmptyBucket("pair " + to_string(p) + " needs digits " +
                              std::to_string(p.first) + " and " + std::to_string(p.second) +
                              ", but the source has an empty bucket");
        }
    }

    PairDataset ds;
    ds.source_partition = source.partition;
    ds.pairs_covered = pairs;
    const std::size_t total = pairs.size() * std::size_t(samples_per_pair);
    ds.pixels.resize(total * PairDataset::kImageSize);
    ds.labels.resize(total);
    ds.pair_of.resize(total);
    ds.left_index.resize(total);
    ds.right_index.resize(total);

    std::size_t sample_id = 0;
    for (const PermutationPair& p : pairs) {
        Rng rng(stream_seed(seed, {std::uint64_t(p.code())}));
        const auto& left_bucket = index.bucket(p.first);
        const auto& right_bucket = index.bucket(p.second);
        for (std::uint32_t s = 0; s < samples_per_pair; ++s, ++sample_id) {
            const std::uint32_t r1 = left_bucket[rng.next_below(left_bucket.size())];
            const std::uint32_t r2 = right_bucket[rng.next_below(right_bucket.size())];
            concatenate_images(source.image(r1), source.image(r2),
                               {ds.pixels.data() + sample_id * PairDataset::kImageSize,
                                PairDataset::kImageSize});
            ds.labels[sample_id] = static_cast<std::uint8_t>(p.sum());
            ds.pair_of[sample_id] = p;
            ds.left_index[sample_id] = r1;
            ds.right_index[sample_id] = r2;
        }
    }
    return ds;
}

// --- on-disk layout ----------------------------------------------------------
//
// A dataset directory holds:
//   images.idx    IDX images, 28x56
//   labels.idx    IDX labels, values 0..18
//   manifest.tsv  sample_id  p1  p2  r1  r2  label
//   meta.json     seed, samples_per_pair, fold, partition, counts
// Re-importing the directory reproduces the in-memory dataset exactly.

struct ExportManifest {
    std::filesystem::path images_path;
    std::filesystem::path labels_path;
    std::filesystem::path manifest_path;
    std::filesystem::path meta_path;
    std::size_t sample_count = 0;
};

struct ExportMeta {
    std::uint64_t seed = 0;
    std::uint32_t samples_per_pair = 0;
    int fold = -1;  // -1 when the dataset is not tied to a fold
    Partition partition = Partition::Train;
};

inline ExportManifest export_dataset(const PairDataset& ds,
                                     const std::filesystem::path& dir,
                                     const ExportMeta& meta) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) {
        throw IoError("cannot create " + dir.string() + ": " + ec.message());
    }

    ExportManifest out;
    out.sample_count = ds.size();
    out.images_path = dir / "images.idx";
    out.labels_path = dir / "labels.idx";
    out.manifest_path = dir / "manifest.tsv";
    out.meta_path = dir / "meta.json";

    idx::Images images;
    images.count = static_cast<std::uint32_t>(ds.size());
    images.rows = PairDataset::kRows;
    images.cols = PairDataset::kCols;
    images.pixels = ds.pixels;
    idx::write_file(out.images_path, idx::serialize_images(images));
    idx::write_file(out.labels_path, idx::serialize_labels(ds.labels));

    {
        std::ofstream f(out.manifest_path, std::ios::trunc);
        if (!f) throw IoError("cannot open " + out.manifest_path.string());
        f << "sample_id\tp1\tp2\tr1\tr2\tlabel\n";
        for (std::size_t i = 0; i < ds.size(); ++i) {
            f << i << '\t' << int(ds.pair_of[i].first) << '\t' << int(ds.pair_of[i].second)
              << '\t' << ds.left_index[i] << '\t' << ds.right_index[i] << '\t'
              << int(ds.labels[i]) << '\n';
        }
        if (!f) throw IoError("short write to " + out.manifest_path.string());
    }
    {
        std::ofstream f(out.meta_path, std::ios::trunc);
        if (!f) throw IoError("cannot open " + out.meta_path.string());
        f << "{\n"
          << "  \"seed\": " << meta.seed << ",\n"
          << "  \"samples_per_pair\": " << meta.samples_per_pair << ",\n"
          << "  \"fold\": " << meta.fold << ",\n"
          << "  \"partition\": \"" << to_string(meta.partition) << "\",\n"
          << "  \"sample_count\": " << ds.size() << ",\n"
          << "  \"pair_count\": " << ds.pairs_covered.size() << "\n"
          << "}\n";
        if (!f) throw IoError("short write to " + out.meta_path.string());
    }
    return out;
}

namespace detail {

inline Partition parse_partition(const std::string& s) {
    if (s == "train") return Partition::Train;
    if (s == "test") return Partition::Test;
    throw IoError("unknown partition '" + s + "'");
}

}  // namespace detail

inline PairDataset import_dataset(const std::filesystem::path& dir) {
    idx::Images images =
        idx::parse_images(idx::read_file(dir / "images.idx"), PairDataset::kRows,
                          PairDataset::kCols);
    std::vector<std::uint8_t> labels =
        idx::parse_labels(idx::read_file(dir / "labels.idx"), 18);
    if (images.count != labels.size()) {
        throw CountMismatch(dir.string() + ": " + std::to_string(images.count) +
                            " images vs " + std::to_string(labels.size()) + " labels");
    }

    PairDataset ds;
    ds.pixels = std::move(images.pixels);
    ds.labels = std::move(labels);
    ds.pair_of.resize(ds.labels.size());
    ds.left_index.resize(ds.labels.size());
    ds.right_index.resize(ds.labels.size());

    std::ifstream f(dir / "manifest.tsv");
    if (!f) throw IoError("cannot open " + (dir / "manifest.tsv").string());
    std::string line;
    std::getline(f, line);  // header
    std::size_t rows = 0;
    while (std::getline(f, line)) {
        if (line.empty()) continue;
        std::istringstream ss(line);
        std::size_t id;
        int p1, p2, label;
        std::uint32_t r1, r2;
        if (!(ss >> id >> p1 >> p2 >> r1 >> r2 >> label) || id >= ds.size()) {
            throw IoError("bad manifest line: " + line);
        }
        ds.pair_of[id] = {std::uint8_t(p1), std::uint8_t(p2)};
        ds.left_index[id] = r1;
        ds.right_index[id] = r2;
        if (label != ds.labels[id]) {
            throw CountMismatch("manifest label disagrees with labels.idx at sample " +
                                std::to_string(id));
        }
        ++rows;
    }
    if (rows != ds.size()) {
        throw CountMismatch(dir.string() + ": manifest has " + std::to_string(rows) +
                            " rows for " + std::to_string(ds.size()) + " samples");
    }

    // pairs_covered: unique pairs in first-appearance order.
    std::vector<bool> seen(100, false);
    for (const PermutationPair& p : ds.pair_of) {
        if (!seen[p.code()]) {
            seen[p.code()] = true;
            ds.pairs_covered.push_back(p);
        }
    }

    // meta.json: only the partition matters for reconstruction.
    std::ifstream mf(dir / "meta.json");
    if (mf) {
        std::string meta((std::istreambuf_iterator<char>(mf)),
                         std::istreambuf_iterator<char>());
        if (meta.find("\"partition\": \"test\"") != std::string::npos) {
            ds.source_partition = Partition::Test;
        } else {
            ds.source_partition = Partition::Train;
        }
    }
    return ds;
}

}  // namespace digitsum

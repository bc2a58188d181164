#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <array>
#include <filesystem>
#include <fstream>
#include <set>

#include "digitsum/generate.hpp"
#include "digitsum/rng.hpp"

using namespace digitsum;
namespace fs = std::filesystem;

namespace {

// Synthetic source digits: several images per digit, each filled with a
// distinct byte pattern so provenance mix-ups are visible.
MnistDataset synthetic_source(Partition part, std::size_t per_digit = 5) {
    MnistDataset ds;
    ds.partition = part;
    const std::size_t n = 10 * per_digit;
    ds.labels.resize(n);
    ds.pixels.resize(n * MnistDataset::kImageSize);
    for (std::size_t i = 0; i < n; ++i) {
        ds.labels[i] = std::uint8_t(i % 10);
        for (std::size_t px = 0; px < MnistDataset::kImageSize; ++px) {
            ds.pixels[i * MnistDataset::kImageSize + px] =
                std::uint8_t((i * 37 + px * 11 + (part == Partition::Test ? 128 : 0)) & 0xFF);
        }
    }
    return ds;
}

}  // namespace

TEST_CASE("concatenation places halves untouched") {
    std::vector<std::uint8_t> left(784), right(784);
    for (std::size_t i = 0; i < 784; ++i) {
        left[i] = std::uint8_t(i & 0xFF);
        right[i] = std::uint8_t((255 - i) & 0xFF);
    }
    const auto out = concatenate_images(left, right);
    REQUIRE(out.size() == 28 * 56);
    for (std::size_t row = 0; row < 28; ++row) {
        for (std::size_t col = 0; col < 28; ++col) {
            CHECK(out[row * 56 + col] == left[row * 28 + col]);
            CHECK(out[row * 56 + 28 + col] == right[row * 28 + col]);
        }
    }
}

TEST_CASE("concatenating zeros yields zeros") {
    const std::vector<std::uint8_t> zero(784, 0);
    const auto out = concatenate_images(zero, zero);
    CHECK(std::all_of(out.begin(), out.end(), [](std::uint8_t b) { return b == 0; }));
}

TEST_CASE("argument order matters whenever the halves differ") {
    const MnistDataset src = synthetic_source(Partition::Train);
    Rng rng(99);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t a = rng.next_below(src.size());
        const std::size_t b = rng.next_below(src.size());
        const auto ab = concatenate_images(src.image(a), src.image(b));
        const auto ba = concatenate_images(src.image(b), src.image(a));
        const bool same_source = std::equal(src.image(a).begin(), src.image(a).end(),
                                            src.image(b).begin());
        if (same_source) {
            CHECK(ab == ba);
        } else {
            CHECK(ab != ba);
        }
    }
}

TEST_CASE("generation follows the sampling procedure") {
    const MnistDataset src = synthetic_source(Partition::Train);
    const LabelIndex index = build_label_index(src);
    const std::vector<PermutationPair> pairs = {{0, 0}, {2, 7}, {9, 9}, {7, 2}};
    const std::uint32_t m = 50;

    const PairDataset ds = generate_pair_dataset(pairs, src, index, m, 4242);
    REQUIRE(ds.size() == pairs.size() * m);
    REQUIRE(ds.pairs_covered == pairs);
    CHECK(ds.source_partition == Partition::Train);

    // Brute-force oracle: re-read both provenance indices from the source and
    // check the label and both image halves, for every sample.
    for (std::size_t i = 0; i < ds.size(); ++i) {
        const auto s = ds.sample(i);
        REQUIRE(s.label == src.label(s.left_index) + src.label(s.right_index));
        REQUIRE(s.label == s.pair.sum());
        REQUIRE(src.label(s.left_index) == s.pair.first);
        REQUIRE(src.label(s.right_index) == s.pair.second);
        const auto expect = concatenate_images(src.image(s.left_index),
                                               src.image(s.right_index));
        REQUIRE(std::equal(expect.begin(), expect.end(), s.image.begin()));
    }

    // Each pair contributes exactly m samples.
    for (const auto& p : pairs) {
        const std::size_t n = std::count(ds.pair_of.begin(), ds.pair_of.end(), p);
        CHECK(n == m);
    }

    // (9,9) samples carry label 18.
    for (std::size_t i = 0; i < ds.size(); ++i) {
        if (ds.pair_of[i] == PermutationPair{9, 9}) CHECK(ds.labels[i] == 18);
    }
}

TEST_CASE("generation is deterministic and order-independent per pair") {
    const MnistDataset src = synthetic_source(Partition::Train);
    const LabelIndex index = build_label_index(src);
    const std::vector<PermutationPair> fwd = {{1, 2}, {3, 4}, {5, 6}};
    const std::vector<PermutationPair> rev = {{5, 6}, {3, 4}, {1, 2}};

    const PairDataset a = generate_pair_dataset(fwd, src, index, 20, 7);
    const PairDataset b = generate_pair_dataset(fwd, src, index, 20, 7);
    REQUIRE(a.pixels == b.pixels);
    REQUIRE(a.labels == b.labels);
    REQUIRE(a.left_index == b.left_index);
    REQUIRE(a.right_index == b.right_index);

    // Same pair, same seed -> same draws regardless of position in the list.
    const PairDataset c = generate_pair_dataset(rev, src, index, 20, 7);
    for (const auto& p : fwd) {
        std::vector<std::uint32_t> lefts_a, lefts_c;
        for (std::size_t i = 0; i < a.size(); ++i) {
            if (a.pair_of[i] == p) lefts_a.push_back(a.left_index[i]);
        }
        for (std::size_t i = 0; i < c.size(); ++i) {
            if (c.pair_of[i] == p) lefts_c.push_back(c.left_index[i]);
        }
        CHECK(lefts_a == lefts_c);
    }

    const PairDataset d = generate_pair_dataset(fwd, src, index, 20, 8);
    CHECK(a.left_index != d.left_index);
}

TEST_CASE("sampling is with replacement") {
    // One image per digit forces every draw to repeat it; this must succeed.
    const MnistDataset src = synthetic_source(Partition::Train, 1);
    const LabelIndex index = build_label_index(src);
    const PairDataset ds = generate_pair_dataset({{4, 4}}, src, index, 10, 1);
    REQUIRE(ds.size() == 10);
    for (std::size_t i = 0; i < ds.size(); ++i) {
        CHECK(ds.left_index[i] == ds.right_index[i]);  // only one 4 exists
    }
}

TEST_CASE("empty buckets are rejected") {
    MnistDataset src = synthetic_source(Partition::Train);
    // Remove every 3 from the dataset.
    MnistDataset filtered;
    filtered.partition = src.partition;
    for (std::size_t i = 0; i < src.size(); ++i) {
        if (src.labels[i] == 3) continue;
        filtered.labels.push_back(src.labels[i]);
        const auto img = src.image(i);
        filtered.pixels.insert(filtered.pixels.end(), img.begin(), img.end());
    }
    const LabelIndex index = build_label_index(filtered);
    CHECK_THROWS_AS(generate_pair_dataset({{3, 1}}, filtered, index, 5, 1), EmptyBucket);
    CHECK_THROWS_AS(generate_pair_dataset({{1, 3}}, filtered, index, 5, 1), EmptyBucket);
    CHECK_NOTHROW(generate_pair_dataset({{1, 2}}, filtered, index, 5, 1));
}

TEST_CASE("export/import round-trips a dataset exactly") {
    const MnistDataset src = synthetic_source(Partition::Test);
    const LabelIndex index = build_label_index(src);
    std::vector<PermutationPair> pairs;
    for (std::uint8_t i = 0; i < 10; ++i) pairs.push_back({i, std::uint8_t(9 - i)});

    const PairDataset ds = generate_pair_dataset(pairs, src, index, 3, 55);
    const fs::path dir = fs::temp_directory_path() / "digitsum_export_test";
    fs::remove_all(dir);

    ExportMeta meta;
    meta.seed = 55;
    meta.samples_per_pair = 3;
    meta.fold = 2;
    meta.partition = Partition::Test;
    const ExportManifest manifest = export_dataset(ds, dir, meta);
    CHECK(manifest.sample_count == 30);

    // Manifest line count == sample count (+1 header).
    std::ifstream mf(manifest.manifest_path);
    std::size_t lines = 0;
    std::string line;
    while (std::getline(mf, line)) ++lines;
    CHECK(lines == ds.size() + 1);

    const PairDataset back = import_dataset(dir);
    CHECK(back.pixels == ds.pixels);
    CHECK(back.labels == ds.labels);
    CHECK(back.pair_of == ds.pair_of);
    CHECK(back.left_index == ds.left_index);
    CHECK(back.right_index == ds.right_index);
    CHECK(back.pairs_covered == ds.pairs_covered);
    CHECK(back.source_partition == Partition::Test);

    // Exported label bytes match the in-memory histogram.
    std::array<std::size_t, 19> mem{}, file{};
    for (std::uint8_t l : ds.labels) ++mem[l];
    const auto lbytes = idx::parse_labels(idx::read_file(dir / "labels.idx"), 18);
    for (std::uint8_t l : lbytes) ++file[l];
    CHECK(mem == file);

    // Re-exporting with the same inputs writes byte-identical files.
    const fs::path dir2 = fs::temp_directory_path() / "digitsum_export_test2";
    fs::remove_all(dir2);
    export_dataset(ds, dir2, meta);
    for (const char* name : {"images.idx", "labels.idx", "manifest.tsv", "meta.json"}) {
        CHECK(idx::read_file(dir / name) == idx::read_file(dir2 / name));
    }
    fs::remove_all(dir);
    fs::remove_all(dir2);
}

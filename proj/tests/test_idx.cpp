#include <catch2/catch_amalgamated.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <vector>

#include "digitsum/idx.hpp"

using namespace digitsum;

namespace {

// Independent byte-level builders: expected files are assembled by hand here,
// never via the library's serializers.
std::vector<std::uint8_t> be32(std::uint32_t v) {
    return {std::uint8_t(v >> 24), std::uint8_t(v >> 16), std::uint8_t(v >> 8),
            std::uint8_t(v)};
}

std::vector<std::uint8_t> cat(std::initializer_list<std::vector<std::uint8_t>> parts) {
    std::vector<std::uint8_t> out;
    for (const auto& p : parts) out.insert(out.end(), p.begin(), p.end());
    return out;
}

std::vector<std::uint8_t> image_file(std::uint32_t count, std::uint32_t rows,
                                     std::uint32_t cols,
                                     const std::vector<std::uint8_t>& pixels) {
    return cat({be32(0x00000803), be32(count), be32(rows), be32(cols), pixels});
}

std::vector<std::uint8_t> label_file(const std::vector<std::uint8_t>& labels) {
    return cat({be32(0x00000801), be32(std::uint32_t(labels.size())), labels});
}

}  // namespace

TEST_CASE("hand-built two-image file parses byte-identically") {
    std::vector<std::uint8_t> pixels(2 * 4 * 4);
    for (std::size_t i = 0; i < pixels.size(); ++i) pixels[i] = std::uint8_t(i * 7 + 3);
    const auto bytes = image_file(2, 4, 4, pixels);

    const idx::Images parsed = idx::parse_images(bytes, 4, 4);
    REQUIRE(parsed.count == 2);
    REQUIRE(parsed.rows == 4);
    REQUIRE(parsed.cols == 4);
    REQUIRE(parsed.pixels == pixels);
}

TEST_CASE("zero-count image file yields an empty array") {
    const auto bytes = image_file(0, 28, 28, {});
    const idx::Images parsed = idx::parse_images(bytes);
    CHECK(parsed.count == 0);
    CHECK(parsed.pixels.empty());
}

TEST_CASE("zero-count label file yields an empty array") {
    const auto bytes = label_file({});
    CHECK(idx::parse_labels(bytes).empty());
}

TEST_CASE("hand-built label file round-trips values") {
    const auto bytes = label_file({7, 2, 1});
    const auto labels = idx::parse_labels(bytes);
    REQUIRE(labels == std::vector<std::uint8_t>{7, 2, 1});
}

TEST_CASE("bad magic is rejected") {
    auto bytes = image_file(1, 28, 28, std::vector<std::uint8_t>(784, 0));
    bytes[3] = 0x01;  // label magic in an image file
    CHECK_THROWS_AS(idx::parse_images(bytes), BadMagic);

    auto lbytes = label_file({1});
    lbytes[3] = 0x03;
    CHECK_THROWS_AS(idx::parse_labels(lbytes), BadMagic);
}

TEST_CASE("truncated payloads are rejected") {
    auto bytes = image_file(2, 28, 28, std::vector<std::uint8_t>(2 * 784, 5));
    bytes.resize(bytes.size() - 1);
    CHECK_THROWS_AS(idx::parse_images(bytes), TruncatedFile);

    auto lbytes = label_file({1, 2, 3});
    lbytes.resize(lbytes.size() - 2);
    CHECK_THROWS_AS(idx::parse_labels(lbytes), TruncatedFile);

    CHECK_THROWS_AS(idx::parse_images(std::vector<std::uint8_t>{0, 0}), TruncatedFile);
    CHECK_THROWS_AS(idx::parse_labels(std::vector<std::uint8_t>{0, 0, 8}), TruncatedFile);
}

TEST_CASE("unexpected geometry is rejected") {
    const auto bytes = image_file(1, 32, 32, std::vector<std::uint8_t>(1024, 0));
    CHECK_THROWS_AS(idx::parse_images(bytes), DimensionMismatch);
    CHECK_THROWS_AS(idx::parse_images(bytes, 28, 56), DimensionMismatch);
}

TEST_CASE("labels above the cap are rejected") {
    const auto bytes = label_file({3, 10});
    CHECK_THROWS_AS(idx::parse_labels(bytes), InvalidLabel);
    // The same bytes are fine when the cap is a pair-sum cap.
    CHECK(idx::parse_labels(bytes, 18).size() == 2);
    const auto bad = label_file({19});
    CHECK_THROWS_AS(idx::parse_labels(bad, 18), InvalidLabel);
}

TEST_CASE("serialize then parse is the identity") {
    idx::Images images;
    images.count = 3;
    images.rows = 28;
    images.cols = 28;
    images.pixels.resize(3 * 784);
    for (std::size_t i = 0; i < images.pixels.size(); ++i) {
        images.pixels[i] = std::uint8_t((i * 31) & 0xFF);
    }
    const auto bytes = idx::serialize_images(images);
    // Header matches the hand-built layout byte for byte.
    const auto expect = image_file(3, 28, 28, images.pixels);
    REQUIRE(bytes == expect);

    const idx::Images reparsed = idx::parse_images(bytes);
    CHECK(reparsed.pixels == images.pixels);

    const std::vector<std::uint8_t> labels = {0, 9, 4, 4};
    CHECK(idx::parse_labels(idx::serialize_labels(labels)) == labels);
}

TEST_CASE("gzipped files are read transparently") {
    namespace fs = std::filesystem;
    const auto pixels = std::vector<std::uint8_t>(784, 42);
    const auto bytes = image_file(1, 28, 28, pixels);

    const fs::path dir = fs::temp_directory_path() / "digitsum_idx_test";
    fs::create_directories(dir);
    const fs::path plain = dir / "plain.idx";
    const fs::path gz = dir / "file.idx.gz";
    idx::write_file(plain, bytes);
    {
        gzFile f = gzopen(gz.string().c_str(), "wb");
        REQUIRE(f != nullptr);
        gzwrite(f, bytes.data(), unsigned(bytes.size()));
        gzclose(f);
    }
    CHECK(idx::read_file(plain) == bytes);
    CHECK(idx::read_file(gz) == bytes);

    const idx::Images parsed = idx::parse_images(idx::read_file(gz));
    CHECK(parsed.pixels == pixels);
    fs::remove_all(dir);
}

TEST_CASE("missing file raises IoError") {
    CHECK_THROWS_AS(idx::read_file("/nonexistent/path/images.idx"), IoError);
}

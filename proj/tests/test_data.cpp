#include <doctest.h>

#include <zlib.h>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>

#include "qnas/data.hpp"
#include "qnas/errors.hpp"
#include "qnas/rng.hpp"

using namespace qnas;

namespace {

std::filesystem::path temp_file(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() / "qnas_data_tests";
    std::filesystem::create_directories(dir);
    return dir / name;
}

void write_bytes(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes) {
    std::ofstream out(path, std::ios::binary);
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
}

std::vector<std::uint8_t> idx_header(std::uint32_t magic, std::uint32_t count,
                                     std::uint32_t rows, std::uint32_t cols) {
    std::vector<std::uint8_t> bytes;
    for (std::uint32_t v : {magic, count, rows, cols}) {
        bytes.push_back(static_cast<std::uint8_t>(v >> 24));
        bytes.push_back(static_cast<std::uint8_t>(v >> 16));
        bytes.push_back(static_cast<std::uint8_t>(v >> 8));
        bytes.push_back(static_cast<std::uint8_t>(v));
    }
    return bytes;
}

std::vector<std::uint8_t> gzip_bytes(const std::vector<std::uint8_t>& raw) {
    z_stream zs{};
    REQUIRE(deflateInit2(&zs, Z_DEFAULT_COMPRESSION, Z_DEFLATED, 15 + 16, 8,
                         Z_DEFAULT_STRATEGY) == Z_OK);
    std::vector<std::uint8_t> out(raw.size() + 1024);
    zs.next_in = const_cast<std::uint8_t*>(raw.data());
    zs.avail_in = static_cast<uInt>(raw.size());
    zs.next_out = out.data();
    zs.avail_out = static_cast<uInt>(out.size());
    REQUIRE(deflate(&zs, Z_FINISH) == Z_STREAM_END);
    out.resize(out.size() - zs.avail_out);
    deflateEnd(&zs);
    return out;
}

}  // namespace

TEST_CASE("a two-image IDX file parses into normalized rows") {
    auto bytes = idx_header(0x00000803, 2, 28, 28);
    for (int i = 0; i < 2 * kImagePixels; ++i)
        bytes.push_back(static_cast<std::uint8_t>(i % 256));
    const auto path = temp_file("two_images.idx");
    write_bytes(path, bytes);

    const auto dataset = load_idx_images(path.string());
    CHECK(dataset.count == 2);
    CHECK(dataset.pixels.size() == 2 * kImagePixels);
    CHECK(dataset.row(0)[0] == 0.0);
    CHECK(dataset.row(0)[255] == 1.0);
    for (double p : dataset.pixels) {
        CHECK(p >= 0.0);
        CHECK(p <= 1.0);
    }
}

TEST_CASE("label-file magic is rejected with expected/found values") {
    auto bytes = idx_header(0x00000801, 2, 28, 28);
    bytes.resize(bytes.size() + 2 * kImagePixels, 0);
    const auto path = temp_file("labels.idx");
    write_bytes(path, bytes);
    try {
        load_idx_images(path.string());
        FAIL("expected FormatError");
    } catch (const FormatError& e) {
        const std::string what = e.what();
        CHECK(what.find("expected image magic") != std::string::npos);
        CHECK(what.find("0x00000803") != std::string::npos);
        CHECK(what.find("0x00000801") != std::string::npos);
    }
}

TEST_CASE("truncated payloads report byte offsets") {
    auto bytes = idx_header(0x00000803, 2, 28, 28);
    bytes.resize(bytes.size() + kImagePixels, 0);  // one image short
    const auto path = temp_file("truncated.idx");
    write_bytes(path, bytes);
    try {
        load_idx_images(path.string());
        FAIL("expected FormatError");
    } catch (const FormatError& e) {
        const std::string what = e.what();
        CHECK(what.find(std::to_string(16 + kImagePixels)) != std::string::npos);
        CHECK(what.find(std::to_string(16 + 2 * kImagePixels)) != std::string::npos);
    }
}

TEST_CASE("all-zero pixel bytes load as all-zero images") {
    auto bytes = idx_header(0x00000803, 1, 28, 28);
    bytes.resize(bytes.size() + kImagePixels, 0);
    const auto path = temp_file("zeros.idx");
    write_bytes(path, bytes);
    const auto dataset = load_idx_images(path.string());
    for (double p : dataset.pixels) CHECK(p == 0.0);
}

TEST_CASE("gzip-compressed IDX files are detected and decompressed") {
    auto bytes = idx_header(0x00000803, 3, 28, 28);
    Rng rng(55);
    for (int i = 0; i < 3 * kImagePixels; ++i)
        bytes.push_back(static_cast<std::uint8_t>(rng.uniform_int(256)));
    const auto plain = temp_file("plain.idx");
    const auto zipped = temp_file("zipped.idx.gz");
    write_bytes(plain, bytes);
    write_bytes(zipped, gzip_bytes(bytes));

    const auto a = load_idx_images(plain.string());
    const auto b = load_idx_images(zipped.string());
    CHECK(a.pixels == b.pixels);
}

TEST_CASE("IDX round-trip reproduces the array exactly") {
    Rng rng(61);
    ImageDataset dataset;
    dataset.count = 5;
    dataset.pixels.resize(5 * kImagePixels);
    for (auto& p : dataset.pixels) p = static_cast<double>(rng.uniform_int(256)) / 255.0;

    const auto path = temp_file("roundtrip.idx");
    write_bytes(path, encode_idx_images(dataset));
    const auto back = load_idx_images(path.string());
    CHECK(back.count == dataset.count);
    CHECK(back.pixels == dataset.pixels);
}

TEST_CASE("missing files raise a format error") {
    CHECK_THROWS_AS(load_idx_images("/nonexistent/nowhere.idx"), FormatError);
}

namespace {

ImageDataset synthetic_dataset(std::size_t count, std::uint64_t seed) {
    ImageDataset dataset;
    dataset.count = count;
    dataset.pixels.resize(count * kImagePixels);
    Rng rng(seed);
    for (auto& p : dataset.pixels) p = rng.uniform();
    return dataset;
}

}  // namespace

TEST_CASE("split slices ten samples into 8/1/1") {
    const auto dataset = synthetic_dataset(10, 101);
    SplitSpec spec;
    spec.train_fraction = 0.8;
    spec.val_fraction = 0.1;
    spec.test_fraction = 0.1;
    const auto splits = split(dataset, spec);
    CHECK(splits.train.size() == 8);
    CHECK(splits.val.size() == 1);
    CHECK(splits.test.size() == 1);
}

TEST_CASE("split is deterministic and partitions the index set") {
    const auto dataset = synthetic_dataset(97, 102);
    SplitSpec spec;
    spec.train_fraction = 0.7;
    spec.val_fraction = 0.2;
    spec.test_fraction = 0.1;
    spec.shuffle_seed = 33;
    const auto a = split(dataset, spec);
    const auto b = split(dataset, spec);
    CHECK(a.train.indices == b.train.indices);
    CHECK(a.val.indices == b.val.indices);
    CHECK(a.test.indices == b.test.indices);

    std::set<std::size_t> seen;
    for (const auto* view : {&a.train, &a.val, &a.test})
        for (auto idx : view->indices) CHECK(seen.insert(idx).second);  // disjoint
    CHECK(seen.size() == dataset.count);  // exhaustive
}

TEST_CASE("split applies subset caps") {
    const auto dataset = synthetic_dataset(100, 103);
    SplitSpec spec;
    spec.train_fraction = 0.9;
    spec.val_fraction = 0.1;
    spec.test_fraction = 0.0;
    spec.train_cap = 20;
    spec.val_cap = 5;
    const auto splits = split(dataset, spec);
    CHECK(splits.train.size() == 20);
    CHECK(splits.val.size() == 5);
    CHECK(splits.test.size() == 0);
}

TEST_CASE("split rejects bad specs and degenerate outcomes") {
    const auto dataset = synthetic_dataset(10, 104);
    SplitSpec bad;
    bad.train_fraction = 0.8;
    bad.val_fraction = 0.1;
    bad.test_fraction = 0.0;
    CHECK_THROWS_AS(split(dataset, bad), ConfigError);  // sums to 0.9

    SplitSpec tiny;
    tiny.train_fraction = 0.97;
    tiny.val_fraction = 0.0;
    tiny.test_fraction = 0.03;  // rounds to zero test samples out of 10
    CHECK_THROWS_AS(split(dataset, tiny), ContractError);

    ImageDataset two;
    two.count = 2;
    two.pixels.resize(2 * kImagePixels, 0.0);
    SplitSpec spec;
    CHECK_THROWS_AS(split(two, spec), ContractError);
}

TEST_CASE("batches cover 2000 samples as 7x256 plus 208") {
    const auto out = batches(2000, 256, 9001);
    REQUIRE(out.size() == 8);
    for (std::size_t i = 0; i < 7; ++i) CHECK(out[i].size() == 256);
    CHECK(out[7].size() == 208);

    std::set<std::size_t> seen;
    for (const auto& batch : out)
        for (auto idx : batch) CHECK(seen.insert(idx).second);
    CHECK(seen.size() == 2000);
}

TEST_CASE("oversized batch size yields a single full batch") {
    const auto out = batches(10, 256, 1);
    REQUIRE(out.size() == 1);
    CHECK(out[0].size() == 10);
}

TEST_CASE("batch order is keyed by the epoch seed") {
    const auto a = batches(100, 16, 5);
    const auto b = batches(100, 16, 5);
    CHECK(a == b);
    const auto c = batches(100, 16, 6);
    CHECK(a != c);
}

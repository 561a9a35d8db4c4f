#include "qnas/data.hpp"

#include <zlib.h>

#include <cmath>
#include <cstdio>
#include <fstream>

#include "qnas/errors.hpp"
#include "qnas/rng.hpp"

namespace qnas {

namespace {

constexpr std::uint32_t kImageMagic = 0x00000803;

std::vector<std::uint8_t> read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot open \"" + path + "\"");
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::vector<std::uint8_t> gunzip(const std::vector<std::uint8_t>& raw, const std::string& path) {
    z_stream zs{};
    if (inflateInit2(&zs, 15 + 16) != Z_OK)  // +16: expect a gzip header
        throw FormatError("zlib init failed for \"" + path + "\"");
    std::vector<std::uint8_t> out;
    out.reserve(raw.size() * 4);
    std::uint8_t buffer[1 << 16];
    zs.next_in = const_cast<std::uint8_t*>(raw.data());
    zs.avail_in = static_cast<uInt>(raw.size());
    int rc = Z_OK;
    do {
        zs.next_out = buffer;
        zs.avail_out = sizeof(buffer);
        rc = inflate(&zs, Z_NO_FLUSH);
        if (rc != Z_OK && rc != Z_STREAM_END) {
            inflateEnd(&zs);
            throw FormatError("gzip decompression failed for \"" + path + "\" (zlib rc " +
                              std::to_string(rc) + ")");
        }
        out.insert(out.end(), buffer, buffer + (sizeof(buffer) - zs.avail_out));
    } while (rc != Z_STREAM_END);
    inflateEnd(&zs);
    return out;
}

std::uint32_t read_be32(const std::vector<std::uint8_t>& bytes, std::size_t offset) {
    return (std::uint32_t{bytes[offset]} << 24) | (std::uint32_t{bytes[offset + 1]} << 16) |
           (std::uint32_t{bytes[offset + 2]} << 8) | std::uint32_t{bytes[offset + 3]};
}

void write_be32(std::vector<std::uint8_t>& bytes, std::uint32_t value) {
    bytes.push_back(static_cast<std::uint8_t>(value >> 24));
    bytes.push_back(static_cast<std::uint8_t>(value >> 16));
    bytes.push_back(static_cast<std::uint8_t>(value >> 8));
    bytes.push_back(static_cast<std::uint8_t>(value));
}

std::string hex32(std::uint32_t v) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "0x%08x", v);
    return buf;
}

}  // namespace

ImageDataset load_idx_images(const std::string& path, DatasetTag tag) {
    std::vector<std::uint8_t> bytes = read_file(path);
    if (bytes.size() >= 2 && bytes[0] == 0x1f && bytes[1] == 0x8b) bytes = gunzip(bytes, path);

    if (bytes.size() < 16)
        throw FormatError("\"" + path + "\": truncated header, " + std::to_string(bytes.size()) +
                          " bytes but 16 needed");
    const std::uint32_t magic = read_be32(bytes, 0);
    if (magic != kImageMagic)
        throw FormatError("\"" + path + "\": expected image magic " + hex32(kImageMagic) +
                          ", found " + hex32(magic));
    const std::uint32_t count = read_be32(bytes, 4);
    const std::uint32_t rows = read_be32(bytes, 8);
    const std::uint32_t cols = read_be32(bytes, 12);
    if (rows != kImageRows || cols != kImageCols)
        throw FormatError("\"" + path + "\": expected 28x28 images, found " +
                          std::to_string(rows) + "x" + std::to_string(cols));
    const std::size_t expected = 16 + std::size_t{count} * kImagePixels;
    if (bytes.size() != expected)
        throw FormatError("\"" + path + "\": payload is " + std::to_string(bytes.size()) +
                          " bytes but the header requires " + std::to_string(expected) +
                          " (truncated at offset " + std::to_string(bytes.size()) + ")");

    ImageDataset dataset;
    dataset.source = tag;
    dataset.count = count;
    dataset.pixels.resize(std::size_t{count} * kImagePixels);
    for (std::size_t i = 0; i < dataset.pixels.size(); ++i)
        dataset.pixels[i] = static_cast<double>(bytes[16 + i]) / 255.0;
    return dataset;
}

std::vector<std::uint8_t> encode_idx_images(const ImageDataset& dataset) {
    std::vector<std::uint8_t> bytes;
    bytes.reserve(16 + dataset.pixels.size());
    write_be32(bytes, kImageMagic);
    write_be32(bytes, static_cast<std::uint32_t>(dataset.count));
    write_be32(bytes, kImageRows);
    write_be32(bytes, kImageCols);
    for (double p : dataset.pixels)
        bytes.push_back(static_cast<std::uint8_t>(std::lround(p * 255.0)));
    return bytes;
}

void validate_split_spec(const SplitSpec& spec) {
    if (spec.train_fraction < 0 || spec.val_fraction < 0 || spec.test_fraction < 0)
        throw ConfigError("split: fractions must be non-negative");
    const double sum = spec.train_fraction + spec.val_fraction + spec.test_fraction;
    if (std::abs(sum - 1.0) > 1e-9)
        throw ConfigError("split: fractions must sum to 1, got " + std::to_string(sum));
}

DatasetSplits split(const ImageDataset& dataset, const SplitSpec& spec) {
    validate_split_spec(spec);
    if (dataset.count < 3) throw ContractError("split: need at least 3 samples");

    std::vector<std::size_t> order(dataset.count);
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    Rng rng(spec.shuffle_seed);
    for (std::size_t i = order.size(); i > 1; --i)
        std::swap(order[i - 1], order[static_cast<std::size_t>(rng.uniform_int(static_cast<int>(i)))]);

    const auto n = static_cast<double>(dataset.count);
    std::size_t n_train = static_cast<std::size_t>(std::llround(spec.train_fraction * n));
    std::size_t n_val = static_cast<std::size_t>(std::llround(spec.val_fraction * n));
    n_train = std::min(n_train, dataset.count);
    n_val = std::min(n_val, dataset.count - n_train);
    const std::size_t n_test = dataset.count - n_train - n_val;

    auto take = [&](std::size_t offset, std::size_t len, std::size_t cap) {
        DatasetView view;
        view.dataset = &dataset;
        if (cap != 0) len = std::min(len, cap);
        view.indices.assign(order.begin() + static_cast<std::ptrdiff_t>(offset),
                            order.begin() + static_cast<std::ptrdiff_t>(offset + len));
        return view;
    };
    DatasetSplits splits;
    splits.train = take(0, n_train, spec.train_cap);
    splits.val = take(n_train, n_val, spec.val_cap);
    splits.test = take(n_train + n_val, n_test, spec.test_cap);

    if (spec.train_fraction > 0 && splits.train.size() == 0)
        throw ContractError("split: train fraction is nonzero but the split is empty");
    if (spec.val_fraction > 0 && splits.val.size() == 0)
        throw ContractError("split: val fraction is nonzero but the split is empty");
    if (spec.test_fraction > 0 && splits.test.size() == 0)
        throw ContractError("split: test fraction is nonzero but the split is empty");
    return splits;
}

std::vector<std::vector<std::size_t>> batches(std::size_t split_size, std::size_t batch_size,
                                              std::uint64_t epoch_seed) {
    if (batch_size < 1) throw ContractError("batches: batch_size must be >= 1");
    std::vector<std::size_t> order(split_size);
    for (std::size_t i = 0; i < split_size; ++i) order[i] = i;
    Rng rng(epoch_seed);
    for (std::size_t i = order.size(); i > 1; --i)
        std::swap(order[i - 1], order[static_cast<std::size_t>(rng.uniform_int(static_cast<int>(i)))]);

    std::vector<std::vector<std::size_t>> out;
    for (std::size_t start = 0; start < split_size; start += batch_size) {
        const std::size_t end = std::min(start + batch_size, split_size);
        out.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(start),
                         order.begin() + static_cast<std::ptrdiff_t>(end));
    }
    return out;
}

}  // namespace qnas

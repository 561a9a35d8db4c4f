#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace qnas {

enum class DatasetTag { Mnist, FashionMnist };

constexpr int kImageRows = 28;
constexpr int kImageCols = 28;
constexpr int kImagePixels = kImageRows * kImageCols;

// N x 784 pixel rows in [0, 1], stored flat.
struct ImageDataset {
    DatasetTag source = DatasetTag::Mnist;
    std::size_t count = 0;
    std::vector<double> pixels;

    std::span<const double> row(std::size_t i) const {
        return {pixels.data() + i * kImagePixels, kImagePixels};
    }
};

// Parses an IDX3-ubyte image file (optionally gzip-compressed, detected by
// the 0x1f 0x8b magic): big-endian magic 0x00000803, count, rows=28, cols=28,
// then count*784 unsigned bytes scaled into [0, 1].
ImageDataset load_idx_images(const std::string& path, DatasetTag tag = DatasetTag::Mnist);

// Serialization counterpart used by tests and tooling.
std::vector<std::uint8_t> encode_idx_images(const ImageDataset& dataset);

struct SplitSpec {
    double train_fraction = 0.9;
    double val_fraction = 0.1;
    double test_fraction = 0.0;
    std::uint64_t shuffle_seed = 7;
    // 0 means uncapped.
    std::size_t train_cap = 0;
    std::size_t val_cap = 0;
    std::size_t test_cap = 0;
};

void validate_split_spec(const SplitSpec& spec);

// Read-only view of selected rows of a dataset. The dataset must outlive it.
struct DatasetView {
    const ImageDataset* dataset = nullptr;
    std::vector<std::size_t> indices;

    std::size_t size() const { return indices.size(); }
    std::span<const double> row(std::size_t i) const { return dataset->row(indices[i]); }
};

struct DatasetSplits {
    DatasetView train, val, test;
};

// Deterministic shuffle keyed by shuffle_seed, contiguous slicing by the
// fractions, then subset caps. Throws ContractError when a nonzero fraction
// produced an empty split.
DatasetSplits split(const ImageDataset& dataset, const SplitSpec& spec);

// Per-epoch deterministic reshuffle keyed by epoch_seed; the final partial
// batch is retained. Batches index into the view (0..view.size()).
std::vector<std::vector<std::size_t>> batches(std::size_t split_size, std::size_t batch_size,
                                              std::uint64_t epoch_seed);

}  // namespace qnas

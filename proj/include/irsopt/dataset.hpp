// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "irsopt/channel.hpp"
#include "irsopt/features.hpp"

namespace irsopt {

// On-disk layout (little-endian, packed):
//   "IWDS" | version u32 | M u32 | N u32 | interference u8 | count u64 |
//   seed u64 | PRNG id u32 | count * F_s IEEE-754 binary64
inline constexpr char kDatasetMagic[4] = {'I', 'W', 'D', 'S'};
inline constexpr std::uint32_t kDatasetVersion = 1;
inline constexpr std::size_t kDatasetHeaderSize = 37;

struct DatasetHeader {
    std::uint32_t version = kDatasetVersion;
    std::uint32_t m = 0;
    std::uint32_t n = 0;
    bool interference = false;
    std::uint64_t count = 0;
    std::uint64_t seed = 0;
    std::uint32_t prng_id = Rng::kAlgorithmId;
};

/// A set of flat feature vectors stored row-major (count x F_s).
class Dataset {
public:
    Dataset() = default;
    Dataset(DatasetHeader header, std::vector<double> values);

    const DatasetHeader& header() const { return header_; }
    std::size_t size() const { return static_cast<std::size_t>(header_.count); }
    std::size_t feature_length() const { return feature_length_; }

    std::span<const double> row(std::size_t i) const;
    FeatureVector feature(std::size_t i) const;
    std::vector<FeatureVector> features() const;
    const std::vector<double>& values() const { return values_; }

    /// Rows [first, first + count) as a count x F_s matrix.
    Eigen::MatrixXd matrix(std::size_t first, std::size_t count) const;
    Eigen::MatrixXd matrix() const { return matrix(0, size()); }

    bool matches(std::size_t m, std::size_t n, bool interference) const;

private:
    DatasetHeader header_;
    std::size_t feature_length_ = 0;
    std::vector<double> values_;
};

/// Sample i is drawn from Rng(derive_seed(seed, i)), so any prefix or single
/// sample is reproducible on its own.
Dataset generate_dataset(const SystemParams& params, std::size_t count, std::uint64_t seed);

std::vector<std::uint8_t> serialize_dataset(const Dataset& ds);
Dataset deserialize_dataset(std::span<const std::uint8_t> bytes);

/// Throws IoError (with the path) on any filesystem failure and ParseError on
/// a malformed file.
void write_dataset(const std::filesystem::path& path, const Dataset& ds);
Dataset read_dataset(const std::filesystem::path& path);

/// FNV-1a 64 of the serialized dataset; used to tie reports to a test set.
std::uint64_t dataset_hash(const Dataset& ds);

} // namespace irsopt

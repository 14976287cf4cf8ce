// SPDX-License-Identifier: Apache-2.0
#include "irsopt/dataset.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include "irsopt/errors.hpp"

namespace irsopt {

Dataset::Dataset(DatasetHeader header, std::vector<double> values)
    : header_(header), feature_length_(irsopt::feature_length(header.m, header.n, header.interference)), values_(std::move(values))
{
    if (header_.m < 1 || header_.n < 1)
        throw ContractViolation("Dataset: M and N must be >= 1");
    if (values_.size() != feature_length_ * header_.count)
        throw ContractViolation("Dataset: value count does not match header");
}

std::span<const double> Dataset::row(std::size_t i) const
{
    if (i >= size())
        throw ContractViolation("Dataset::row: index out of range");
    return std::span<const double>(values_).subspan(i * feature_length_, feature_length_);
}

FeatureVector Dataset::feature(std::size_t i) const
{
    return FeatureVector::unflatten(row(i), header_.m, header_.n, header_.interference);
}

std::vector<FeatureVector> Dataset::features() const
{
    std::vector<FeatureVector> out;
    out.reserve(size());
    for (std::size_t i = 0; i < size(); ++i)
        out.push_back(feature(i));
    return out;
}

Eigen::MatrixXd Dataset::matrix(std::size_t first, std::size_t count) const
{
    if (first + count > size())
        throw ContractViolation("Dataset::matrix: range out of bounds");
    using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
    return Eigen::Map<const RowMajor>(values_.data() + first * feature_length_, static_cast<Eigen::Index>(count),
                                      static_cast<Eigen::Index>(feature_length_));
}

bool Dataset::matches(std::size_t m, std::size_t n, bool interference) const
{
    return header_.m == m && header_.n == n && header_.interference == interference;
}

Dataset generate_dataset(const SystemParams& params, std::size_t count, std::uint64_t seed)
{
    params.validate();
    if (count < 1)
        throw ContractViolation("generate_dataset: count must be >= 1");
    const bool interference = params.interference();
    const std::size_t fs = feature_length(params.m, params.n, interference);
    std::vector<double> values(count * fs);
    for (std::size_t i = 0; i < count; ++i) {
        Rng rng(derive_seed(seed, i));
        const auto f = build_features(sample_channels(params, rng), interference);
        f.flatten_into(std::span<double>(values).subspan(i * fs, fs));
    }
    DatasetHeader h;
    h.m = static_cast<std::uint32_t>(params.m);
    h.n = static_cast<std::uint32_t>(params.n);
    h.interference = interference;
    h.count = count;
    h.seed = seed;
    return Dataset(h, std::move(values));
}

namespace {

template <typename T>
void put_le(std::vector<std::uint8_t>& out, T value)
{
    for (std::size_t i = 0; i < sizeof(T); ++i)
        out.push_back(static_cast<std::uint8_t>(static_cast<std::uint64_t>(value) >> (8 * i)));
}

template <typename T>
T get_le(std::span<const std::uint8_t> in, std::size_t& pos)
{
    if (pos + sizeof(T) > in.size())
        throw ParseError("dataset: truncated input");
    std::uint64_t v = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i)
        v |= static_cast<std::uint64_t>(in[pos + i]) << (8 * i);
    pos += sizeof(T);
    return static_cast<T>(v);
}

} // namespace

std::vector<std::uint8_t> serialize_dataset(const Dataset& ds)
{
    const auto& h = ds.header();
    std::vector<std::uint8_t> out;
    out.reserve(kDatasetHeaderSize + 8 * ds.values().size());
    out.insert(out.end(), std::begin(kDatasetMagic), std::end(kDatasetMagic));
    put_le<std::uint32_t>(out, h.version);
    put_le<std::uint32_t>(out, h.m);
    put_le<std::uint32_t>(out, h.n);
    put_le<std::uint8_t>(out, h.interference ? 1 : 0);
    put_le<std::uint64_t>(out, h.count);
    put_le<std::uint64_t>(out, h.seed);
    put_le<std::uint32_t>(out, h.prng_id);
    for (double v : ds.values())
        put_le<std::uint64_t>(out, std::bit_cast<std::uint64_t>(v));
    return out;
}

Dataset deserialize_dataset(std::span<const std::uint8_t> bytes)
{
    if (bytes.size() < kDatasetHeaderSize || std::memcmp(bytes.data(), kDatasetMagic, 4) != 0)
        throw ParseError("dataset: missing IWDS magic");
    std::size_t pos = 4;
    DatasetHeader h;
    h.version = get_le<std::uint32_t>(bytes, pos);
    if (h.version != kDatasetVersion)
        throw ParseError("dataset: unsupported version " + std::to_string(h.version));
    h.m = get_le<std::uint32_t>(bytes, pos);
    h.n = get_le<std::uint32_t>(bytes, pos);
    const auto flag = get_le<std::uint8_t>(bytes, pos);
    if (flag > 1)
        throw ParseError("dataset: interference flag must be 0 or 1");
    h.interference = flag == 1;
    h.count = get_le<std::uint64_t>(bytes, pos);
    h.seed = get_le<std::uint64_t>(bytes, pos);
    h.prng_id = get_le<std::uint32_t>(bytes, pos);
    if (h.m < 1 || h.n < 1)
        throw ParseError("dataset: M and N must be >= 1");
    const std::size_t fs = feature_length(h.m, h.n, h.interference);
    const std::size_t expected = kDatasetHeaderSize + 8 * fs * h.count;
    if (bytes.size() != expected)
        throw ParseError("dataset: payload size " + std::to_string(bytes.size()) + " does not match header (expected "
                         + std::to_string(expected) + ")");
    std::vector<double> values(fs * h.count);
    for (auto& v : values)
        v = std::bit_cast<double>(get_le<std::uint64_t>(bytes, pos));
    return Dataset(h, std::move(values));
}

void write_dataset(const std::filesystem::path& path, const Dataset& ds)
{
    const auto bytes = serialize_dataset(ds);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw IoError("cannot open " + path.string() + " for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out)
        throw IoError("write failed: " + path.string());
}

Dataset read_dataset(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoError("cannot open " + path.string());
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    try {
        return deserialize_dataset(bytes);
    } catch (const ParseError& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
}

std::uint64_t dataset_hash(const Dataset& ds)
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (std::uint8_t b : serialize_dataset(ds)) {
        h ^= b;
        h *= 0x100000001b3ULL;
    }
    return h;
}

} // namespace irsopt

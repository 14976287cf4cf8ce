// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <complex>
#include <cstdint>
#include <optional>
#include <random>

namespace irsopt {

/// Seeded random stream used everywhere in the workbench.
///
/// The engine is std::mt19937_64, whose output sequence is fixed by the C++
/// standard. Uniform and Gaussian variates are derived here (not through the
/// implementation-defined std distributions) so that every stream is
/// bit-identical across standard libraries.
class Rng {
public:
    /// Identifier written into dataset headers.
    static constexpr std::uint32_t kAlgorithmId = 1; // mt19937_64 + 53-bit uniform + Box-Muller

    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform on [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Uniform integer on [0, n), unbiased by rejection.
    std::uint64_t index(std::uint64_t n);

    /// Standard normal via the Box-Muller transform; the second variate of each
    /// pair is cached and returned by the next call.
    double normal();

    /// Circularly-symmetric complex Gaussian with total variance `variance`
    /// (variance/2 per component).
    std::complex<double> complex_gaussian(double variance);

private:
    std::mt19937_64 engine_;
    std::optional<double> spare_;
};

/// SplitMix64 finalizer; maps (base seed, stream counter) to an independent seed.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream);

} // namespace irsopt

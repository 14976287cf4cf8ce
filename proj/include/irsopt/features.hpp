// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "irsopt/channel.hpp"

namespace irsopt {

/// Number of reals in a flat feature vector:
/// 2(NM + M + 3N + 3) with interference, 2(MN + M + N + 1) without.
std::size_t feature_length(std::size_t m, std::size_t n, bool interference);

/// Position of one complex block inside the flat feature vector. The block's
/// real parts occupy [re, re + size) and its imaginary parts [im, im + size).
struct FeatureBlock {
    std::size_t re = 0;
    std::size_t im = 0;
    std::size_t size = 0;
    bool present = false;
};

/// Flat layout: blocks in the order vec(V), a, u_IS, u_SD, u_ID, h_ID, h_IS,
/// h_SD, each written as all real parts followed by all imaginary parts.
/// vec() is column-major, so V(n, m) sits at index m * N + n of its block.
/// Without interference u_IS, u_ID, h_ID and h_IS are absent.
struct FeatureLayout {
    std::size_t m = 0;
    std::size_t n = 0;
    bool interference = false;
    FeatureBlock v, a, u_is, u_sd, u_id, h_id, h_is, h_sd;
    std::size_t length = 0;

    FeatureLayout(std::size_t m, std::size_t n, bool interference);
};

/// Cascaded-product representation of a channel realization. Everything the
/// throughput depends on is a function of these fields.
struct FeatureVector {
    std::size_t m = 0;
    std::size_t n = 0;
    bool interference = false;
    ComplexMatrix v;     // N x M, G_BR with row n scaled by g_RS[n]
    ComplexVector a;     // M, h_BS
    ComplexVector u_is;  // N, g_IR * g_RS
    ComplexVector u_sd;  // N, g_RD * g_RS
    ComplexVector u_id;  // N, g_IR * g_RD
    Complex h_is{}, h_id{}, h_sd{};

    std::size_t flat_length() const { return feature_length(m, n, interference); }
    std::vector<double> flatten() const;
    void flatten_into(std::span<double> out) const;

    /// Inverse of flatten(). Absent interference blocks are zero-filled.
    static FeatureVector unflatten(std::span<const double> flat, std::size_t m, std::size_t n, bool interference);
};

/// Elementwise cascades of `ch`. With `interference` off, the interference
/// blocks are still computed in the structured view but dropped from the flat view.
FeatureVector build_features(const ChannelRealization& ch, bool interference);

} // namespace irsopt

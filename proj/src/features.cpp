// SPDX-License-Identifier: Apache-2.0
#include "irsopt/features.hpp"

#include "irsopt/errors.hpp"

namespace irsopt {

std::size_t feature_length(std::size_t m, std::size_t n, bool interference)
{
    return interference ? 2 * (n * m + m + 3 * n + 3) : 2 * (m * n + m + n + 1);
}

FeatureLayout::FeatureLayout(std::size_t m_, std::size_t n_, bool interference_)
    : m(m_), n(n_), interference(interference_)
{
    std::size_t cursor = 0;
    auto place = [&cursor](FeatureBlock& b, std::size_t size) {
        b = {cursor, cursor + size, size, true};
        cursor += 2 * size;
    };
    place(v, n * m);
    place(a, m);
    if (interference)
        place(u_is, n);
    place(u_sd, n);
    if (interference) {
        place(u_id, n);
        place(h_id, 1);
        place(h_is, 1);
    }
    place(h_sd, 1);
    length = cursor;
}

namespace {

template <typename Get>
void write_block(std::span<double> out, const FeatureBlock& b, Get get)
{
    if (!b.present)
        return;
    for (std::size_t i = 0; i < b.size; ++i) {
        const Complex c = get(i);
        out[b.re + i] = c.real();
        out[b.im + i] = c.imag();
    }
}

Complex read(std::span<const double> in, const FeatureBlock& b, std::size_t i)
{
    return {in[b.re + i], in[b.im + i]};
}

} // namespace

void FeatureVector::flatten_into(std::span<double> out) const
{
    const FeatureLayout layout(m, n, interference);
    if (out.size() != layout.length)
        throw ContractViolation("FeatureVector::flatten_into: output span has wrong length");
    const auto nn = static_cast<Eigen::Index>(n);
    write_block(out, layout.v, [&](std::size_t i) {
        const auto k = static_cast<Eigen::Index>(i);
        return v(k % nn, k / nn);
    });
    write_block(out, layout.a, [&](std::size_t i) { return a(static_cast<Eigen::Index>(i)); });
    write_block(out, layout.u_is, [&](std::size_t i) { return u_is(static_cast<Eigen::Index>(i)); });
    write_block(out, layout.u_sd, [&](std::size_t i) { return u_sd(static_cast<Eigen::Index>(i)); });
    write_block(out, layout.u_id, [&](std::size_t i) { return u_id(static_cast<Eigen::Index>(i)); });
    write_block(out, layout.h_id, [&](std::size_t) { return h_id; });
    write_block(out, layout.h_is, [&](std::size_t) { return h_is; });
    write_block(out, layout.h_sd, [&](std::size_t) { return h_sd; });
}

std::vector<double> FeatureVector::flatten() const
{
    std::vector<double> out(flat_length());
    flatten_into(out);
    return out;
}

FeatureVector FeatureVector::unflatten(std::span<const double> flat, std::size_t m, std::size_t n, bool interference)
{
    const FeatureLayout layout(m, n, interference);
    if (m < 1 || n < 1)
        throw ContractViolation("FeatureVector::unflatten: M and N must be >= 1");
    if (flat.size() != layout.length)
        throw ContractViolation("FeatureVector::unflatten: expected " + std::to_string(layout.length) + " values, got "
                                + std::to_string(flat.size()));
    const auto mm = static_cast<Eigen::Index>(m);
    const auto nn = static_cast<Eigen::Index>(n);
    FeatureVector f;
    f.m = m;
    f.n = n;
    f.interference = interference;
    f.v.resize(nn, mm);
    for (Eigen::Index col = 0; col < mm; ++col)
        for (Eigen::Index row = 0; row < nn; ++row)
            f.v(row, col) = read(flat, layout.v, static_cast<std::size_t>(col * nn + row));
    f.a.resize(mm);
    for (Eigen::Index i = 0; i < mm; ++i)
        f.a(i) = read(flat, layout.a, static_cast<std::size_t>(i));
    f.u_is = ComplexVector::Zero(nn);
    f.u_sd.resize(nn);
    f.u_id = ComplexVector::Zero(nn);
    for (Eigen::Index i = 0; i < nn; ++i) {
        const auto k = static_cast<std::size_t>(i);
        f.u_sd(i) = read(flat, layout.u_sd, k);
        if (interference) {
            f.u_is(i) = read(flat, layout.u_is, k);
            f.u_id(i) = read(flat, layout.u_id, k);
        }
    }
    if (interference) {
        f.h_id = read(flat, layout.h_id, 0);
        f.h_is = read(flat, layout.h_is, 0);
    }
    f.h_sd = read(flat, layout.h_sd, 0);
    return f;
}

FeatureVector build_features(const ChannelRealization& ch, bool interference)
{
    const auto n = ch.g_rs.size();
    const auto m = ch.h_bs.size();
    if (m < 1 || n < 1)
        throw ContractViolation("build_features: empty channel");
    if (ch.g_br.rows() != n || ch.g_br.cols() != m || ch.g_ir.size() != n || ch.g_rd.size() != n)
        throw ContractViolation("build_features: inconsistent channel dimensions");

    FeatureVector f;
    f.m = static_cast<std::size_t>(m);
    f.n = static_cast<std::size_t>(n);
    f.interference = interference;
    f.v = ch.g_br.array().colwise() * ch.g_rs.array();
    f.a = ch.h_bs;
    f.u_is = ch.g_ir.cwiseProduct(ch.g_rs);
    f.u_sd = ch.g_rd.cwiseProduct(ch.g_rs);
    f.u_id = ch.g_ir.cwiseProduct(ch.g_rd);
    f.h_is = ch.h_is;
    f.h_id = ch.h_id;
    f.h_sd = ch.h_sd;
    return f;
}

} // namespace irsopt

// SPDX-License-Identifier: Apache-2.0
#include "irsopt/channel.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace irsopt {

void SystemParams::validate() const
{
    auto fail = [](const std::string& what) { throw std::invalid_argument("SystemParams: " + what); };
    if (m < 1)
        fail("M must be >= 1");
    if (n < 1)
        fail("N must be >= 1");
    if (!(p_b >= 0.0) || !(p_i >= 0.0) || !(sigma_z2 >= 0.0))
        fail("powers must be non-negative");
    if (!(eta > 0.0 && eta <= 1.0))
        fail("eta must lie in (0, 1]");
    if (!(t_c > 0.0))
        fail("T_c must be positive");
    for (double dist : {d.rs, d.is, d.rd, d.ir, d.sd, d.bs, d.id, d.br})
        if (!(dist > 0.0))
            fail("distances must be positive");
}

double pathloss_variance(double distance, double exponent, double l_c)
{
    if (!(distance > 0.0))
        throw std::domain_error("pathloss_variance: distance must be positive, got " + std::to_string(distance));
    return l_c * std::pow(distance, -exponent);
}

LinkVariances link_variances(const SystemParams& p)
{
    return {
        .h_bs = pathloss_variance(p.d.bs, p.alpha_direct, p.l_c),
        .g_br = pathloss_variance(p.d.br, p.alpha_irs, p.l_c),
        .g_rs = pathloss_variance(p.d.rs, p.alpha_irs, p.l_c),
        .g_ir = pathloss_variance(p.d.ir, p.alpha_irs, p.l_c),
        .g_rd = pathloss_variance(p.d.rd, p.alpha_irs, p.l_c),
        .h_is = pathloss_variance(p.d.is, p.alpha_direct, p.l_c),
        .h_id = pathloss_variance(p.d.id, p.alpha_direct, p.l_c),
        .h_sd = pathloss_variance(p.d.sd, p.alpha_direct, p.l_c),
    };
}

ChannelRealization sample_channels(const SystemParams& p, Rng& rng)
{
    const auto var = link_variances(p);
    const auto m = static_cast<Eigen::Index>(p.m);
    const auto n = static_cast<Eigen::Index>(p.n);

    ChannelRealization ch;
    ch.h_bs.resize(m);
    for (Eigen::Index i = 0; i < m; ++i)
        ch.h_bs(i) = rng.complex_gaussian(var.h_bs);
    ch.g_br.resize(n, m);
    for (Eigen::Index col = 0; col < m; ++col)
        for (Eigen::Index row = 0; row < n; ++row)
            ch.g_br(row, col) = rng.complex_gaussian(var.g_br);
    auto draw_vector = [&](ComplexVector& v, double variance) {
        v.resize(n);
        for (Eigen::Index i = 0; i < n; ++i)
            v(i) = rng.complex_gaussian(variance);
    };
    draw_vector(ch.g_rs, var.g_rs);
    draw_vector(ch.g_ir, var.g_ir);
    draw_vector(ch.g_rd, var.g_rd);
    ch.h_is = rng.complex_gaussian(var.h_is);
    ch.h_id = rng.complex_gaussian(var.h_id);
    ch.h_sd = rng.complex_gaussian(var.h_sd);
    return ch;
}

} // namespace irsopt

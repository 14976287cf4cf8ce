// SPDX-License-Identifier: Apache-2.0
#include "irsopt/throughput_graph.hpp"

#include <optional>

#include "irsopt/units.hpp"

namespace irsopt::ad {

namespace {

struct Pair {
    Var re;
    Var im;
};

Pair slice(Tape& t, Var features, const FeatureBlock& b, std::size_t offset, std::size_t count)
{
    return {t.slice_cols(features, b.re + offset, count), t.slice_cols(features, b.im + offset, count)};
}

// |base + sum_n (cos_n + j sin_n) u_n|^2 for each batch row.
Var reflected_power(Tape& t, Pair base, Pair u, Var cos_theta, Var sin_theta)
{
    const Var re = t.add(base.re, t.row_sum(t.sub(t.mul(cos_theta, u.re), t.mul(sin_theta, u.im))));
    const Var im = t.add(base.im, t.row_sum(t.add(t.mul(cos_theta, u.im), t.mul(sin_theta, u.re))));
    return t.add(t.square(re), t.square(im));
}

} // namespace

Var record_throughput(Tape& t, Var features, Var theta_et, Var theta_it, Var tau, const SystemParams& p,
                      const FeatureLayout& layout)
{
    const std::size_t n = layout.n;
    const Var cos_et = t.cos(theta_et);
    const Var sin_et = t.sin(theta_et);
    const Var cos_it = t.cos(theta_it);
    const Var sin_it = t.sin(theta_it);

    // ||a + V^T e_ET||^2, one antenna column of V at a time.
    std::optional<Var> norm2;
    for (std::size_t m = 0; m < layout.m; ++m) {
        const Pair v = slice(t, features, layout.v, m * n, n);
        const Pair a = slice(t, features, layout.a, m, 1);
        const Var term = reflected_power(t, a, v, cos_et, sin_et);
        norm2 = norm2 ? t.add(*norm2, term) : term;
    }
    Var energy = t.scale(*norm2, p.p_b);

    const Pair u_sd = slice(t, features, layout.u_sd, 0, n);
    const Pair h_sd = slice(t, features, layout.h_sd, 0, 1);
    const Var signal = reflected_power(t, h_sd, u_sd, cos_it, sin_it);

    Var disturbance = t.literal(p.sigma_z2);
    if (p.interference() && layout.interference) {
        const Var leak = reflected_power(t, slice(t, features, layout.h_is, 0, 1), slice(t, features, layout.u_is, 0, n),
                                         cos_et, sin_et);
        energy = t.add(energy, t.scale(leak, p.p_i));
        const Var jam = reflected_power(t, slice(t, features, layout.h_id, 0, 1), slice(t, features, layout.u_id, 0, n),
                                        cos_it, sin_it);
        disturbance = t.shift(t.scale(jam, p.p_i), p.sigma_z2);
    }

    const Var one_minus_tau = t.shift(t.neg(tau), 1.0);
    const Var numerator = t.mul(t.scale(tau, p.eta), t.mul(energy, signal));
    const Var gamma = t.div(numerator, t.mul(one_minus_tau, disturbance));
    return t.mul(one_minus_tau, t.scale(t.log(t.shift(gamma, 1.0)), 1.0 / kLn2));
}

Var record_loss(Tape& t, Var throughput) { return t.neg(t.mean(throughput)); }

ThroughputGraph build_throughput_graph(Tape& t, const SystemParams& p)
{
    const FeatureLayout layout(p.m, p.n, p.interference());
    ThroughputGraph g;
    g.features = t.constant("features");
    g.theta_et = t.parameter("theta_et");
    g.theta_it = t.parameter("theta_it");
    g.tau = t.parameter("tau");
    g.throughput = record_throughput(t, g.features, g.theta_et, g.theta_it, g.tau, p, layout);
    g.loss = record_loss(t, g.throughput);
    return g;
}

} // namespace irsopt::ad

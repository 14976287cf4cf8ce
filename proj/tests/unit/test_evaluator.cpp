// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>

#include "irsopt/errors.hpp"
#include "irsopt/evaluator.hpp"
#include "../support/raw_oracle.hpp"

using namespace irsopt;

namespace {

PhaseConfig random_config(std::size_t n, Rng& rng)
{
    PhaseConfig c;
    for (std::size_t i = 0; i < n; ++i) {
        c.theta_et.push_back(rng.uniform(0.0, kTwoPi));
        c.theta_it.push_back(rng.uniform(0.0, kTwoPi));
    }
    c.tau = rng.uniform(0.05, 0.95);
    return c;
}

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(a), std::abs(b)); }

} // namespace

TEST_SUITE("evaluator") {

TEST_CASE("feature evaluation agrees with the raw channel matrices")
{
    Rng rng(21);
    for (int trial = 0; trial < 200; ++trial) {
        SystemParams p;
        p.m = 1 + rng.index(4);
        p.n = 1 + rng.index(8);
        p.p_i = trial % 2 ? dbm_to_watts(10.0) : 0.0;
        const auto ch = sample_channels(p, rng);
        const auto f = build_features(ch, p.interference());
        const auto cfg = random_config(p.n, rng);
        const auto raw = oracle::raw_throughput(ch, cfg.theta_et, cfg.theta_it, cfg.tau, p);
        const auto r = evaluate(f, cfg, p);
        CHECK(rel(r.energy, raw.energy) < 1e-12);
        CHECK(rel(r.sinr, raw.sinr) < 1e-12);
        CHECK(rel(r.throughput, raw.throughput) < 1e-12);
        CHECK(rel(throughput(f, cfg, p), raw.throughput) < 1e-12);
    }
}

TEST_CASE("mrt reaches the channel norm and no unit beamformer beats it")
{
    Rng rng(5);
    ComplexVector h(4);
    for (Eigen::Index i = 0; i < 4; ++i)
        h(i) = rng.complex_gaussian(1.0);
    const ComplexVector w = mrt_beamformer(h);
    CHECK(w.norm() == doctest::Approx(1.0).scale(0).epsilon(1e-14));
    const double best = std::norm((h.array() * w.array()).sum());
    CHECK(best == doctest::Approx(h.squaredNorm()).scale(0).epsilon(1e-13));
    for (int trial = 0; trial < 2000; ++trial) {
        ComplexVector u(4);
        for (Eigen::Index i = 0; i < 4; ++i)
            u(i) = rng.complex_gaussian(1.0);
        u /= u.norm();
        CHECK(std::norm((h.array() * u.array()).sum()) <= best * (1.0 + 1e-12));
    }
    CHECK_THROWS_AS(mrt_beamformer(ComplexVector::Zero(3)), SingularChannel);
}

TEST_CASE("coherence time cancels out of the SINR")
{
    SystemParams p;
    Rng rng(8);
    const auto f = build_features(sample_channels(p, rng), false);
    const auto cfg = random_config(p.n, rng);
    const double c1 = evaluate(f, cfg, p).throughput;
    p.t_c = 37.5;
    const auto r = evaluate(f, cfg, p);
    CHECK(rel(r.throughput, c1) < 1e-14);
    CHECK(r.energy == doctest::Approx(37.5 * harvested_energy(f, cfg.theta_et, cfg.tau, SystemParams{})).scale(0));
}

TEST_CASE("phases are 2pi periodic")
{
    SystemParams p;
    p.p_i = dbm_to_watts(5.0);
    Rng rng(3);
    for (int trial = 0; trial < 50; ++trial) {
        const auto f = build_features(sample_channels(p, rng), true);
        auto cfg = random_config(p.n, rng);
        const double c = throughput(f, cfg, p);
        auto shifted = cfg;
        for (std::size_t i = 0; i < p.n; ++i) {
            shifted.theta_et[i] += kTwoPi * static_cast<double>(1 + rng.index(3));
            shifted.theta_it[i] -= kTwoPi;
        }
        CHECK(rel(throughput(f, shifted, p), c) < 1e-12);
    }
}

TEST_CASE("throughput vanishes at the tau boundaries")
{
    SystemParams p;
    Rng rng(4);
    const auto f = build_features(sample_channels(p, rng), false);
    auto cfg = random_config(p.n, rng);
    cfg.tau = 1e-9;
    CHECK(throughput(f, cfg, p) < 1e-6);
    cfg.tau = 1.0 - 1e-9;
    CHECK(throughput(f, cfg, p) < 1e-6);
}

TEST_CASE("tau outside the open unit interval is a degenerate split")
{
    SystemParams p;
    Rng rng(4);
    const auto f = build_features(sample_channels(p, rng), false);
    auto cfg = random_config(p.n, rng);
    for (double tau : {0.0, 1.0, -0.1, 1.5, std::nan("")}) {
        cfg.tau = tau;
        CHECK_THROWS_AS(throughput(f, cfg, p), DegenerateSplit);
    }
}

TEST_CASE("throughput grows with P_B")
{
    SystemParams p;
    Rng rng(6);
    const auto f = build_features(sample_channels(p, rng), false);
    const auto cfg = random_config(p.n, rng);
    double last = 0.0;
    for (double pb : {0.1, 1.0, 5.0, 10.0, 40.0}) {
        p.p_b = pb;
        const double c = throughput(f, cfg, p);
        CHECK(c > last);
        last = c;
    }
}

TEST_CASE("mode and shape mismatches are contract violations")
{
    SystemParams p;
    Rng rng(1);
    const auto f = build_features(sample_channels(p, rng), false);
    auto cfg = random_config(p.n, rng);
    p.p_i = 1e-3;
    CHECK_THROWS_AS(throughput(f, cfg, p), ContractViolation);
    p.p_i = 0.0;
    cfg.theta_et.pop_back();
    CHECK_THROWS_AS(throughput(f, cfg, p), ContractViolation);
}

TEST_CASE("canonicalize wraps phases and clamps tau")
{
    PhaseConfig c{{-0.5, 7.0}, {kTwoPi, 3.0}, 1.0};
    c.canonicalize();
    CHECK(c.theta_et[0] == doctest::Approx(kTwoPi - 0.5).scale(0));
    CHECK(c.theta_et[1] == doctest::Approx(7.0 - kTwoPi).scale(0));
    CHECK(c.theta_it[0] == 0.0);
    CHECK(c.tau == 1.0 - kTauEpsilon);
    CHECK(wrap_phase(-1e-300) < kTwoPi);
    CHECK(clamp_tau(0.0) == kTauEpsilon);
}

TEST_CASE("batch loss is minus the mean throughput")
{
    SystemParams p;
    Rng rng(12);
    std::vector<FeatureVector> fs;
    std::vector<PhaseConfig> cs;
    double sum = 0.0;
    for (int i = 0; i < 10; ++i) {
        fs.push_back(build_features(sample_channels(p, rng), false));
        cs.push_back(random_config(p.n, rng));
        sum += throughput(fs.back(), cs.back(), p);
    }
    CHECK(batch_loss(fs, cs, p) == doctest::Approx(-sum / 10.0).scale(0).epsilon(1e-15));
    CHECK_THROWS_AS(batch_loss(std::span<const FeatureVector>{}, std::span<const PhaseConfig>{}, p), ContractViolation);
}

} // TEST_SUITE

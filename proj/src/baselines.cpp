// SPDX-License-Identifier: Apache-2.0
#include "irsopt/baselines.hpp"

#include <cmath>
#include <sstream>

#include "irsopt/errors.hpp"
#include "irsopt/units.hpp"

namespace irsopt {

RandomBaselineResult random_baseline(const FeatureVector& f, const SystemParams& p, const GAParams& ga, Rng& rng)
{
    if (f.n < 1)
        throw ContractViolation("random_baseline: N must be at least 1");
    RandomBaselineResult r;
    r.config.theta_et.resize(f.n);
    r.config.theta_it.resize(f.n);
    for (auto& t : r.config.theta_et)
        t = rng.uniform(0.0, kTwoPi);
    for (auto& t : r.config.theta_it)
        t = rng.uniform(0.0, kTwoPi);

    // tau enters only through gamma = k tau / (1 - tau), so fix the gains once.
    const double et = et_gain(f, r.config.theta_et, p);
    const double it = it_ratio(f, r.config.theta_it, p);
    auto c_of_tau = [&](double tau) { return throughput_from_sinr(sinr_from_gains(et, it, tau, p), tau); };

    GeneBounds b{{kTauEpsilon}, {1.0 - kTauEpsilon}, {false}};
    GAResult res = ga_optimize([&](std::span<const double> g) { return c_of_tau(g[0]); }, b, ga, rng);
    r.config.tau = res.genome[0];
    r.throughput = throughput(f, r.config, p);

    const ScalarOptimum gs = best_tau(f, r.config, p);
    r.golden_tau = gs.x;
    r.golden_throughput = gs.value;
    return r;
}

ScalarOptimum golden_section_maximize(const std::function<double(double)>& fn, double lo, double hi, double tol)
{
    if (!(lo <= hi))
        throw ContractViolation("golden_section_maximize: empty interval");
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = lo, b = hi;
    double x1 = b - inv_phi * (b - a);
    double x2 = a + inv_phi * (b - a);
    double f1 = fn(x1), f2 = fn(x2);
    while (b - a > tol) {
        if (f1 < f2) {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = fn(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = fn(x1);
        }
    }
    ScalarOptimum best{x1, f1};
    if (f2 > best.value)
        best = {x2, f2};
    // a unimodal function may still peak on an endpoint
    for (double x : {lo, hi}) {
        const double v = fn(x);
        if (v > best.value)
            best = {x, v};
    }
    return best;
}

ScalarOptimum best_tau(const FeatureVector& f, const PhaseConfig& phases, const SystemParams& p)
{
    const double et = et_gain(f, phases.theta_et, p);
    const double it = it_ratio(f, phases.theta_it, p);
    return golden_section_maximize(
        [&](double tau) { return throughput_from_sinr(sinr_from_gains(et, it, tau, p), tau); }, kTauEpsilon,
        1.0 - kTauEpsilon);
}

double grid_oracle_cost(std::size_t n, std::size_t resolution)
{
    const double r = static_cast<double>(resolution);
    return 2.0 * std::pow(r, static_cast<double>(n)) + r;
}

namespace {

struct PhaseArgmax {
    std::vector<double> theta;
    double value = -1.0;
};

// Odometer over the N-dimensional phase grid, first coordinate fastest.
template <typename Fn>
PhaseArgmax search_phases(std::size_t n, std::size_t res, Fn&& score)
{
    std::vector<std::size_t> idx(n, 0);
    std::vector<double> theta(n, 0.0);
    PhaseArgmax best;
    const double step = kTwoPi / static_cast<double>(res);
    while (true) {
        const double v = score(theta);
        if (v > best.value) {
            best.value = v;
            best.theta = theta;
        }
        std::size_t k = 0;
        for (; k < n; ++k) {
            if (++idx[k] < res) {
                theta[k] = step * static_cast<double>(idx[k]);
                break;
            }
            idx[k] = 0;
            theta[k] = 0.0;
        }
        if (k == n)
            break;
    }
    return best;
}

} // namespace

GridResult grid_oracle(const FeatureVector& f, const SystemParams& p, std::size_t resolution, double budget)
{
    if (resolution < 2)
        throw ContractViolation("grid_oracle: resolution must be at least 2");
    if (f.n < 1)
        throw ContractViolation("grid_oracle: N must be at least 1");
    const double cost = grid_oracle_cost(f.n, resolution);
    if (cost > budget) {
        std::ostringstream msg;
        msg << "grid_oracle: " << cost << " grid points exceed the budget of " << budget;
        throw BudgetExceeded(msg.str());
    }

    const PhaseArgmax et = search_phases(f.n, resolution, [&](const std::vector<double>& t) { return et_gain(f, t, p); });
    const PhaseArgmax it =
        search_phases(f.n, resolution, [&](const std::vector<double>& t) { return it_ratio(f, t, p); });

    GridResult out;
    out.evaluated_points = cost;
    out.config.theta_et.assign(f.n, 0.0);
    out.config.theta_it.assign(f.n, 0.0);
    out.config.tau = 1.0 / static_cast<double>(resolution);
    out.throughput = 0.0;
    if (!(et.value * it.value > 0.0))
        return out; // every grid point gives C = 0

    out.config.theta_et = et.theta;
    out.config.theta_it = it.theta;
    double best = -1.0;
    for (std::size_t k = 1; k < resolution; ++k) {
        const double tau = static_cast<double>(k) / static_cast<double>(resolution);
        const double c = throughput_from_sinr(sinr_from_gains(et.value, it.value, tau, p), tau);
        if (c > best) {
            best = c;
            out.config.tau = tau;
        }
    }
    out.throughput = best;
    return out;
}

} // namespace irsopt

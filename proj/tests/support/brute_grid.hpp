// SPDX-License-Identifier: Apache-2.0
// Literal enumeration of the full (theta_ET, theta_IT, tau) product grid.
// Only usable for tiny N and resolution.
#pragma once

#include <vector>

#include "irsopt/evaluator.hpp"
#include "irsopt/units.hpp"

namespace oracle {

struct BruteResult {
    irsopt::PhaseConfig config;
    double throughput = -1.0;
};

inline BruteResult brute_grid(const irsopt::FeatureVector& f, const irsopt::SystemParams& p, std::size_t res)
{
    const std::size_t n = f.n;
    const std::size_t genes = 2 * n;
    std::vector<std::size_t> idx(genes, 0);
    BruteResult best;
    irsopt::PhaseConfig cfg;
    cfg.theta_et.assign(n, 0.0);
    cfg.theta_it.assign(n, 0.0);
    const double step = irsopt::kTwoPi / static_cast<double>(res);
    while (true) {
        for (std::size_t i = 0; i < n; ++i) {
            cfg.theta_et[i] = step * static_cast<double>(idx[i]);
            cfg.theta_it[i] = step * static_cast<double>(idx[n + i]);
        }
        for (std::size_t k = 1; k < res; ++k) {
            cfg.tau = static_cast<double>(k) / static_cast<double>(res);
            const double c = irsopt::throughput(f, cfg, p);
            if (c > best.throughput) {
                best.throughput = c;
                best.config = cfg;
            }
        }
        std::size_t g = 0;
        for (; g < genes; ++g) {
            if (++idx[g] < res)
                break;
            idx[g] = 0;
        }
        if (g == genes)
            break;
    }
    return best;
}

} // namespace oracle

// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <functional>

#include "irsopt/ga.hpp"

namespace irsopt {

struct RandomBaselineResult {
    PhaseConfig config;
    double throughput = 0.0;
    // Golden-section tau for the same random phases, kept for diagnostics.
    double golden_tau = 0.0;
    double golden_throughput = 0.0;
};

/// Uniform random phases, then tau alone by a one-gene GA.
/// Both stages draw from `rng`, phases first.
RandomBaselineResult random_baseline(const FeatureVector& f, const SystemParams& p, const GAParams& ga, Rng& rng);

struct ScalarOptimum {
    double x = 0.0;
    double value = 0.0;
};

/// Golden-section search for the maximum of a unimodal function on [lo, hi].
ScalarOptimum golden_section_maximize(const std::function<double(double)>& fn, double lo, double hi,
                                      double tol = 1e-10);

/// Best tau for fixed phases, searched on [kTauEpsilon, 1 - kTauEpsilon].
ScalarOptimum best_tau(const FeatureVector& f, const PhaseConfig& phases, const SystemParams& p);

inline constexpr double kGridBudget = 1e8;

struct GridResult {
    PhaseConfig config;
    double throughput = 0.0;
    double evaluated_points = 0.0;
};

/// Exhaustive search over phases 2 pi k / res (k = 0..res-1) and tau = k / res
/// (k = 1..res-1). The objective factors as
///   gamma = eta tau / (1 - tau) * et_gain(theta_ET) * it_ratio(theta_IT)
/// and C grows with gamma, so the two phase grids are searched separately;
/// the result equals the argmax over the full product grid. Ties keep the
/// first grid point. Throws BudgetExceeded when 2 res^N + res exceeds the budget.
GridResult grid_oracle(const FeatureVector& f, const SystemParams& p, std::size_t resolution,
                       double budget = kGridBudget);

/// Grid points grid_oracle would evaluate for the given size.
double grid_oracle_cost(std::size_t n, std::size_t resolution);

} // namespace irsopt

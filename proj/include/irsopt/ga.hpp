// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "irsopt/evaluator.hpp"
#include "irsopt/rng.hpp"

namespace irsopt {

/// Real-coded GA settings. Benchmarks run 5 or 20 generations; the rest
/// are ordinary defaults.
struct GAParams {
    std::size_t population = 50;
    std::size_t generations = 5;
    double crossover_prob = 0.9;
    /// Per-gene mutation probability; unset means 1 / genome length.
    std::optional<double> mutation_prob;
    /// Gaussian mutation sigma as a fraction of each gene's range.
    double mutation_scale = 0.05;
    std::size_t tournament = 3;
    std::size_t elitism = 2;
    std::uint64_t seed = 1;

    void validate() const;
};

/// Box for each gene. Circular genes live on [lower, upper) and wrap;
/// the rest are clipped.
struct GeneBounds {
    std::vector<double> lower;
    std::vector<double> upper;
    std::vector<bool> circular;

    std::size_t size() const { return lower.size(); }
    void validate() const;
};

struct GAResult {
    std::vector<double> genome;
    double fitness = 0.0;
    /// Best-ever fitness after the initial population (index 0) and after
    /// each generation.
    std::vector<double> history;
    std::size_t discarded_nan = 0;
    std::size_t evaluations = 0;
};

using Objective = std::function<double(std::span<const double>)>;

/// Maximizes `objective` over the box. Tournament selection, uniform
/// crossover, Gaussian mutation, elitism; the best-ever candidate is returned.
/// Candidates scoring NaN are ranked last and counted.
GAResult ga_optimize(const Objective& objective, const GeneBounds& bounds, const GAParams& ga, Rng& rng);

/// Genome layout for problem P: theta_ET (N), theta_IT (N), tau.
GeneBounds config_bounds(std::size_t n);
PhaseConfig genome_to_config(std::span<const double> genome, std::size_t n);

struct ConfigSolution {
    PhaseConfig config;
    double throughput = 0.0;
    std::vector<double> history;
    std::size_t discarded_nan = 0;
};

ConfigSolution ga_optimize_config(const std::function<double(const PhaseConfig&)>& objective, std::size_t n,
                                  const GAParams& ga, Rng& rng);

/// GA over (theta_ET, theta_IT, tau) with the evaluator's throughput as fitness,
/// driven by Rng(ga.seed).
ConfigSolution ga_throughput(const FeatureVector& f, const SystemParams& p, const GAParams& ga);

} // namespace irsopt

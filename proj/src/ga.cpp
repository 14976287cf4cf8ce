// SPDX-License-Identifier: Apache-2.0
#include "irsopt/ga.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "irsopt/errors.hpp"
#include "irsopt/units.hpp"

namespace irsopt {

void GAParams::validate() const
{
    if (population < 2)
        throw ContractViolation("GAParams: population must be at least 2");
    if (elitism >= population)
        throw ContractViolation("GAParams: elitism must be smaller than the population");
    if (tournament < 1)
        throw ContractViolation("GAParams: tournament size must be at least 1");
    auto in_unit = [](double x) { return x >= 0.0 && x <= 1.0; };
    if (!in_unit(crossover_prob) || (mutation_prob && !in_unit(*mutation_prob)))
        throw ContractViolation("GAParams: probabilities must lie in [0, 1]");
    if (!(mutation_scale >= 0.0) || !std::isfinite(mutation_scale))
        throw ContractViolation("GAParams: mutation scale must be finite and non-negative");
}

void GeneBounds::validate() const
{
    if (lower.empty())
        throw ContractViolation("GeneBounds: empty genome");
    if (upper.size() != lower.size() || circular.size() != lower.size())
        throw ContractViolation("GeneBounds: lower, upper and circular differ in length");
    for (std::size_t i = 0; i < lower.size(); ++i)
        if (!(std::isfinite(lower[i]) && std::isfinite(upper[i]) && lower[i] <= upper[i]))
            throw ContractViolation("GeneBounds: gene " + std::to_string(i) + " has an invalid range");
}

namespace {

struct Individual {
    std::vector<double> genome;
    double fitness = 0.0;
};

double repair(double x, double lo, double hi, bool circular)
{
    if (!circular)
        return std::clamp(x, lo, hi);
    const double span = hi - lo;
    if (span <= 0.0)
        return lo;
    double w = std::fmod(x - lo, span);
    if (w < 0.0)
        w += span;
    if (w >= span)
        w = 0.0;
    return lo + w;
}

// NaN ranks below everything.
bool better(double a, double b)
{
    if (std::isnan(b))
        return !std::isnan(a);
    return a > b;
}

} // namespace

GAResult ga_optimize(const Objective& objective, const GeneBounds& bounds, const GAParams& ga, Rng& rng)
{
    ga.validate();
    bounds.validate();
    const std::size_t dim = bounds.size();
    const double p_mut = ga.mutation_prob.value_or(1.0 / static_cast<double>(dim));

    GAResult out;
    auto score = [&](Individual& ind) {
        ind.fitness = objective(ind.genome);
        ++out.evaluations;
        if (std::isnan(ind.fitness))
            ++out.discarded_nan;
    };

    std::vector<Individual> pop(ga.population);
    for (auto& ind : pop) {
        ind.genome.resize(dim);
        for (std::size_t g = 0; g < dim; ++g)
            ind.genome[g] = repair(rng.uniform(bounds.lower[g], bounds.upper[g]), bounds.lower[g], bounds.upper[g],
                                   bounds.circular[g]);
    }
    for (auto& ind : pop)
        score(ind);

    Individual best;
    best.fitness = std::numeric_limits<double>::quiet_NaN();
    auto track = [&] {
        for (const auto& ind : pop)
            if (better(ind.fitness, best.fitness))
                best = ind;
        out.history.push_back(best.fitness);
    };
    track();

    auto by_fitness = [](const Individual& a, const Individual& b) { return better(a.fitness, b.fitness); };
    auto tournament = [&]() -> const Individual& {
        const Individual* winner = &pop[rng.index(pop.size())];
        for (std::size_t k = 1; k < ga.tournament; ++k) {
            const Individual& c = pop[rng.index(pop.size())];
            if (better(c.fitness, winner->fitness))
                winner = &c;
        }
        return *winner;
    };
    auto mutate = [&](std::vector<double>& genome) {
        for (std::size_t g = 0; g < dim; ++g) {
            if (rng.uniform() < p_mut) {
                const double sigma = ga.mutation_scale * (bounds.upper[g] - bounds.lower[g]);
                genome[g] += sigma * rng.normal();
            }
            genome[g] = repair(genome[g], bounds.lower[g], bounds.upper[g], bounds.circular[g]);
        }
    };

    std::vector<Individual> next;
    next.reserve(ga.population + 1);
    for (std::size_t gen = 0; gen < ga.generations; ++gen) {
        std::stable_sort(pop.begin(), pop.end(), by_fitness);
        next.assign(pop.begin(), pop.begin() + static_cast<std::ptrdiff_t>(ga.elitism));
        const std::size_t elite = next.size();
        while (next.size() < ga.population) {
            Individual a = tournament();
            Individual b = tournament();
            if (rng.uniform() < ga.crossover_prob)
                for (std::size_t g = 0; g < dim; ++g)
                    if (rng.uniform() < 0.5)
                        std::swap(a.genome[g], b.genome[g]);
            mutate(a.genome);
            mutate(b.genome);
            next.push_back(std::move(a));
            if (next.size() < ga.population)
                next.push_back(std::move(b));
        }
        for (std::size_t i = elite; i < next.size(); ++i)
            score(next[i]);
        pop.swap(next);
        track();
    }

    if (best.genome.empty()) // every candidate was NaN
        best = pop.front();
    out.genome = best.genome;
    out.fitness = best.fitness;
    return out;
}

GeneBounds config_bounds(std::size_t n)
{
    GeneBounds b;
    for (std::size_t i = 0; i < 2 * n; ++i) {
        b.lower.push_back(0.0);
        b.upper.push_back(kTwoPi);
        b.circular.push_back(true);
    }
    b.lower.push_back(kTauEpsilon);
    b.upper.push_back(1.0 - kTauEpsilon);
    b.circular.push_back(false);
    return b;
}

PhaseConfig genome_to_config(std::span<const double> genome, std::size_t n)
{
    if (genome.size() != 2 * n + 1)
        throw ContractViolation("genome_to_config: genome length is not 2N + 1");
    PhaseConfig cfg;
    cfg.theta_et.assign(genome.begin(), genome.begin() + static_cast<std::ptrdiff_t>(n));
    cfg.theta_it.assign(genome.begin() + static_cast<std::ptrdiff_t>(n), genome.end() - 1);
    cfg.tau = genome.back();
    cfg.canonicalize();
    return cfg;
}

ConfigSolution ga_optimize_config(const std::function<double(const PhaseConfig&)>& objective, std::size_t n,
                                  const GAParams& ga, Rng& rng)
{
    if (n < 1)
        throw ContractViolation("ga_optimize_config: N must be at least 1");
    PhaseConfig scratch;
    auto fitness = [&](std::span<const double> genome) {
        scratch.theta_et.assign(genome.begin(), genome.begin() + static_cast<std::ptrdiff_t>(n));
        scratch.theta_it.assign(genome.begin() + static_cast<std::ptrdiff_t>(n), genome.end() - 1);
        scratch.tau = genome.back();
        return objective(scratch);
    };
    GAResult r = ga_optimize(fitness, config_bounds(n), ga, rng);
    ConfigSolution s;
    s.config = genome_to_config(r.genome, n);
    s.throughput = r.fitness;
    s.history = std::move(r.history);
    s.discarded_nan = r.discarded_nan;
    return s;
}

ConfigSolution ga_throughput(const FeatureVector& f, const SystemParams& p, const GAParams& ga)
{
    Rng rng(ga.seed);
    return ga_optimize_config([&](const PhaseConfig& c) { return throughput(f, c, p); }, f.n, ga, rng);
}

} // namespace irsopt

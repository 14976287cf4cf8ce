// SPDX-License-Identifier: Apache-2.0
// Reference throughput numbers and reproduction-scale trends. Several of
// these are not met; README lists the measured values.
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <iostream>
#include <utility>

#include "irsopt/baselines.hpp"
#include "irsopt/bench.hpp"
#include "irsopt/dataset.hpp"
#include "irsopt/evaluator.hpp"
#include "irsopt/ga.hpp"
#include "irsopt/irsnet.hpp"
#include "irsopt/throughput_graph.hpp"
#include "irsopt/training.hpp"
#include "irsopt/autodiff.hpp"
#include "../support/grad_oracle.hpp"

using namespace irsopt;
using namespace irsopt::net;

namespace {

Tensor random_tensor(Rng& rng, Eigen::Index r, Eigen::Index c, double lo, double hi)
{
    Tensor t(r, c);
    for (Eigen::Index i = 0; i < r; ++i)
        for (Eigen::Index j = 0; j < c; ++j)
            t(i, j) = rng.uniform(lo, hi);
    return t;
}

SystemParams unit_system(std::size_t m, std::size_t n, double p_i)
{
    SystemParams p;
    p.m = m;
    p.n = n;
    p.p_i = p_i;
    p.l_c = 1.0;
    p.d = Distances{1, 1, 1, 1, 1, 1, 1, 1};
    p.p_b = 1.0;
    p.sigma_z2 = 1.0;
    return p;
}

Architecture small_arch(const SystemParams& p, std::vector<std::size_t> hidden)
{
    Architecture a;
    a.m = p.m;
    a.n = p.n;
    a.interference = p.interference();
    a.input_size = feature_length(p.m, p.n, a.interference);
    a.hidden = std::move(hidden);
    return a;
}

void jitter(NetworkParams& params, Rng& rng)
{
    for (auto& bn : params.norms) {
        bn.gamma = random_tensor(rng, 1, bn.gamma.cols(), 0.5, 1.5);
        bn.beta = random_tensor(rng, 1, bn.beta.cols(), -0.5, 0.5);
    }
    for (auto& l : params.hidden)
        l.bias = random_tensor(rng, 1, l.bias.cols(), -0.2, 0.2);
    params.output.bias = random_tensor(rng, 1, params.output.bias.cols(), -0.2, 0.2);
}

double ga5_mean(const Dataset& ds, const SystemParams& p)
{
    GAParams ga;
    ga.generations = 5;
    double sum = 0.0;
    for (std::size_t i = 0; i < ds.size(); ++i) {
        ga.seed = derive_seed(11, i);
        sum += ga_throughput(ds.feature(i), p, ga).throughput;
    }
    return sum / static_cast<double>(ds.size());
}

} // namespace

TEST_SUITE("reproduction") {

// Double-precision central differences on a 12-input net (smallest length >= 10).
TEST_CASE("gradient check on a 12-input net with layers 8/8")
{
    // F_s = 12 is the smallest feature length at or above 10 (M = 1, N = 2, noise-limited)
    Rng rng(17);
    const SystemParams p = unit_system(1, 2, 0.0);
    const auto arch = small_arch(p, {8, 8});
    REQUIRE(arch.input_size == 12);
    auto params = init_network(arch, 2);
    jitter(params, rng);
    TrainingGraph graph(arch, p);
    graph.forward(params, generate_dataset(p, 24, 6).matrix());
    std::vector<Tensor> point;
    for (const Tensor* t : std::as_const(params).trainable())
        point.push_back(*t);
    CHECK(ad::grad_check(graph.tape(), graph.loss(), point, 1e-6) < 1e-5);
}


TEST_CASE("GA-5 mean throughput at M=4, N=16 without interference")
{
    SystemParams p;
    p.m = 4;
    p.n = 16;
    const Dataset ds = generate_dataset(p, 1000, derive_seed(1, 3));
    const double mean = ga5_mean(ds, p);
    std::cout << "GA-5 mean at M=4, N=16: " << mean << " (reference 4.0975)\n";
    CHECK(std::abs(mean - 4.0975) <= 0.10 * 4.0975);
}

TEST_CASE("random baseline rate ratio at M=2, N=8 without interference")
{
    SystemParams p;
    const Dataset ds = generate_dataset(p, 1000, derive_seed(1, 3));
    GAParams ga;
    ga.generations = 5;
    double ga_sum = 0.0;
    double random_sum = 0.0;
    for (std::size_t i = 0; i < ds.size(); ++i) {
        const auto f = ds.feature(i);
        ga.seed = derive_seed(11, i);
        ga_sum += ga_throughput(f, p, ga).throughput;
        Rng rng(derive_seed(12, i));
        random_sum += random_baseline(f, p, ga, rng).throughput;
    }
    const double ratio = random_sum / ga_sum;
    std::cout << "random / GA-5 at M=2, N=8: " << ratio << " (reference 0.626)\n";
    CHECK(std::abs(ratio - 0.626) <= 0.15);
}

} // TEST_SUITE

TEST_SUITE("reproduction_trend") {

TEST_CASE("IRS-Net rate ratio does not fall as N grows at M=8")
{
    const auto dir = std::filesystem::temp_directory_path() / "irsopt_trend";
    std::filesystem::remove_all(dir);
    bench::ExperimentConfig cfg;
    cfg.system.m = 8;
    cfg.datasets = {100000, 10000, 1000, 1};
    cfg.train.max_epochs = 3;
    cfg.train.batch_size = 500;
    cfg.methods = {"ga5", "irsnet"};
    cfg.sweep_key = "n";
    cfg.sweep_values = {"8", "16", "32"};
    cfg.output_dir = dir;
    cfg.timing = {1, false};
    const auto r = bench::run_experiment(cfg, [](const std::string& s) { std::cout << s << "\n"; });
    REQUIRE_FALSE(r.partial());
    REQUIRE(r.reports.size() == 3);
    std::vector<double> ratios;
    for (const auto& rep : r.reports) {
        ratios.push_back(rep.rate_ratios.at("irsnet"));
        std::cout << "N=" << rep.n << " IRS-Net rate ratio " << ratios.back() << "\n";
    }
    CHECK(ratios[1] >= ratios[0]);
    CHECK(ratios[2] >= ratios[1]);
    std::filesystem::remove_all(dir);
}

} // TEST_SUITE

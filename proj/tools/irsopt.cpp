// SPDX-License-Identifier: Apache-2.0
// Command-line front end: dataset generation, training, solvers, benchmarks.

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "irsopt/baselines.hpp"
#include "irsopt/bench.hpp"
#include "irsopt/checkpoint.hpp"
#include "irsopt/dataset.hpp"
#include "irsopt/errors.hpp"
#include "irsopt/training.hpp"

using namespace irsopt;

namespace {

// Exit codes: 0 ok, 1 runtime failure, 2 usage error.
int fail(const std::string& kind, const std::string& msg, int code = 1)
{
    std::cerr << "error: " << kind << ": " << msg << '\n';
    return code;
}

struct SystemOptions {
    std::string pi_dbm = "off";
    std::string system_file;
};

void add_system_options(CLI::App* cmd, SystemOptions& o)
{
    cmd->add_option("--pi-dbm", o.pi_dbm, "Interferer power in dBm, or 'off'")->capture_default_str();
    cmd->add_option("--system", o.system_file, "JSON object with system parameters (experiment 'system' schema)");
}

SystemParams make_system(const SystemOptions& o, std::size_t m, std::size_t n)
{
    SystemParams p;
    if (!o.system_file.empty()) {
        std::ifstream in(o.system_file);
        if (!in)
            throw IoError("cannot open " + o.system_file);
        nlohmann::json doc;
        try {
            doc = nlohmann::json::parse(in);
        } catch (const nlohmann::json::parse_error& e) {
            throw ParseError(o.system_file + ": " + e.what());
        }
        p = bench::parse_experiment({{"system", doc}}).system;
    }
    p.m = m;
    p.n = n;
    p.p_i = bench::parse_power_dbm(o.pi_dbm);
    p.validate();
    return p;
}

SystemParams system_for(const Dataset& ds, const SystemOptions& o)
{
    SystemParams p = make_system(o, ds.header().m, ds.header().n);
    if (p.interference() != ds.header().interference)
        throw ContractViolation(std::string("--pi-dbm ") + o.pi_dbm + " does not match a "
                                + (ds.header().interference ? "interference" : "noise-limited") + " dataset");
    return p;
}

std::string num(double x)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

void write_configs(std::ostream& out, const std::vector<PhaseConfig>& cfgs, const std::vector<double>& c)
{
    const std::size_t n = cfgs.empty() ? 0 : cfgs.front().n();
    out << "index,throughput,tau";
    for (std::size_t i = 0; i < n; ++i)
        out << ",theta_et_" << i;
    for (std::size_t i = 0; i < n; ++i)
        out << ",theta_it_" << i;
    out << '\n';
    for (std::size_t k = 0; k < cfgs.size(); ++k) {
        out << k << ',' << num(c[k]) << ',' << num(cfgs[k].tau);
        for (double t : cfgs[k].theta_et)
            out << ',' << num(t);
        for (double t : cfgs[k].theta_it)
            out << ',' << num(t);
        out << '\n';
    }
}

void emit(const std::string& path, const std::vector<PhaseConfig>& cfgs, const std::vector<double>& c)
{
    if (path.empty() || path == "-") {
        write_configs(std::cout, cfgs, c);
        return;
    }
    std::ofstream out(path, std::ios::trunc);
    if (!out)
        throw IoError("cannot open " + path + " for writing");
    write_configs(out, cfgs, c);
}

std::size_t thread_count(std::size_t requested)
{
    if (requested > 0)
        return requested;
    if (const char* th = std::getenv("IRSOPT_THREADS"); th && *th)
        return std::max<std::size_t>(1, std::strtoul(th, nullptr, 10));
    return 1;
}

// Runs solve(i) for every sample, splitting the index range over threads.
// Each sample has its own derived seed, so the split does not change results.
template <typename Solve>
std::vector<PhaseConfig> solve_all(std::size_t count, std::size_t threads, Solve&& solve)
{
    std::vector<PhaseConfig> out(count);
    threads = std::min(threads, std::max<std::size_t>(1, count));
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(threads);
    for (std::size_t t = 0; t < threads; ++t)
        pool.emplace_back([&, t] {
            try {
                for (std::size_t i = t; i < count; i += threads)
                    out[i] = solve(i);
            } catch (...) {
                errors[t] = std::current_exception();
            }
        });
    for (auto& th : pool)
        th.join();
    for (auto& e : errors)
        if (e)
            std::rethrow_exception(e);
    return out;
}

std::vector<double> throughputs(const std::vector<FeatureVector>& fs, const std::vector<PhaseConfig>& cfgs,
                                const SystemParams& p)
{
    std::vector<double> c(fs.size());
    for (std::size_t i = 0; i < fs.size(); ++i)
        c[i] = throughput(fs[i], cfgs[i], p);
    return c;
}

double mean(const std::vector<double>& v)
{
    double s = 0.0;
    for (double x : v)
        s += x;
    return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"IRS-assisted WPCN throughput workbench"};
    app.require_subcommand(1);

    // gen-data
    auto* gen = app.add_subcommand("gen-data", "Sample channels and write a feature dataset");
    std::size_t gen_m = 2, gen_n = 8, gen_samples = 1000;
    std::uint64_t gen_seed = 0;
    std::string gen_out;
    SystemOptions gen_sys;
    gen->add_option("--m", gen_m, "PB antennas")->capture_default_str();
    gen->add_option("--n", gen_n, "IRS elements")->capture_default_str();
    gen->add_option("--samples", gen_samples, "Number of feature vectors")->capture_default_str();
    gen->add_option("--seed", gen_seed, "Dataset seed")->required();
    gen->add_option("--out", gen_out, "Output .iwds file")->required();
    add_system_options(gen, gen_sys);

    // train
    auto* trn = app.add_subcommand("train", "Train IRS-Net on a dataset");
    std::string trn_train, trn_val, trn_out, trn_history, trn_init;
    std::uint64_t trn_seed = 0;
    net::TrainConfig trn_cfg = net::TrainConfig::desk();
    bool trn_bn_first = false, trn_norm_inputs = false;
    SystemOptions trn_sys;
    trn->add_option("--train", trn_train, "Training dataset")->required();
    trn->add_option("--validation", trn_val, "Validation dataset")->required();
    trn->add_option("--seed", trn_seed, "Initialization and shuffling seed")->required();
    trn->add_option("--out", trn_out, "Checkpoint to write")->required();
    trn->add_option("--history", trn_history, "Per-epoch loss CSV");
    trn->add_option("--init", trn_init, "Start from this checkpoint instead of a fresh network");
    trn->add_option("--epochs", trn_cfg.max_epochs, "Maximum epochs")->capture_default_str();
    trn->add_option("--batch", trn_cfg.batch_size, "Minibatch size")->capture_default_str();
    trn->add_option("--lr", trn_cfg.learning_rate, "Initial learning rate")->capture_default_str();
    trn->add_option("--decay-rate", trn_cfg.decay_rate, "Staircase decay factor")->capture_default_str();
    trn->add_option("--decay-steps", trn_cfg.decay_steps, "Steps per decay")->capture_default_str();
    trn->add_option("--patience", trn_cfg.patience, "Epochs without training-loss improvement before stopping")
        ->capture_default_str();
    trn->add_flag("--bn-before-relu", trn_bn_first, "Use affine -> batch-norm -> relu blocks");
    trn->add_flag("--normalize-inputs", trn_norm_inputs, "Standardize input features");
    add_system_options(trn, trn_sys);

    // infer
    auto* inf = app.add_subcommand("infer", "Run a trained network on a dataset");
    std::string inf_ckpt, inf_data, inf_out;
    SystemOptions inf_sys;
    inf->add_option("--checkpoint", inf_ckpt, "Checkpoint file")->required();
    inf->add_option("--data", inf_data, "Dataset")->required();
    inf->add_option("--out", inf_out, "Configuration CSV ('-' for stdout)");
    add_system_options(inf, inf_sys);

    // ga-opt
    auto* gao = app.add_subcommand("ga-opt", "Genetic algorithm per feature vector");
    std::string gao_data, gao_out;
    GAParams gao_ga;
    double gao_pm = -1.0;
    std::size_t gao_threads = 0;
    SystemOptions gao_sys;
    gao->add_option("--data", gao_data, "Dataset")->required();
    gao->add_option("--seed", gao_ga.seed, "Base seed; sample i uses a derived stream")->required();
    gao->add_option("--generations", gao_ga.generations, "Generations (GA iterations)")->capture_default_str();
    gao->add_option("--population", gao_ga.population)->capture_default_str();
    gao->add_option("--crossover", gao_ga.crossover_prob)->capture_default_str();
    gao->add_option("--mutation", gao_pm, "Per-gene mutation probability (default 1/(2N+1))");
    gao->add_option("--mutation-scale", gao_ga.mutation_scale)->capture_default_str();
    gao->add_option("--tournament", gao_ga.tournament)->capture_default_str();
    gao->add_option("--elitism", gao_ga.elitism)->capture_default_str();
    gao->add_option("--threads", gao_threads, "Worker threads (default IRSOPT_THREADS or 1)");
    gao->add_option("--out", gao_out, "Configuration CSV ('-' for stdout)");
    add_system_options(gao, gao_sys);

    // random-baseline
    auto* rnd = app.add_subcommand("random-baseline", "Random phases with GA-optimized tau");
    std::string rnd_data, rnd_out;
    std::uint64_t rnd_seed = 0;
    std::size_t rnd_gens = 5, rnd_threads = 0;
    SystemOptions rnd_sys;
    rnd->add_option("--data", rnd_data, "Dataset")->required();
    rnd->add_option("--seed", rnd_seed, "Base seed")->required();
    rnd->add_option("--generations", rnd_gens, "Generations of the tau GA")->capture_default_str();
    rnd->add_option("--threads", rnd_threads, "Worker threads");
    rnd->add_option("--out", rnd_out, "Configuration CSV ('-' for stdout)");
    add_system_options(rnd, rnd_sys);

    // oracle
    auto* orc = app.add_subcommand("oracle", "Exhaustive grid search (small N only)");
    std::string orc_data, orc_out;
    std::size_t orc_res = 64;
    double orc_budget = kGridBudget;
    SystemOptions orc_sys;
    orc->add_option("--data", orc_data, "Dataset")->required();
    orc->add_option("--resolution", orc_res, "Grid points per phase; tau step is 1/resolution")->capture_default_str();
    orc->add_option("--budget", orc_budget, "Refuse when more grid points would be evaluated")->capture_default_str();
    orc->add_option("--out", orc_out, "Configuration CSV ('-' for stdout)");
    add_system_options(orc, orc_sys);

    // bench
    auto* bch = app.add_subcommand("bench", "Run an experiment described by a JSON config");
    std::string bch_config;
    bch->add_option("--config", bch_config, "Experiment JSON")->required();

    // report
    auto* rep = app.add_subcommand("report", "Summarize a results.csv");
    std::string rep_results;
    rep->add_option("--results", rep_results, "results.csv written by bench")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        return fail("usage", e.what(), 2);
    }

    try {
        if (*gen) {
            const SystemParams p = make_system(gen_sys, gen_m, gen_n);
            write_dataset(gen_out, generate_dataset(p, gen_samples, gen_seed));
            std::cout << "wrote " << gen_samples << " samples to " << gen_out << '\n';
        } else if (*trn) {
            const Dataset train = read_dataset(trn_train);
            const Dataset val = read_dataset(trn_val);
            const SystemParams p = system_for(train, trn_sys);
            trn_cfg.seed = trn_seed;
            trn_cfg.train_path = trn_train;
            trn_cfg.validation_path = trn_val;
            net::NetworkParams init;
            if (!trn_init.empty()) {
                init = net::load_checkpoint(trn_init);
            } else {
                net::Architecture arch = net::make_architecture(p);
                arch.relu_before_norm = !trn_bn_first;
                arch.normalize_inputs = trn_norm_inputs;
                init = net::init_network(arch, trn_seed);
            }
            const net::TrainResult r = net::train(train, val, init, trn_cfg, p, [](const net::EpochRecord& e) {
                std::cout << "epoch " << e.epoch << " train_loss " << num(e.train_loss) << " validation_loss "
                          << num(e.validation_loss) << " lr " << num(e.learning_rate) << '\n';
            });
            if (!trn_history.empty()) {
                std::ofstream out(trn_history, std::ios::trunc);
                if (!out)
                    throw IoError("cannot open " + trn_history + " for writing");
                out << bench::history_csv(r.history);
            }
            net::save_checkpoint(r.params, trn_out);
            std::cout << "best epoch " << r.best_epoch << (r.early_stopped ? " (early stop)" : "") << ", checkpoint "
                      << trn_out << '\n';
            if (r.aborted)
                return fail("numeric", r.diagnostic);
        } else if (*inf) {
            const net::NetworkParams params = net::load_checkpoint(inf_ckpt);
            const Dataset ds = read_dataset(inf_data);
            const SystemParams p = system_for(ds, inf_sys);
            if (!ds.matches(params.arch.m, params.arch.n, params.arch.interference)
                || ds.feature_length() != params.arch.input_size)
                throw ContractViolation("checkpoint architecture does not match the dataset");
            const auto cfgs = net::forward(params, ds.matrix(), net::Mode::Inference);
            const auto c = throughputs(ds.features(), cfgs, p);
            emit(inf_out, cfgs, c);
            std::cerr << "mean_throughput " << num(mean(c)) << '\n';
        } else if (*gao) {
            const Dataset ds = read_dataset(gao_data);
            const SystemParams p = system_for(ds, gao_sys);
            if (gao_pm >= 0.0)
                gao_ga.mutation_prob = gao_pm;
            gao_ga.validate();
            const auto fs = ds.features();
            const auto cfgs = solve_all(fs.size(), thread_count(gao_threads), [&](std::size_t i) {
                GAParams g = gao_ga;
                g.seed = derive_seed(gao_ga.seed, i);
                return ga_throughput(fs[i], p, g).config;
            });
            const auto c = throughputs(fs, cfgs, p);
            emit(gao_out, cfgs, c);
            std::cerr << "mean_throughput " << num(mean(c)) << '\n';
        } else if (*rnd) {
            const Dataset ds = read_dataset(rnd_data);
            const SystemParams p = system_for(ds, rnd_sys);
            GAParams ga;
            ga.generations = rnd_gens;
            const auto fs = ds.features();
            const auto cfgs = solve_all(fs.size(), thread_count(rnd_threads), [&](std::size_t i) {
                Rng rng(derive_seed(rnd_seed, i));
                return random_baseline(fs[i], p, ga, rng).config;
            });
            const auto c = throughputs(fs, cfgs, p);
            emit(rnd_out, cfgs, c);
            std::cerr << "mean_throughput " << num(mean(c)) << '\n';
        } else if (*orc) {
            const Dataset ds = read_dataset(orc_data);
            const SystemParams p = system_for(ds, orc_sys);
            const auto fs = ds.features();
            std::vector<PhaseConfig> cfgs;
            for (const auto& f : fs)
                cfgs.push_back(grid_oracle(f, p, orc_res, orc_budget).config);
            const auto c = throughputs(fs, cfgs, p);
            emit(orc_out, cfgs, c);
            std::cerr << "mean_throughput " << num(mean(c)) << '\n';
        } else if (*bch) {
            const bench::ExperimentConfig cfg = bench::load_experiment(bch_config);
            const bench::ExperimentResult r =
                bench::run_experiment(cfg, [](const std::string& msg) { std::cerr << msg << '\n'; });
            for (const auto& f : r.files)
                std::cout << "wrote " << f.string() << '\n';
            if (r.partial()) {
                for (const auto& rp : r.reports)
                    if (rp.partial)
                        return fail("partial", "stage " + rp.failed_stage + ": " + rp.error);
            }
        } else if (*rep) {
            std::ifstream in(rep_results);
            if (!in)
                throw IoError("cannot open " + rep_results);
            std::stringstream buf;
            buf << in.rdbuf();
            const auto rows = bench::rows_from_csv(buf.str());
            std::printf("%-8s %4s %4s %6s %8s %12s %10s %12s %10s %10s\n", "method", "M", "N", "P_I", "samples",
                        "C [bit/s/Hz]", "std err", "time [ms]", "rate", "time x");
            for (const auto& r : rows)
                std::printf("%-8s %4zu %4zu %6s %8zu %12.4f %10.4f %12.4f %10.4f %10.2f\n", r.method.c_str(), r.m, r.n,
                            r.p_i_dbm.c_str(), r.samples, r.mean_throughput, r.std_error, r.time_ms, r.rate_ratio,
                            r.time_ratio);
        }
    } catch (const ParseError& e) {
        return fail("parse", e.what(), 2);
    } catch (const ContractViolation& e) {
        return fail("contract", e.what(), 2);
    } catch (const IoError& e) {
        return fail("io", e.what());
    } catch (const BudgetExceeded& e) {
        return fail("budget", e.what());
    } catch (const std::exception& e) {
        return fail("runtime", e.what());
    }
    return 0;
}

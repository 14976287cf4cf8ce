// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "irsopt/dataset.hpp"
#include "irsopt/ga.hpp"
#include "irsopt/irsnet.hpp"
#include "irsopt/training.hpp"

namespace irsopt::bench {

/// A solver under test. Exactly one of `solve` (per sample) or `solve_batch`
/// (whole test set at once) is set.
struct Method {
    std::string name;
    std::function<PhaseConfig(const FeatureVector&, std::size_t index)> solve;
    std::function<std::vector<PhaseConfig>(const Dataset&)> solve_batch;
    /// Scenario the method was built for; a mismatching dataset is refused.
    std::optional<std::size_t> m, n;
    std::optional<bool> interference;
};

Method constant_method(std::string name, PhaseConfig cfg);
/// GA per sample, seeded with derive_seed(ga.seed, index).
Method ga_method(std::string name, const SystemParams& p, GAParams ga);
/// Random phases plus GA tau, seeded with derive_seed(seed, index).
Method random_method(std::string name, const SystemParams& p, GAParams ga, std::uint64_t seed);
/// Batch inference of a trained network.
Method irsnet_method(std::string name, net::NetworkParams params);

struct TimingOptions {
    std::size_t repeats = 3; // timed passes; the median is reported
    bool warm_up = true;
};

struct MethodStats {
    std::string name;
    std::size_t samples = 0;
    double mean_throughput = 0.0;
    double std_error = 0.0;
    double mean_tau = 0.0;
    double time_ms = 0.0; // per sample; wall clock, not reproducible
    std::vector<PhaseConfig> configs;
    std::vector<double> throughputs;
};

/// Runs `method` on every sample and evaluates C with the evaluator. Per-sample
/// methods are timed sample by sample, batch methods once per pass and the
/// time divided by the sample count. Timing covers the solver only.
MethodStats evaluate_method(const Method& method, const Dataset& test, const SystemParams& p,
                            const TimingOptions& timing = {});

/// method / reference throughput. DegenerateReport when reference <= 0.
double rate_ratio(double method_throughput, double ga_throughput);
/// reference / method time. DegenerateReport when method time <= 0.
double time_ratio(double ga_time, double nn_time);

struct TrainingSummary {
    std::size_t train_samples = 0;
    std::size_t epochs = 0;
    std::size_t best_epoch = 0;
    bool early_stopped = false;
    double seconds = 0.0;
};

struct BenchReport {
    std::size_t m = 0, n = 0;
    double p_i_watts = 0.0;
    std::size_t samples = 0;
    std::uint64_t dataset_hash = 0;
    std::string reference; // method the ratios are taken against
    std::vector<MethodStats> methods;
    std::map<std::string, double> rate_ratios;
    std::map<std::string, double> time_ratios;
    std::optional<TrainingSummary> training; // set when the network was trained here
    nlohmann::json config_echo;
    std::string environment;
    bool partial = false;
    std::string failed_stage;
    std::string error;

    /// Fills rate_ratios/time_ratios against `reference`. Methods whose ratio
    /// is undefined are left out.
    void compute_ratios();
    nlohmann::json to_json() const;
};

/// One row per method and scenario.
struct CsvRow {
    std::string method;
    std::size_t m = 0, n = 0;
    std::string p_i_dbm; // "off" or a number
    std::size_t samples = 0;
    double mean_throughput = 0.0;
    double std_error = 0.0;
    double mean_tau = 0.0;
    double time_ms = 0.0;
    double rate_ratio = 0.0;
    double time_ratio = 0.0;
    std::string dataset_hash;
};

std::vector<CsvRow> report_rows(const BenchReport& report);
std::string rows_to_csv(const std::vector<CsvRow>& rows);
std::vector<CsvRow> rows_from_csv(const std::string& text);

/// One line per scenario; per method: throughput, rate ratio, time ratio columns.
std::string summary_csv(const std::vector<BenchReport>& reports);
std::string history_csv(const std::vector<net::EpochRecord>& history);

struct PlotPoint {
    double x = 0.0;
    double y = 0.0;
    std::string series;
};
std::string plot_csv(const std::vector<PlotPoint>& points);

/// "off" -> 0 W, otherwise dBm -> W.
double parse_power_dbm(const std::string& text);
std::string format_power_dbm(double watts);
std::string format_hash(std::uint64_t h);

struct DatasetSizes {
    std::size_t train = 100000;
    std::size_t validation = 10000;
    std::size_t test = 1000;
    std::uint64_t seed = 1;
};

struct ExperimentConfig {
    SystemParams system;
    DatasetSizes datasets;
    net::TrainConfig train;
    std::string checkpoint; // load instead of training when set
    bool relu_before_norm = true;
    bool normalize_inputs = false;
    GAParams ga;
    std::vector<std::string> methods{"ga5", "irsnet", "random"};
    std::string sweep_key; // "", "n", "m" or "pi_dbm"
    std::vector<std::string> sweep_values;
    std::filesystem::path output_dir = "bench_out";
    std::string environment;
    TimingOptions timing;
    std::size_t threads = 1;

    void validate() const;
};

/// Strict parse; unknown top-level keys are refused. IRSOPT_OUTPUT_DIR and
/// IRSOPT_THREADS override the document when set.
ExperimentConfig parse_experiment(const nlohmann::json& doc);
ExperimentConfig load_experiment(const std::filesystem::path& path);
nlohmann::json experiment_to_json(const ExperimentConfig& cfg);

struct ExperimentResult {
    std::vector<BenchReport> reports;
    std::vector<std::filesystem::path> files;
    bool partial() const;
};

using Logger = std::function<void(const std::string&)>;

/// Datasets, training, every method on the shared test set, then report.json,
/// results.csv, summary.csv, history_*.csv and plot_*.csv in output_dir.
/// Stage failures are recorded in the affected report instead of thrown.
ExperimentResult run_experiment(const ExperimentConfig& cfg, const Logger& log = {});

} // namespace irsopt::bench

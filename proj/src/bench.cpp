// SPDX-License-Identifier: Apache-2.0
#include "irsopt/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "irsopt/baselines.hpp"
#include "irsopt/checkpoint.hpp"
#include "irsopt/errors.hpp"

namespace irsopt::bench {

using nlohmann::json;
using Clock = std::chrono::steady_clock;

Method constant_method(std::string name, PhaseConfig cfg)
{
    Method m;
    m.name = std::move(name);
    m.n = cfg.n();
    m.solve = [cfg](const FeatureVector&, std::size_t) { return cfg; };
    return m;
}

Method ga_method(std::string name, const SystemParams& p, GAParams ga)
{
    ga.validate();
    Method m;
    m.name = std::move(name);
    m.solve = [p, ga](const FeatureVector& f, std::size_t index) {
        GAParams local = ga;
        local.seed = derive_seed(ga.seed, index);
        return ga_throughput(f, p, local).config;
    };
    return m;
}

Method random_method(std::string name, const SystemParams& p, GAParams ga, std::uint64_t seed)
{
    ga.validate();
    Method m;
    m.name = std::move(name);
    m.solve = [p, ga, seed](const FeatureVector& f, std::size_t index) {
        Rng rng(derive_seed(seed, index));
        return random_baseline(f, p, ga, rng).config;
    };
    return m;
}

Method irsnet_method(std::string name, net::NetworkParams params)
{
    Method m;
    m.name = std::move(name);
    m.m = params.arch.m;
    m.n = params.arch.n;
    m.interference = params.arch.interference;
    m.solve_batch = [params = std::move(params)](const Dataset& ds) {
        return net::forward(params, ds.matrix(), net::Mode::Inference);
    };
    return m;
}

namespace {

double median(std::vector<double> v)
{
    std::sort(v.begin(), v.end());
    const std::size_t k = v.size() / 2;
    return v.size() % 2 ? v[k] : 0.5 * (v[k - 1] + v[k]);
}

double elapsed_ms(Clock::time_point since)
{
    return std::chrono::duration<double, std::milli>(Clock::now() - since).count();
}

} // namespace

MethodStats evaluate_method(const Method& method, const Dataset& test, const SystemParams& p,
                            const TimingOptions& timing)
{
    if (test.size() == 0)
        throw ContractViolation("evaluate_method: empty test set");
    if (static_cast<bool>(method.solve) == static_cast<bool>(method.solve_batch))
        throw ContractViolation("evaluate_method: method '" + method.name + "' needs exactly one solver");
    const auto& h = test.header();
    if ((method.m && *method.m != h.m) || (method.n && *method.n != h.n)
        || (method.interference && *method.interference != h.interference))
        throw ContractViolation("evaluate_method: method '" + method.name + "' does not match the dataset scenario");
    if (p.m != h.m || p.n != h.n || p.interference() != h.interference)
        throw ContractViolation("evaluate_method: system parameters do not match the dataset scenario");

    const std::size_t repeats = std::max<std::size_t>(1, timing.repeats);
    const std::vector<FeatureVector> features = test.features();
    MethodStats s;
    s.name = method.name;
    s.samples = features.size();

    if (method.solve) {
        if (timing.warm_up)
            (void)method.solve(features.front(), 0);
        double total = 0.0;
        std::vector<double> runs(repeats);
        for (std::size_t i = 0; i < features.size(); ++i) {
            PhaseConfig cfg;
            for (std::size_t r = 0; r < repeats; ++r) {
                const auto t0 = Clock::now();
                cfg = method.solve(features[i], i);
                runs[r] = elapsed_ms(t0);
            }
            total += median(runs);
            s.configs.push_back(std::move(cfg));
        }
        s.time_ms = total / static_cast<double>(features.size());
    } else {
        if (timing.warm_up)
            (void)method.solve_batch(test);
        std::vector<double> runs(repeats);
        for (std::size_t r = 0; r < repeats; ++r) {
            const auto t0 = Clock::now();
            s.configs = method.solve_batch(test);
            runs[r] = elapsed_ms(t0);
        }
        if (s.configs.size() != features.size())
            throw ContractViolation("evaluate_method: batch solver returned the wrong number of configurations");
        s.time_ms = median(runs) / static_cast<double>(features.size());
    }

    double sum = 0.0, tau_sum = 0.0;
    for (std::size_t i = 0; i < features.size(); ++i) {
        const double c = throughput(features[i], s.configs[i], p);
        s.throughputs.push_back(c);
        sum += c;
        tau_sum += s.configs[i].tau;
    }
    const double count = static_cast<double>(features.size());
    s.mean_throughput = sum / count;
    s.mean_tau = tau_sum / count;
    if (features.size() > 1) {
        double ss = 0.0;
        for (double c : s.throughputs)
            ss += (c - s.mean_throughput) * (c - s.mean_throughput);
        s.std_error = std::sqrt(ss / (count - 1.0) / count);
    }
    return s;
}

double rate_ratio(double method_throughput, double ga_throughput)
{
    if (!(ga_throughput > 0.0))
        throw DegenerateReport("rate_ratio: reference throughput must be positive");
    return method_throughput / ga_throughput;
}

double time_ratio(double ga_time, double nn_time)
{
    if (!(nn_time > 0.0))
        throw DegenerateReport("time_ratio: method time must be positive");
    return ga_time / nn_time;
}

void BenchReport::compute_ratios()
{
    rate_ratios.clear();
    time_ratios.clear();
    auto ref = std::find_if(methods.begin(), methods.end(), [&](const MethodStats& s) { return s.name == reference; });
    if (ref == methods.end())
        return;
    for (const auto& s : methods) {
        try {
            rate_ratios[s.name] = rate_ratio(s.mean_throughput, ref->mean_throughput);
        } catch (const DegenerateReport&) {
        }
        try {
            time_ratios[s.name] = time_ratio(ref->time_ms, s.time_ms);
        } catch (const DegenerateReport&) {
        }
    }
}

double parse_power_dbm(const std::string& text)
{
    if (text == "off")
        return 0.0;
    std::size_t used = 0;
    double dbm = 0.0;
    try {
        dbm = std::stod(text, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used != text.size() || used == 0 || !std::isfinite(dbm))
        throw ParseError("power must be 'off' or a number in dBm, got '" + text + "'");
    return dbm_to_watts(dbm);
}

std::string format_power_dbm(double watts)
{
    if (!(watts > 0.0))
        return "off";
    std::ostringstream os;
    os << std::setprecision(12) << watts_to_dbm(watts);
    return os.str();
}

std::string format_hash(std::uint64_t h)
{
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

json BenchReport::to_json() const
{
    json j;
    j["scenario"] = {{"m", m}, {"n", n}, {"p_i_dbm", format_power_dbm(p_i_watts)}, {"p_i_watts", p_i_watts}};
    j["samples"] = samples;
    j["dataset_hash"] = format_hash(dataset_hash);
    j["reference"] = reference;
    j["methods"] = json::array();
    for (const auto& s : methods)
        j["methods"].push_back({{"name", s.name},
                                {"samples", s.samples},
                                {"mean_throughput", s.mean_throughput},
                                {"std_error", s.std_error},
                                {"mean_tau", s.mean_tau},
                                {"time_ms_per_sample", s.time_ms}});
    j["rate_ratios"] = rate_ratios;
    j["time_ratios"] = time_ratios;
    if (training)
        j["training"] = {{"train_samples", training->train_samples},
                         {"epochs", training->epochs},
                         {"best_epoch", training->best_epoch},
                         {"early_stopped", training->early_stopped},
                         {"seconds", training->seconds}};
    j["nondeterministic_fields"] = {"methods[].time_ms_per_sample", "time_ratios", "training.seconds"};
    j["config"] = config_echo;
    j["environment"] = environment;
    j["partial"] = partial;
    if (partial) {
        j["failed_stage"] = failed_stage;
        j["error"] = error;
    }
    return j;
}

namespace {

const char* kCsvHeader = "method,m,n,p_i_dbm,samples,mean_throughput,std_error,mean_tau,time_ms,rate_ratio,time_ratio,"
                         "dataset_hash";

std::string num(double x)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

std::vector<std::string> split_line(const std::string& line)
{
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ','))
        out.push_back(cell);
    if (!line.empty() && line.back() == ',')
        out.emplace_back();
    return out;
}

double parse_double(const std::string& s, std::size_t line)
{
    if (s == "nan")
        return std::nan("");
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used == s.size())
            return v;
    } catch (const std::exception&) {
    }
    throw ParseError("csv line " + std::to_string(line) + ": '" + s + "' is not a number");
}

std::size_t parse_size(const std::string& s, std::size_t line)
{
    try {
        std::size_t used = 0;
        const unsigned long long v = std::stoull(s, &used);
        if (used == s.size())
            return static_cast<std::size_t>(v);
    } catch (const std::exception&) {
    }
    throw ParseError("csv line " + std::to_string(line) + ": '" + s + "' is not a count");
}

} // namespace

std::vector<CsvRow> report_rows(const BenchReport& report)
{
    std::vector<CsvRow> rows;
    for (const auto& s : report.methods) {
        CsvRow r;
        r.method = s.name;
        r.m = report.m;
        r.n = report.n;
        r.p_i_dbm = format_power_dbm(report.p_i_watts);
        r.samples = s.samples;
        r.mean_throughput = s.mean_throughput;
        r.std_error = s.std_error;
        r.mean_tau = s.mean_tau;
        r.time_ms = s.time_ms;
        auto rr = report.rate_ratios.find(s.name);
        r.rate_ratio = rr == report.rate_ratios.end() ? std::nan("") : rr->second;
        auto tr = report.time_ratios.find(s.name);
        r.time_ratio = tr == report.time_ratios.end() ? std::nan("") : tr->second;
        r.dataset_hash = format_hash(report.dataset_hash);
        rows.push_back(std::move(r));
    }
    return rows;
}

std::string rows_to_csv(const std::vector<CsvRow>& rows)
{
    std::ostringstream os;
    os << kCsvHeader << '\n';
    for (const auto& r : rows)
        os << r.method << ',' << r.m << ',' << r.n << ',' << r.p_i_dbm << ',' << r.samples << ','
           << num(r.mean_throughput) << ',' << num(r.std_error) << ',' << num(r.mean_tau) << ',' << num(r.time_ms) << ','
           << num(r.rate_ratio) << ',' << num(r.time_ratio) << ',' << r.dataset_hash << '\n';
    return os.str();
}

std::vector<CsvRow> rows_from_csv(const std::string& text)
{
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line != kCsvHeader)
        throw ParseError("csv: unexpected header");
    std::vector<CsvRow> rows;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty())
            continue;
        const auto c = split_line(line);
        if (c.size() != 12)
            throw ParseError("csv line " + std::to_string(lineno) + ": expected 12 fields");
        CsvRow r;
        r.method = c[0];
        r.m = parse_size(c[1], lineno);
        r.n = parse_size(c[2], lineno);
        r.p_i_dbm = c[3];
        r.samples = parse_size(c[4], lineno);
        r.mean_throughput = parse_double(c[5], lineno);
        r.std_error = parse_double(c[6], lineno);
        r.mean_tau = parse_double(c[7], lineno);
        r.time_ms = parse_double(c[8], lineno);
        r.rate_ratio = parse_double(c[9], lineno);
        r.time_ratio = parse_double(c[10], lineno);
        r.dataset_hash = c[11];
        rows.push_back(std::move(r));
    }
    return rows;
}

std::string summary_csv(const std::vector<BenchReport>& reports)
{
    std::vector<std::string> names;
    for (const auto& rep : reports)
        for (const auto& s : rep.methods)
            if (std::find(names.begin(), names.end(), s.name) == names.end())
                names.push_back(s.name);
    std::ostringstream os;
    os << "m,n,p_i_dbm,samples,partial";
    for (const auto& n : names)
        os << ',' << n << "_throughput," << n << "_rate_ratio," << n << "_time_ms," << n << "_time_ratio";
    os << '\n';
    for (const auto& rep : reports) {
        os << rep.m << ',' << rep.n << ',' << format_power_dbm(rep.p_i_watts) << ',' << rep.samples << ','
           << (rep.partial ? 1 : 0);
        for (const auto& n : names) {
            auto s = std::find_if(rep.methods.begin(), rep.methods.end(), [&](const MethodStats& x) { return x.name == n; });
            auto rr = rep.rate_ratios.find(n);
            auto tr = rep.time_ratios.find(n);
            os << ',' << (s == rep.methods.end() ? "" : num(s->mean_throughput)) << ','
               << (rr == rep.rate_ratios.end() ? "" : num(rr->second)) << ','
               << (s == rep.methods.end() ? "" : num(s->time_ms)) << ','
               << (tr == rep.time_ratios.end() ? "" : num(tr->second));
        }
        os << '\n';
    }
    return os.str();
}

std::string history_csv(const std::vector<net::EpochRecord>& history)
{
    std::ostringstream os;
    os << "epoch,train_loss,validation_loss,learning_rate\n";
    for (const auto& e : history)
        os << e.epoch << ',' << num(e.train_loss) << ',' << num(e.validation_loss) << ',' << num(e.learning_rate)
           << '\n';
    return os.str();
}

std::string plot_csv(const std::vector<PlotPoint>& points)
{
    std::ostringstream os;
    os << "x,y,series\n";
    for (const auto& p : points)
        os << num(p.x) << ',' << num(p.y) << ',' << p.series << '\n';
    return os.str();
}

// ---------------------------------------------------------------- config

void ExperimentConfig::validate() const
{
    system.validate();
    train.validate();
    ga.validate();
    if (datasets.test == 0)
        throw ContractViolation("experiment: test set must not be empty");
    if (methods.empty())
        throw ContractViolation("experiment: no methods requested");
    for (const auto& m : methods) {
        if (m == "irsnet") {
            if (checkpoint.empty() && (datasets.train < 2 || datasets.validation == 0))
                throw ContractViolation("experiment: irsnet needs a checkpoint or training and validation sets");
        } else if (m != "ga5" && m != "ga20" && m != "random") {
            throw ContractViolation("experiment: unknown method '" + m + "'");
        }
    }
    if (!sweep_key.empty() && sweep_key != "n" && sweep_key != "m" && sweep_key != "pi_dbm")
        throw ContractViolation("experiment: sweep key must be n, m or pi_dbm");
    if (!sweep_key.empty() && sweep_values.empty())
        throw ContractViolation("experiment: sweep has no values");
    if (threads < 1)
        throw ContractViolation("experiment: threads must be at least 1");
}

namespace {

void check_keys(const json& obj, std::initializer_list<const char*> allowed, const std::string& where)
{
    if (!obj.is_object())
        throw ParseError("experiment: '" + where + "' must be an object");
    for (auto it = obj.begin(); it != obj.end(); ++it)
        if (std::find_if(allowed.begin(), allowed.end(), [&](const char* k) { return it.key() == k; }) == allowed.end())
            throw ParseError("experiment: unknown key '" + where + (where.empty() ? "" : ".") + it.key() + "'");
}

template <typename T>
void read(const json& obj, const char* key, T& out, const std::string& where)
{
    if (!obj.contains(key))
        return;
    try {
        out = obj.at(key).get<T>();
    } catch (const json::exception&) {
        throw ParseError("experiment: '" + where + "." + key + "' has the wrong type");
    }
}

std::string power_text(const json& v, const std::string& where)
{
    if (v.is_string())
        return v.get<std::string>();
    if (v.is_number()) {
        std::ostringstream os;
        os << std::setprecision(17) << v.get<double>();
        return os.str();
    }
    throw ParseError("experiment: '" + where + "' must be \"off\" or a number in dBm");
}

SystemParams scenario(const ExperimentConfig& cfg, const std::string& sweep_value)
{
    SystemParams p = cfg.system;
    if (cfg.sweep_key == "n")
        p.n = std::stoul(sweep_value);
    else if (cfg.sweep_key == "m")
        p.m = std::stoul(sweep_value);
    else if (cfg.sweep_key == "pi_dbm")
        p.p_i = parse_power_dbm(sweep_value);
    p.validate();
    return p;
}

} // namespace

ExperimentConfig parse_experiment(const json& doc)
{
    ExperimentConfig cfg;
    check_keys(doc, {"system", "datasets", "train", "ga", "methods", "sweep", "output_dir", "environment", "timing",
                     "threads"},
               "");
    if (doc.contains("system")) {
        const json& s = doc["system"];
        check_keys(s, {"m", "n", "p_b", "pi_dbm", "noise_dbm", "eta", "t_c", "l_c", "alpha_irs", "alpha_direct",
                       "distances"},
                   "system");
        read(s, "m", cfg.system.m, "system");
        read(s, "n", cfg.system.n, "system");
        read(s, "p_b", cfg.system.p_b, "system");
        read(s, "eta", cfg.system.eta, "system");
        read(s, "t_c", cfg.system.t_c, "system");
        read(s, "l_c", cfg.system.l_c, "system");
        read(s, "alpha_irs", cfg.system.alpha_irs, "system");
        read(s, "alpha_direct", cfg.system.alpha_direct, "system");
        if (s.contains("pi_dbm"))
            cfg.system.p_i = parse_power_dbm(power_text(s["pi_dbm"], "system.pi_dbm"));
        if (s.contains("noise_dbm")) {
            double dbm = 0.0;
            read(s, "noise_dbm", dbm, "system");
            cfg.system.sigma_z2 = dbm_to_watts(dbm);
        }
        if (s.contains("distances")) {
            const json& d = s["distances"];
            check_keys(d, {"rs", "is", "rd", "ir", "sd", "bs", "id", "br"}, "system.distances");
            auto& dd = cfg.system.d;
            read(d, "rs", dd.rs, "system.distances");
            read(d, "is", dd.is, "system.distances");
            read(d, "rd", dd.rd, "system.distances");
            read(d, "ir", dd.ir, "system.distances");
            read(d, "sd", dd.sd, "system.distances");
            read(d, "bs", dd.bs, "system.distances");
            read(d, "id", dd.id, "system.distances");
            read(d, "br", dd.br, "system.distances");
        }
    }
    if (doc.contains("datasets")) {
        const json& d = doc["datasets"];
        check_keys(d, {"train", "validation", "test", "seed"}, "datasets");
        read(d, "train", cfg.datasets.train, "datasets");
        read(d, "validation", cfg.datasets.validation, "datasets");
        read(d, "test", cfg.datasets.test, "datasets");
        read(d, "seed", cfg.datasets.seed, "datasets");
    }
    cfg.train = net::TrainConfig::desk();
    if (doc.contains("train")) {
        const json& t = doc["train"];
        check_keys(t, {"batch_size", "max_epochs", "learning_rate", "decay_rate", "decay_steps", "patience", "seed",
                       "shuffle", "checkpoint", "relu_before_norm", "normalize_inputs"},
                   "train");
        read(t, "batch_size", cfg.train.batch_size, "train");
        read(t, "max_epochs", cfg.train.max_epochs, "train");
        read(t, "learning_rate", cfg.train.learning_rate, "train");
        read(t, "decay_rate", cfg.train.decay_rate, "train");
        read(t, "decay_steps", cfg.train.decay_steps, "train");
        read(t, "patience", cfg.train.patience, "train");
        read(t, "seed", cfg.train.seed, "train");
        read(t, "shuffle", cfg.train.shuffle, "train");
        read(t, "checkpoint", cfg.checkpoint, "train");
        read(t, "relu_before_norm", cfg.relu_before_norm, "train");
        read(t, "normalize_inputs", cfg.normalize_inputs, "train");
    }
    if (doc.contains("ga")) {
        const json& g = doc["ga"];
        check_keys(g, {"population", "crossover_prob", "mutation_prob", "mutation_scale", "tournament", "elitism",
                       "seed"},
                   "ga");
        read(g, "population", cfg.ga.population, "ga");
        read(g, "crossover_prob", cfg.ga.crossover_prob, "ga");
        if (g.contains("mutation_prob") && !g["mutation_prob"].is_null()) {
            double pm = 0.0;
            read(g, "mutation_prob", pm, "ga");
            cfg.ga.mutation_prob = pm;
        }
        read(g, "mutation_scale", cfg.ga.mutation_scale, "ga");
        read(g, "tournament", cfg.ga.tournament, "ga");
        read(g, "elitism", cfg.ga.elitism, "ga");
        read(g, "seed", cfg.ga.seed, "ga");
    }
    read(doc, "methods", cfg.methods, "");
    if (doc.contains("sweep")) {
        const json& s = doc["sweep"];
        check_keys(s, {"key", "values"}, "sweep");
        read(s, "key", cfg.sweep_key, "sweep");
        if (s.contains("values")) {
            if (!s["values"].is_array())
                throw ParseError("experiment: 'sweep.values' must be an array");
            for (const auto& v : s["values"])
                cfg.sweep_values.push_back(power_text(v, "sweep.values"));
        }
    }
    if (doc.contains("output_dir")) {
        std::string dir;
        read(doc, "output_dir", dir, "");
        cfg.output_dir = dir;
    }
    read(doc, "environment", cfg.environment, "");
    if (doc.contains("timing")) {
        const json& t = doc["timing"];
        check_keys(t, {"repeats", "warm_up"}, "timing");
        read(t, "repeats", cfg.timing.repeats, "timing");
        read(t, "warm_up", cfg.timing.warm_up, "timing");
    }
    read(doc, "threads", cfg.threads, "");

    if (const char* dir = std::getenv("IRSOPT_OUTPUT_DIR"); dir && *dir)
        cfg.output_dir = dir;
    if (const char* th = std::getenv("IRSOPT_THREADS"); th && *th) {
        try {
            cfg.threads = std::stoul(th);
        } catch (const std::exception&) {
            throw ParseError(std::string("IRSOPT_THREADS must be a positive integer, got '") + th + "'");
        }
    }
    try {
        cfg.validate();
    } catch (const ContractViolation& e) {
        throw ParseError(e.what());
    }
    return cfg;
}

ExperimentConfig load_experiment(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw IoError("cannot open " + path.string());
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ParseError(path.string() + ": invalid JSON: " + e.what());
    }
    return parse_experiment(doc);
}

json experiment_to_json(const ExperimentConfig& cfg)
{
    const auto& s = cfg.system;
    json j;
    j["system"] = {{"m", s.m},
                   {"n", s.n},
                   {"p_b", s.p_b},
                   {"pi_dbm", format_power_dbm(s.p_i)},
                   {"noise_dbm", watts_to_dbm(s.sigma_z2)},
                   {"eta", s.eta},
                   {"t_c", s.t_c},
                   {"l_c", s.l_c},
                   {"alpha_irs", s.alpha_irs},
                   {"alpha_direct", s.alpha_direct},
                   {"distances",
                    {{"rs", s.d.rs},
                     {"is", s.d.is},
                     {"rd", s.d.rd},
                     {"ir", s.d.ir},
                     {"sd", s.d.sd},
                     {"bs", s.d.bs},
                     {"id", s.d.id},
                     {"br", s.d.br}}}};
    j["datasets"] = {{"train", cfg.datasets.train},
                     {"validation", cfg.datasets.validation},
                     {"test", cfg.datasets.test},
                     {"seed", cfg.datasets.seed}};
    j["train"] = {{"batch_size", cfg.train.batch_size},     {"max_epochs", cfg.train.max_epochs},
                  {"learning_rate", cfg.train.learning_rate}, {"decay_rate", cfg.train.decay_rate},
                  {"decay_steps", cfg.train.decay_steps},   {"patience", cfg.train.patience},
                  {"seed", cfg.train.seed},                 {"shuffle", cfg.train.shuffle},
                  {"checkpoint", cfg.checkpoint},           {"relu_before_norm", cfg.relu_before_norm},
                  {"normalize_inputs", cfg.normalize_inputs}};
    j["ga"] = {{"population", cfg.ga.population},
               {"crossover_prob", cfg.ga.crossover_prob},
               {"mutation_prob", cfg.ga.mutation_prob ? json(*cfg.ga.mutation_prob) : json(nullptr)},
               {"mutation_scale", cfg.ga.mutation_scale},
               {"tournament", cfg.ga.tournament},
               {"elitism", cfg.ga.elitism},
               {"seed", cfg.ga.seed}};
    j["methods"] = cfg.methods;
    if (!cfg.sweep_key.empty())
        j["sweep"] = {{"key", cfg.sweep_key}, {"values", cfg.sweep_values}};
    j["output_dir"] = cfg.output_dir.string();
    j["environment"] = cfg.environment;
    j["timing"] = {{"repeats", cfg.timing.repeats}, {"warm_up", cfg.timing.warm_up}};
    j["threads"] = cfg.threads;
    return j;
}

// ---------------------------------------------------------------- runner

bool ExperimentResult::partial() const
{
    return std::any_of(reports.begin(), reports.end(), [](const BenchReport& r) { return r.partial; });
}

namespace {

void write_text(const std::filesystem::path& path, const std::string& text, std::vector<std::filesystem::path>& files)
{
    std::ofstream out(path, std::ios::trunc);
    if (!out)
        throw IoError("cannot open " + path.string() + " for writing");
    out << text;
    if (!out)
        throw IoError("write failed: " + path.string());
    files.push_back(path);
}

std::string scenario_tag(const SystemParams& p)
{
    return "m" + std::to_string(p.m) + "_n" + std::to_string(p.n) + "_pi" + format_power_dbm(p.p_i);
}

double sweep_x(const ExperimentConfig& cfg, const SystemParams& p)
{
    if (cfg.sweep_key == "m")
        return static_cast<double>(p.m);
    if (cfg.sweep_key == "pi_dbm")
        return p.p_i > 0.0 ? watts_to_dbm(p.p_i) : -std::numeric_limits<double>::infinity();
    return static_cast<double>(p.n);
}

} // namespace

ExperimentResult run_experiment(const ExperimentConfig& cfg, const Logger& log)
{
    cfg.validate();
    auto say = [&](const std::string& msg) {
        if (log)
            log(msg);
    };
    std::filesystem::create_directories(cfg.output_dir);

    std::vector<std::string> points = cfg.sweep_values;
    if (cfg.sweep_key.empty())
        points = {""};

    ExperimentResult result;
    for (const auto& point : points) {
        BenchReport rep;
        rep.config_echo = experiment_to_json(cfg);
        rep.environment = cfg.environment;
        std::string stage = "config";
        try {
            const SystemParams p = scenario(cfg, point);
            rep.m = p.m;
            rep.n = p.n;
            rep.p_i_watts = p.p_i;
            const std::string tag = scenario_tag(p);

            stage = "datasets";
            say(tag + ": generating datasets");
            const Dataset test = generate_dataset(p, cfg.datasets.test, derive_seed(cfg.datasets.seed, 3));
            rep.samples = test.size();
            rep.dataset_hash = dataset_hash(test);

            std::vector<Method> methods;
            for (const auto& name : cfg.methods) {
                if (name == "ga5" || name == "ga20") {
                    GAParams ga = cfg.ga;
                    ga.generations = name == "ga5" ? 5 : 20;
                    methods.push_back(ga_method(name, p, ga));
                } else if (name == "random") {
                    GAParams ga = cfg.ga;
                    ga.generations = 5;
                    methods.push_back(random_method(name, p, ga, derive_seed(cfg.ga.seed, 0x7a4d)));
                } else if (name == "irsnet") {
                    net::NetworkParams params;
                    if (!cfg.checkpoint.empty()) {
                        stage = "checkpoint";
                        params = net::load_checkpoint(cfg.checkpoint);
                    } else {
                        stage = "training";
                        const Dataset train = generate_dataset(p, cfg.datasets.train, derive_seed(cfg.datasets.seed, 1));
                        const Dataset val =
                            generate_dataset(p, cfg.datasets.validation, derive_seed(cfg.datasets.seed, 2));
                        net::Architecture arch = net::make_architecture(p);
                        arch.relu_before_norm = cfg.relu_before_norm;
                        arch.normalize_inputs = cfg.normalize_inputs;
                        say(tag + ": training IRS-Net");
                        const auto started = std::chrono::steady_clock::now();
                        net::TrainResult tr =
                            net::train(train, val, net::init_network(arch, cfg.train.seed), cfg.train, p,
                                       [&](const net::EpochRecord& e) {
                                           say(tag + ": epoch " + std::to_string(e.epoch) + " train "
                                               + num(e.train_loss) + " validation " + num(e.validation_loss));
                                       });
                        rep.training = TrainingSummary{
                            train.size(), tr.history.size(), tr.best_epoch, tr.early_stopped,
                            std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count()};
                        write_text(cfg.output_dir / ("history_" + tag + ".csv"), history_csv(tr.history), result.files);
                        std::vector<PlotPoint> loss;
                        for (const auto& e : tr.history) {
                            loss.push_back({static_cast<double>(e.epoch), e.train_loss, "train"});
                            loss.push_back({static_cast<double>(e.epoch), e.validation_loss, "validation"});
                        }
                        write_text(cfg.output_dir / ("plot_loss_" + tag + ".csv"), plot_csv(loss), result.files);
                        if (tr.aborted)
                            throw NumericDomainError("training", tr.diagnostic);
                        params = std::move(tr.params);
                        net::save_checkpoint(params, cfg.output_dir / ("irsnet_" + tag + ".json"));
                        result.files.push_back(cfg.output_dir / ("irsnet_" + tag + ".json"));
                    }
                    methods.push_back(irsnet_method(name, std::move(params)));
                }
            }

            stage = "evaluation";
            for (const auto& m : methods) {
                stage = "evaluation:" + m.name;
                say(tag + ": evaluating " + m.name);
                rep.methods.push_back(evaluate_method(m, test, p, cfg.timing));
            }
            rep.reference = std::find(cfg.methods.begin(), cfg.methods.end(), "ga5") != cfg.methods.end() ? "ga5"
                                                                                                          : cfg.methods.front();
            rep.compute_ratios();
        } catch (const std::exception& e) {
            rep.partial = true;
            rep.failed_stage = stage;
            rep.error = e.what();
            rep.compute_ratios();
            say("stage " + stage + " failed: " + e.what());
        }
        result.reports.push_back(std::move(rep));
    }

    json reports = json::array();
    std::vector<CsvRow> rows;
    std::map<std::string, std::vector<PlotPoint>> plots;
    for (const auto& rep : result.reports) {
        reports.push_back(rep.to_json());
        for (auto& r : report_rows(rep))
            rows.push_back(std::move(r));
        SystemParams p = cfg.system;
        p.m = rep.m;
        p.n = rep.n;
        p.p_i = rep.p_i_watts;
        const double x = sweep_x(cfg, p);
        for (const auto& s : rep.methods) {
            plots["throughput"].push_back({x, s.mean_throughput, s.name});
            plots["tau"].push_back({x, s.mean_tau, s.name});
            if (auto it = rep.rate_ratios.find(s.name); it != rep.rate_ratios.end())
                plots["rate_ratio"].push_back({x, it->second, s.name});
        }
    }
    json doc = {{"reports", reports}, {"partial", result.partial()}};
    write_text(cfg.output_dir / "report.json", doc.dump(2) + "\n", result.files);
    write_text(cfg.output_dir / "results.csv", rows_to_csv(rows), result.files);
    write_text(cfg.output_dir / "summary.csv", summary_csv(result.reports), result.files);
    for (const auto& [name, pts] : plots)
        write_text(cfg.output_dir / ("plot_" + name + ".csv"), plot_csv(pts), result.files);
    return result;
}

} // namespace irsopt::bench

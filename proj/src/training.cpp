// SPDX-License-Identifier: Apache-2.0
#include "irsopt/training.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "irsopt/errors.hpp"
#include "irsopt/rng.hpp"
#include "irsopt/throughput_graph.hpp"
#include "irsopt/units.hpp"

namespace irsopt::net {

TrainConfig TrainConfig::reference() { return TrainConfig{}; }

TrainConfig TrainConfig::desk()
{
    TrainConfig cfg;
    cfg.max_epochs = 100;
    return cfg;
}

void TrainConfig::validate() const
{
    if (batch_size < 1)
        throw ContractViolation("TrainConfig: batch size must be >= 1");
    if (patience < 1)
        throw ContractViolation("TrainConfig: patience must be >= 1");
    // lr = 0 is allowed: it freezes the weights, which the early-stop checks rely on.
    if (!(learning_rate >= 0.0))
        throw ContractViolation("TrainConfig: learning rate must be >= 0");
    if (decay_steps < 1)
        throw ContractViolation("TrainConfig: decay_steps must be >= 1");
}

void adam_step(std::span<Tensor* const> params, std::span<const Tensor> grads, AdamState& state, double lr)
{
    if (params.size() != grads.size())
        throw ContractViolation("adam_step: parameter and gradient counts differ");
    for (std::size_t i = 0; i < params.size(); ++i) {
        if (params[i]->rows() != grads[i].rows() || params[i]->cols() != grads[i].cols())
            throw ContractViolation("adam_step: gradient shape mismatch at tensor " + std::to_string(i));
        if (!grads[i].allFinite())
            throw NumericDomainError("adam_step", "non-finite gradient in tensor " + std::to_string(i));
    }
    if (state.first.empty()) {
        for (auto* p : params) {
            state.first.push_back(Tensor::Zero(p->rows(), p->cols()));
            state.second.push_back(Tensor::Zero(p->rows(), p->cols()));
        }
    } else if (state.first.size() != params.size()) {
        throw ContractViolation("adam_step: state belongs to a different parameter set");
    }

    ++state.step;
    const double t = static_cast<double>(state.step);
    const double correction1 = 1.0 - std::pow(state.beta1, t);
    const double correction2 = 1.0 - std::pow(state.beta2, t);
    for (std::size_t i = 0; i < params.size(); ++i) {
        auto m = state.first[i].array();
        auto v = state.second[i].array();
        const auto g = grads[i].array();
        m = state.beta1 * m + (1.0 - state.beta1) * g;
        v = state.beta2 * v + (1.0 - state.beta2) * g.square();
        params[i]->array() -= lr * (m / correction1) / ((v / correction2).sqrt() + state.epsilon);
    }
}

double lr_schedule(std::uint64_t step, double initial, double decay_rate, std::uint64_t decay_steps)
{
    if (decay_steps == 0)
        throw ContractViolation("lr_schedule: decay_steps must be >= 1");
    return initial * std::pow(decay_rate, static_cast<double>(step / decay_steps));
}

TrainingGraph::TrainingGraph(const Architecture& arch, const SystemParams& system) : arch_(arch)
{
    if (arch.m != system.m || arch.n != system.n || arch.interference != system.interference())
        throw ContractViolation("TrainingGraph: architecture does not match the system parameters");
    auto& t = tape_;
    features_ = t.constant("features");
    input_ = arch.normalize_inputs ? t.constant("input") : features_;

    ad::Var x = input_;
    for (std::size_t i = 0; i < arch.hidden.size(); ++i) {
        const auto tag = std::to_string(i);
        const ad::Var w = t.parameter("hidden" + tag + ".weight");
        const ad::Var b = t.parameter("hidden" + tag + ".bias");
        const ad::Var gamma = t.parameter("norm" + tag + ".gamma");
        const ad::Var beta = t.parameter("norm" + tag + ".beta");
        params_.insert(params_.end(), {w, b, gamma, beta});

        auto normalize = [&](ad::Var h) {
            const ad::Var mean = t.col_mean(h);
            const ad::Var centered = t.sub(h, mean);
            const ad::Var var = t.col_mean(t.square(centered));
            stats_.emplace_back(mean, var);
            const ad::Var xhat = t.div(centered, t.sqrt(t.shift(var, 1e-3)));
            return t.add(t.mul(xhat, gamma), beta);
        };
        const ad::Var z = t.add(t.matmul(x, w), b);
        x = arch.relu_before_norm ? normalize(t.relu(z)) : t.relu(normalize(z));
    }
    const ad::Var w = t.parameter("output.weight");
    const ad::Var b = t.parameter("output.bias");
    params_.insert(params_.end(), {w, b});
    const ad::Var s = t.sigmoid(t.add(t.matmul(x, w), b));

    const std::size_t n = arch.n;
    const ad::Var theta_et = t.scale(t.slice_cols(s, 0, n), kTwoPi);
    const ad::Var theta_it = t.scale(t.slice_cols(s, n, n), kTwoPi);
    const ad::Var tau = t.clamp(t.slice_cols(s, 2 * n, 1), kTauEpsilon, 1.0 - kTauEpsilon);
    const FeatureLayout layout(arch.m, arch.n, arch.interference);
    loss_ = ad::record_loss(t, ad::record_throughput(t, features_, theta_et, theta_it, tau, system, layout));
}

double TrainingGraph::forward(const NetworkParams& params, const Tensor& features)
{
    if (features.rows() < 2)
        throw ContractViolation("TrainingGraph: batch-norm training needs a batch of at least 2");
    const auto tensors = params.trainable();
    if (tensors.size() != params_.size())
        throw ContractViolation("TrainingGraph: parameters do not match the recorded architecture");
    for (std::size_t i = 0; i < tensors.size(); ++i)
        tape_.bind(params_[i], *tensors[i]);
    // Batch-norm epsilon is baked into the graph; keep the params consistent with it.
    for (const auto& bn : params.norms)
        if (bn.epsilon != 1e-3)
            throw ContractViolation("TrainingGraph: batch-norm epsilon must be 1e-3");
    tape_.bind(features_, features);
    if (arch_.normalize_inputs) {
        Tensor scaled = features;
        scaled.rowwise() -= params.input_shift.row(0);
        scaled.array().rowwise() *= params.input_scale.row(0).array();
        tape_.bind(input_, std::move(scaled));
    }
    return tape_.forward_scalar(loss_);
}

std::vector<Tensor> TrainingGraph::backward()
{
    tape_.backward(loss_);
    std::vector<Tensor> grads;
    grads.reserve(params_.size());
    for (const auto v : params_)
        grads.push_back(tape_.grad(v));
    return grads;
}

std::vector<std::pair<Tensor, Tensor>> TrainingGraph::batch_statistics() const
{
    std::vector<std::pair<Tensor, Tensor>> out;
    for (const auto& [mean, var] : stats_)
        out.emplace_back(tape_.value(mean), tape_.value(var));
    return out;
}

double dataset_loss(const NetworkParams& params, const Dataset& data, const SystemParams& system)
{
    const auto cfgs = forward(params, data.matrix(), Mode::Inference);
    const auto features = data.features();
    return batch_loss(features, cfgs, system);
}

TrainResult train(const Dataset& train_set, const Dataset& validation_set, NetworkParams params, const TrainConfig& cfg,
                  const SystemParams& system, const EpochCallback& on_epoch)
{
    cfg.validate();
    const auto& arch = params.arch;
    if (!train_set.matches(arch.m, arch.n, arch.interference) || !validation_set.matches(arch.m, arch.n, arch.interference))
        throw ContractViolation("train: dataset (M, N, interference) does not match the architecture");
    if (train_set.size() < 2)
        throw ContractViolation("train: need at least 2 training samples");

    if (arch.normalize_inputs)
        fit_input_normalization(params, train_set.matrix());

    TrainingGraph graph(arch, system);
    AdamState adam;
    Rng shuffle_rng(derive_seed(cfg.seed, 0x5eed));

    TrainResult result;
    result.params = params;
    double best_validation = std::numeric_limits<double>::infinity();
    double best_train = std::numeric_limits<double>::infinity();
    std::size_t stale = 0;
    std::uint64_t step = 0;

    std::vector<std::size_t> order(train_set.size());
    std::iota(order.begin(), order.end(), 0);
    const std::size_t fs = train_set.feature_length();
    Tensor batch;

    for (std::size_t epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
        if (cfg.shuffle)
            for (std::size_t i = order.size() - 1; i > 0; --i)
                std::swap(order[i], order[shuffle_rng.index(i + 1)]);

        double loss_sum = 0.0;
        std::size_t seen = 0;
        double lr = lr_schedule(step, cfg.learning_rate, cfg.decay_rate, cfg.decay_steps);
        for (std::size_t first = 0; first < order.size(); first += cfg.batch_size) {
            const std::size_t count = std::min(cfg.batch_size, order.size() - first);
            if (count < 2)
                break; // a single leftover sample has no batch statistics
            batch.resize(static_cast<Eigen::Index>(count), static_cast<Eigen::Index>(fs));
            for (std::size_t r = 0; r < count; ++r) {
                const auto row = train_set.row(order[first + r]);
                for (std::size_t c = 0; c < fs; ++c)
                    batch(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = row[c];
            }

            lr = lr_schedule(step, cfg.learning_rate, cfg.decay_rate, cfg.decay_steps);
            double loss = 0.0;
            try {
                loss = graph.forward(params, batch);
                if (!std::isfinite(loss))
                    throw NumericDomainError("loss", "non-finite training loss");
                const auto grads = graph.backward();
                const auto tensors = params.trainable();
                adam_step(tensors, grads, adam, lr);
            } catch (const NumericDomainError& e) {
                result.aborted = true;
                result.diagnostic = "epoch " + std::to_string(epoch) + ", step " + std::to_string(step) + ": " + e.what();
                return result;
            }
            const auto stats = graph.batch_statistics();
            for (std::size_t i = 0; i < params.norms.size(); ++i) {
                auto& bn = params.norms[i];
                bn.running_mean = bn.momentum * bn.running_mean + (1.0 - bn.momentum) * stats[i].first;
                bn.running_var = bn.momentum * bn.running_var + (1.0 - bn.momentum) * stats[i].second;
            }
            loss_sum += loss * static_cast<double>(count);
            seen += count;
            ++step;
        }

        EpochRecord rec;
        rec.epoch = epoch;
        rec.train_loss = loss_sum / static_cast<double>(seen);
        rec.validation_loss = dataset_loss(params, validation_set, system);
        rec.learning_rate = lr;
        result.history.push_back(rec);
        if (on_epoch)
            on_epoch(rec);

        if (!std::isfinite(rec.validation_loss)) {
            result.aborted = true;
            result.diagnostic = "epoch " + std::to_string(epoch) + ": non-finite validation loss";
            return result;
        }
        if (rec.validation_loss < best_validation) {
            best_validation = rec.validation_loss;
            result.params = params;
            result.best_epoch = epoch;
        }
        if (rec.train_loss < best_train) {
            best_train = rec.train_loss;
            stale = 0;
        } else if (++stale >= cfg.patience) {
            result.early_stopped = true;
            break;
        }
    }
    return result;
}

} // namespace irsopt::net

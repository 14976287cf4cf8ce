// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "irsopt/autodiff.hpp"
#include "irsopt/dataset.hpp"
#include "irsopt/irsnet.hpp"

namespace irsopt::net {

struct TrainConfig {
    std::size_t batch_size = 3000;
    std::size_t max_epochs = 500;
    double learning_rate = 1e-3;
    double decay_rate = 0.5;
    std::size_t decay_steps = 50000;
    std::size_t patience = 20;
    std::uint64_t seed = 1;
    bool shuffle = true;
    std::string train_path;
    std::string validation_path;

    /// Full-size hyper-parameters (1.2e6 training samples, 500 epochs).
    static TrainConfig reference();
    /// Desk-scale preset: 100 epochs (paired with 1e5 training samples).
    static TrainConfig desk();

    void validate() const;
};

struct AdamState {
    std::vector<Tensor> first;
    std::vector<Tensor> second;
    std::uint64_t step = 0;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

/// Bias-corrected Adam update of every tensor in `params`. Moments are
/// allocated (zeroed) on the first call. A non-finite gradient throws
/// NumericDomainError and leaves parameters and state untouched.
void adam_step(std::span<Tensor* const> params, std::span<const Tensor> grads, AdamState& state, double lr);

/// initial * decay_rate ^ floor(step / decay_steps).
double lr_schedule(std::uint64_t step, double initial, double decay_rate, std::uint64_t decay_steps);

/// Network forward pass plus throughput loss recorded on one tape, reused
/// for every minibatch.
class TrainingGraph {
public:
    TrainingGraph(const Architecture& arch, const SystemParams& system);

    /// Binds `params` and a batch of raw features, runs forward and returns
    /// the loss -mean(C).
    double forward(const NetworkParams& params, const Tensor& features);
    /// Gradients for params.trainable(), in order. Requires forward().
    std::vector<Tensor> backward();
    /// Batch mean and (biased) variance of each hidden BN layer from the last forward.
    std::vector<std::pair<Tensor, Tensor>> batch_statistics() const;

    ad::Tape& tape() { return tape_; }
    ad::Var loss() const { return loss_; }
    std::span<const ad::Var> parameter_vars() const { return params_; }

private:
    Architecture arch_;
    ad::Tape tape_;
    ad::Var input_;
    ad::Var features_;
    std::vector<ad::Var> params_;
    std::vector<std::pair<ad::Var, ad::Var>> stats_;
    ad::Var loss_;
};

struct EpochRecord {
    std::size_t epoch = 0;
    double train_loss = 0.0;
    double validation_loss = 0.0;
    double learning_rate = 0.0;
};

struct TrainResult {
    NetworkParams params;              // checkpoint with the best validation loss
    std::vector<EpochRecord> history;
    std::size_t best_epoch = 0;
    bool early_stopped = false;
    bool aborted = false;
    std::string diagnostic;
};

using EpochCallback = std::function<void(const EpochRecord&)>;

/// Minibatch training on -mean throughput. Stops after max_epochs, or once
/// the training loss has failed to improve for `patience` consecutive
/// epochs. Returns the epoch with the lowest validation loss. A non-finite
/// loss or gradient aborts training and returns the last good checkpoint.
TrainResult train(const Dataset& train_set, const Dataset& validation_set, NetworkParams params, const TrainConfig& cfg,
                  const SystemParams& system, const EpochCallback& on_epoch = {});

/// -mean C of inference-mode outputs over a whole dataset, evaluated with the
/// closed-form evaluator.
double dataset_loss(const NetworkParams& params, const Dataset& data, const SystemParams& system);

} // namespace irsopt::net

// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "irsopt/evaluator.hpp"

namespace irsopt::net {

using Tensor = Eigen::MatrixXd;

/// Shape and wiring of an IRS-Net instance.
struct Architecture {
    std::size_t m = 0;              // PB antennas of the scenario the net serves
    std::size_t n = 0;              // IRS elements; output width is 2N + 1
    bool interference = false;
    std::size_t input_size = 0;     // F_s
    std::vector<std::size_t> hidden;
    /// Hidden block order: affine -> relu -> batch-norm when true,
    /// affine -> batch-norm -> relu when false.
    bool relu_before_norm = true;
    /// Standardize each input feature with training-set statistics.
    bool normalize_inputs = false;

    std::size_t output_size() const { return 2 * n + 1; }
};

struct DenseLayer {
    Tensor weight; // in x out
    Tensor bias;   // 1 x out
};

struct BatchNorm {
    Tensor gamma;
    Tensor beta;
    Tensor running_mean;
    Tensor running_var;
    double momentum = 0.99;
    double epsilon = 1e-3;
};

struct NetworkParams {
    Architecture arch;
    std::vector<DenseLayer> hidden;
    std::vector<BatchNorm> norms;
    DenseLayer output;
    Tensor input_shift; // 1 x F_s, used when arch.normalize_inputs
    Tensor input_scale; // 1 x F_s
    std::uint64_t seed = 0;

    /// Trainable tensors in a fixed order: per hidden layer W, b, gamma, beta;
    /// then the output W, b.
    std::vector<Tensor*> trainable();
    std::vector<const Tensor*> trainable() const;
    std::size_t parameter_count() const;
};

/// Layer-width multipliers (n_1..n_5) for a scenario, picked from the
/// reference layer table; configurations not listed fall back to
/// {1.25, 2.75, 2.75, 2.05, 0.75}.
std::array<double, 5> layer_multipliers(std::size_t m, std::size_t n, double p_i_watts);

/// floor(n_i * F_s) for each of the five hidden layers.
std::array<std::size_t, 5> hidden_sizes(std::size_t m, std::size_t n, double p_i_watts, std::size_t input_size);

/// Default five-hidden-layer architecture for a scenario.
Architecture make_architecture(const SystemParams& p);

/// Xavier-uniform weights from Rng(seed), zero biases, BN gamma = 1, beta = 0,
/// running mean 0 and running variance 1.
NetworkParams init_network(const Architecture& arch, std::uint64_t seed);

enum class Mode { Training, Inference };

/// Sigmoid outputs (B x (2N + 1)) for a B x F_s batch of flat features.
/// Training mode normalizes with batch statistics and needs B >= 2.
Tensor forward_outputs(const NetworkParams& params, const Tensor& features, Mode mode);

/// Splits sigmoid outputs into configurations: phases 2 pi s, tau = s clamped
/// to [kTauEpsilon, 1 - kTauEpsilon].
std::vector<PhaseConfig> decode_outputs(const Tensor& outputs, std::size_t n);

/// One pass yields the complete configuration (both phase sets and tau) of every row.
std::vector<PhaseConfig> forward(const NetworkParams& params, const Tensor& features, Mode mode);

/// Sets input_shift/input_scale from the column statistics of `features`.
void fit_input_normalization(NetworkParams& params, const Tensor& features);

} // namespace irsopt::net

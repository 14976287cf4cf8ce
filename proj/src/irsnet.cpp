// SPDX-License-Identifier: Apache-2.0
#include "irsopt/irsnet.hpp"

#include <cmath>

#include "irsopt/errors.hpp"
#include "irsopt/features.hpp"
#include "irsopt/rng.hpp"
#include "irsopt/units.hpp"

namespace irsopt::net {

std::vector<Tensor*> NetworkParams::trainable()
{
    std::vector<Tensor*> out;
    for (std::size_t i = 0; i < hidden.size(); ++i) {
        out.push_back(&hidden[i].weight);
        out.push_back(&hidden[i].bias);
        out.push_back(&norms[i].gamma);
        out.push_back(&norms[i].beta);
    }
    out.push_back(&output.weight);
    out.push_back(&output.bias);
    return out;
}

std::vector<const Tensor*> NetworkParams::trainable() const
{
    std::vector<const Tensor*> out;
    for (auto* t : const_cast<NetworkParams*>(this)->trainable())
        out.push_back(t);
    return out;
}

std::size_t NetworkParams::parameter_count() const
{
    std::size_t count = 0;
    for (const auto* t : trainable())
        count += static_cast<std::size_t>(t->size());
    return count;
}

namespace {

struct TableRow {
    std::array<int, 5> hundredths;
};

constexpr TableRow kWide{{250, 300, 250, 200, 50}};
constexpr TableRow kDeep{{350, 450, 450, 400, 100}};
constexpr TableRow kInterference{{125, 275, 275, 205, 75}};
constexpr TableRow kNarrow{{105, 135, 145, 125, 50}};

bool near_dbm(double watts, double dbm) { return watts > 0.0 && std::abs(watts_to_dbm(watts) - dbm) < 1e-6; }

const TableRow& select_row(std::size_t m, std::size_t n, double p_i)
{
    if (p_i == 0.0) {
        const std::pair<std::size_t, std::size_t> mn{m, n};
        for (auto c : {std::pair<std::size_t, std::size_t>{2, 16}, {2, 32}, {8, 16}, {4, 16}, {4, 32}, {8, 32}})
            if (mn == c)
                return kWide;
        for (auto c : {std::pair<std::size_t, std::size_t>{8, 8}, {2, 8}, {4, 8}})
            if (mn == c)
                return kDeep;
        return kInterference;
    }
    if (near_dbm(p_i, 10.0))
        return kInterference;
    if (m == 8) {
        if ((n == 8 && near_dbm(p_i, 0.0)) || (n == 32 && near_dbm(p_i, 5.0)) || (n == 16 && near_dbm(p_i, 5.0))
            || (n == 32 && near_dbm(p_i, 15.0)))
            return kNarrow;
    }
    return kInterference;
}

} // namespace

std::array<double, 5> layer_multipliers(std::size_t m, std::size_t n, double p_i_watts)
{
    const auto& row = select_row(m, n, p_i_watts);
    std::array<double, 5> out{};
    for (std::size_t i = 0; i < 5; ++i)
        out[i] = row.hundredths[i] / 100.0;
    return out;
}

std::array<std::size_t, 5> hidden_sizes(std::size_t m, std::size_t n, double p_i_watts, std::size_t input_size)
{
    // Exact integer floor of (hundredths / 100) * F_s.
    const auto& row = select_row(m, n, p_i_watts);
    std::array<std::size_t, 5> out{};
    for (std::size_t i = 0; i < 5; ++i)
        out[i] = static_cast<std::size_t>(row.hundredths[i]) * input_size / 100;
    return out;
}

Architecture make_architecture(const SystemParams& p)
{
    Architecture arch;
    arch.m = p.m;
    arch.n = p.n;
    arch.interference = p.interference();
    arch.input_size = feature_length(p.m, p.n, arch.interference);
    const auto sizes = hidden_sizes(p.m, p.n, p.p_i, arch.input_size);
    arch.hidden.assign(sizes.begin(), sizes.end());
    return arch;
}

NetworkParams init_network(const Architecture& arch, std::uint64_t seed)
{
    if (arch.input_size < 1 || arch.n < 1)
        throw ContractViolation("init_network: input size and N must be >= 1");
    for (auto h : arch.hidden)
        if (h < 1)
            throw ContractViolation("init_network: hidden layers must have >= 1 unit");

    Rng rng(seed);
    auto xavier = [&rng](std::size_t in, std::size_t out) {
        const double limit = std::sqrt(6.0 / static_cast<double>(in + out));
        DenseLayer layer;
        layer.weight.resize(static_cast<Eigen::Index>(in), static_cast<Eigen::Index>(out));
        // Row-major draw order, matching the checkpoint layout.
        for (Eigen::Index r = 0; r < layer.weight.rows(); ++r)
            for (Eigen::Index c = 0; c < layer.weight.cols(); ++c)
                layer.weight(r, c) = rng.uniform(-limit, limit);
        layer.bias = Tensor::Zero(1, static_cast<Eigen::Index>(out));
        return layer;
    };

    NetworkParams params;
    params.arch = arch;
    params.seed = seed;
    std::size_t width = arch.input_size;
    for (auto h : arch.hidden) {
        params.hidden.push_back(xavier(width, h));
        const auto cols = static_cast<Eigen::Index>(h);
        params.norms.push_back(BatchNorm{Tensor::Ones(1, cols), Tensor::Zero(1, cols), Tensor::Zero(1, cols),
                                         Tensor::Ones(1, cols)});
        width = h;
    }
    params.output = xavier(width, arch.output_size());
    params.input_shift = Tensor::Zero(1, static_cast<Eigen::Index>(arch.input_size));
    params.input_scale = Tensor::Ones(1, static_cast<Eigen::Index>(arch.input_size));
    return params;
}

namespace {

void batch_norm(Tensor& x, const BatchNorm& bn, Mode mode)
{
    Eigen::RowVectorXd mean;
    Eigen::RowVectorXd var;
    if (mode == Mode::Training) {
        mean = x.colwise().mean();
        x.rowwise() -= mean;
        var = x.array().square().colwise().mean();
    } else {
        mean = bn.running_mean.row(0);
        var = bn.running_var.row(0);
        x.rowwise() -= mean;
    }
    const Eigen::RowVectorXd gain = bn.gamma.row(0).array() / (var.array() + bn.epsilon).sqrt();
    x.array().rowwise() *= gain.array();
    x.rowwise() += bn.beta.row(0);
}

double sigmoid(double x)
{
    if (x >= 0.0)
        return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

} // namespace

Tensor forward_outputs(const NetworkParams& params, const Tensor& features, Mode mode)
{
    const auto& arch = params.arch;
    if (static_cast<std::size_t>(features.cols()) != arch.input_size)
        throw ContractViolation("forward: feature length " + std::to_string(features.cols()) + " does not match F_s = "
                                + std::to_string(arch.input_size));
    if (mode == Mode::Training && features.rows() < 2)
        throw ContractViolation("forward: training mode needs a batch of at least 2");

    Tensor x = features;
    if (arch.normalize_inputs) {
        x.rowwise() -= params.input_shift.row(0);
        x.array().rowwise() *= params.input_scale.row(0).array();
    }
    for (std::size_t i = 0; i < params.hidden.size(); ++i) {
        Tensor z = x * params.hidden[i].weight;
        z.rowwise() += params.hidden[i].bias.row(0);
        if (arch.relu_before_norm) {
            z = z.cwiseMax(0.0);
            batch_norm(z, params.norms[i], mode);
        } else {
            batch_norm(z, params.norms[i], mode);
            z = z.cwiseMax(0.0);
        }
        x = std::move(z);
    }
    Tensor out = x * params.output.weight;
    out.rowwise() += params.output.bias.row(0);
    return out.unaryExpr(&sigmoid);
}

std::vector<PhaseConfig> decode_outputs(const Tensor& outputs, std::size_t n)
{
    if (static_cast<std::size_t>(outputs.cols()) != 2 * n + 1)
        throw ContractViolation("decode_outputs: expected 2N + 1 columns");
    std::vector<PhaseConfig> cfgs(static_cast<std::size_t>(outputs.rows()));
    for (Eigen::Index r = 0; r < outputs.rows(); ++r) {
        auto& cfg = cfgs[static_cast<std::size_t>(r)];
        cfg.theta_et.resize(n);
        cfg.theta_it.resize(n);
        for (std::size_t k = 0; k < n; ++k) {
            cfg.theta_et[k] = kTwoPi * outputs(r, static_cast<Eigen::Index>(k));
            cfg.theta_it[k] = kTwoPi * outputs(r, static_cast<Eigen::Index>(n + k));
        }
        cfg.tau = outputs(r, static_cast<Eigen::Index>(2 * n));
        cfg.canonicalize();
    }
    return cfgs;
}

std::vector<PhaseConfig> forward(const NetworkParams& params, const Tensor& features, Mode mode)
{
    return decode_outputs(forward_outputs(params, features, mode), params.arch.n);
}

void fit_input_normalization(NetworkParams& params, const Tensor& features)
{
    if (static_cast<std::size_t>(features.cols()) != params.arch.input_size || features.rows() < 2)
        throw ContractViolation("fit_input_normalization: need >= 2 rows of F_s features");
    const Eigen::RowVectorXd mean = features.colwise().mean();
    const Eigen::RowVectorXd var = (features.rowwise() - mean).array().square().colwise().mean();
    params.input_shift = mean;
    params.input_scale = var.unaryExpr([](double v) { return v > 0.0 ? 1.0 / std::sqrt(v) : 1.0; });
}

} // namespace irsopt::net

// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace irsopt::ad {

/// Every node holds a dense real matrix. Batches run along rows.
using Tensor = Eigen::MatrixXd;

enum class Op : std::uint8_t {
    Parameter,
    Constant,
    Add,
    Sub,
    Mul,
    Div,
    Neg,
    Sin,
    Cos,
    Exp,
    Log,
    Sqrt,
    Square,
    Relu,
    Sigmoid,
    SumAll,   // -> 1x1
    MeanAll,  // -> 1x1
    RowSum,   // R x C -> R x 1
    ColMean,  // R x C -> 1 x C
    Dot,      // same-shape operands -> 1x1
    MatMul,   // (R x K)(K x C) -> R x C
    SliceCols,
    Scale,    // x * literal
    Shift,    // x + literal
    Clamp,    // min(max(x, lo), hi); zero adjoint outside (lo, hi)
};

const char* op_name(Op op);

/// Handle to a node of a Tape.
struct Var {
    std::uint32_t id = std::numeric_limits<std::uint32_t>::max();
    bool valid() const { return id != std::numeric_limits<std::uint32_t>::max(); }
};

/// Reverse-mode tape over tensor-valued nodes.
///
/// The graph is recorded once; roots (parameters and constants) are then
/// re-bound and the graph re-evaluated as often as needed. Binary elementwise
/// ops broadcast operands whose row or column count is 1, and their adjoints
/// are summed back over the broadcast axes.
///
/// Domain violations found during forward() (log of a non-positive value,
/// division by zero, sqrt of a negative value) raise NumericDomainError.
class Tape {
public:
    Var parameter(std::string name);
    Var constant(std::string name);
    /// Constant root bound once at construction.
    Var literal(Tensor value);
    Var literal(double value);

    Var add(Var a, Var b);
    Var sub(Var a, Var b);
    Var mul(Var a, Var b);
    Var div(Var a, Var b);
    Var neg(Var a);
    Var sin(Var a);
    Var cos(Var a);
    Var exp(Var a);
    Var log(Var a);
    Var sqrt(Var a);
    Var square(Var a);
    Var relu(Var a);
    Var sigmoid(Var a);
    Var sum(Var a);
    Var mean(Var a);
    Var row_sum(Var a);
    Var col_mean(Var a);
    Var dot(Var a, Var b);
    Var matmul(Var a, Var b);
    Var matvec(Var a, Var x) { return matmul(a, x); }
    Var slice_cols(Var a, std::size_t start, std::size_t count);
    Var scale(Var a, double factor);
    Var shift(Var a, double offset);
    Var clamp(Var a, double lo, double hi);

    void bind(Var root, Tensor value);
    Tensor& bound(Var root);

    /// Evaluates every node up to and including `out`.
    const Tensor& forward(Var out);
    double forward_scalar(Var out);

    /// Propagates adjoints from the 1x1 node `out`. Requires a forward() of
    /// `out` since the last bind.
    void backward(Var out);

    const Tensor& value(Var v) const;
    const Tensor& grad(Var v) const;

    std::span<const Var> parameters() const { return parameters_; }
    std::span<const Var> constants() const { return constants_; }
    std::size_t size() const { return nodes_.size(); }
    Op op(Var v) const;
    const std::string& name(Var v) const;

private:
    struct Node {
        Op op;
        std::uint32_t a = 0;
        std::uint32_t b = 0;
        double scalar = 0.0;
        double scalar2 = 0.0;
        std::size_t start = 0;
        std::size_t count = 0;
        bool needs_grad = false;
        bool bound = false;
        std::string name;
        Tensor value;
        Tensor grad;
    };

    Var push(Node node);
    Var unary(Op op, Var a);
    Var binary(Op op, Var a, Var b);
    const Node& at(Var v) const;
    Node& at(Var v);
    void eval(Node& node);
    void propagate(Node& node);

    std::vector<Node> nodes_;
    std::vector<Var> parameters_;
    std::vector<Var> constants_;
    std::uint32_t evaluated_through_ = 0;
    bool evaluated_ = false;
};

/// Binds parameters and constants (in creation order), evaluates `output`
/// and returns it as a scalar.
double forward_eval(Tape& tape, Var output, std::span<const Tensor> parameter_values,
                    std::span<const Tensor> constant_values);

/// Gradient of `output` with respect to every parameter root, in creation order.
std::vector<Tensor> backward(Tape& tape, Var output);

/// Max over all parameter entries of
///   |analytic - central| / max(|analytic|, |central|, 1e-12)
/// with central differences of half-width `step` around `point`.
/// Constants must already be bound. No thresholding is applied.
double grad_check(Tape& tape, Var output, std::span<const Tensor> point, double step);

} // namespace irsopt::ad

// SPDX-License-Identifier: Apache-2.0
#include "irsopt/autodiff.hpp"

#include <algorithm>
#include <cmath>

#include "irsopt/errors.hpp"

namespace irsopt::ad {

const char* op_name(Op op)
{
    switch (op) {
    case Op::Parameter: return "parameter";
    case Op::Constant: return "constant";
    case Op::Add: return "add";
    case Op::Sub: return "subtract";
    case Op::Mul: return "multiply";
    case Op::Div: return "divide";
    case Op::Neg: return "negate";
    case Op::Sin: return "sin";
    case Op::Cos: return "cos";
    case Op::Exp: return "exp";
    case Op::Log: return "natural_log";
    case Op::Sqrt: return "sqrt";
    case Op::Square: return "square";
    case Op::Relu: return "relu";
    case Op::Sigmoid: return "sigmoid";
    case Op::SumAll: return "sum_reduce";
    case Op::MeanAll: return "mean_reduce";
    case Op::RowSum: return "row_sum";
    case Op::ColMean: return "col_mean";
    case Op::Dot: return "dot";
    case Op::MatMul: return "matmul";
    case Op::SliceCols: return "slice_cols";
    case Op::Scale: return "scale";
    case Op::Shift: return "shift";
    case Op::Clamp: return "clamp";
    }
    return "unknown";
}

namespace {

using Index = Eigen::Index;

Index broadcast_dim(Index x, Index y, Op op)
{
    if (x == y || y == 1)
        return x;
    if (x == 1)
        return y;
    throw ContractViolation(std::string(op_name(op)) + ": operand shapes are not broadcast-compatible");
}

// out(r, c) = f(a(r', c'), b(r'', c'')) where size-1 axes are broadcast.
template <typename F>
void apply_binary(Tensor& out, const Tensor& a, const Tensor& b, Op op, F f)
{
    const Index rows = broadcast_dim(a.rows(), b.rows(), op);
    const Index cols = broadcast_dim(a.cols(), b.cols(), op);
    out.resize(rows, cols);
    const Index ar = a.rows() == 1 ? 0 : 1;
    const Index ac = a.cols() == 1 ? 0 : a.rows();
    const Index br = b.rows() == 1 ? 0 : 1;
    const Index bc = b.cols() == 1 ? 0 : b.rows();
    const double* pa = a.data();
    const double* pb = b.data();
    double* po = out.data();
    for (Index c = 0; c < cols; ++c)
        for (Index r = 0; r < rows; ++r)
            po[c * rows + r] = f(pa[r * ar + c * ac], pb[r * br + c * bc]);
}

// Adds `g` into `grad`, summing over axes along which grad's owner was broadcast.
void accumulate(Tensor& grad, const Tensor& g)
{
    if (grad.rows() == g.rows() && grad.cols() == g.cols())
        grad += g;
    else if (grad.rows() == 1 && grad.cols() == 1)
        grad(0, 0) += g.sum();
    else if (grad.rows() == 1)
        grad += g.colwise().sum();
    else
        grad += g.rowwise().sum();
}

} // namespace

Var Tape::push(Node node)
{
    nodes_.push_back(std::move(node));
    evaluated_ = false;
    return Var{static_cast<std::uint32_t>(nodes_.size() - 1)};
}

const Tape::Node& Tape::at(Var v) const
{
    if (!v.valid() || v.id >= nodes_.size())
        throw ContractViolation("Tape: invalid node handle");
    return nodes_[v.id];
}

Tape::Node& Tape::at(Var v)
{
    if (!v.valid() || v.id >= nodes_.size())
        throw ContractViolation("Tape: invalid node handle");
    return nodes_[v.id];
}

Var Tape::parameter(std::string name)
{
    Node n;
    n.op = Op::Parameter;
    n.needs_grad = true;
    n.name = std::move(name);
    const Var v = push(std::move(n));
    parameters_.push_back(v);
    return v;
}

Var Tape::constant(std::string name)
{
    Node n;
    n.op = Op::Constant;
    n.name = std::move(name);
    const Var v = push(std::move(n));
    constants_.push_back(v);
    return v;
}

Var Tape::literal(Tensor value)
{
    Node n;
    n.op = Op::Constant;
    n.name = "literal";
    n.value = std::move(value);
    n.bound = true;
    return push(std::move(n));
}

Var Tape::literal(double value) { return literal(Tensor::Constant(1, 1, value)); }

Var Tape::unary(Op op, Var a)
{
    Node n;
    n.op = op;
    n.a = a.id;
    n.needs_grad = at(a).needs_grad;
    return push(std::move(n));
}

Var Tape::binary(Op op, Var a, Var b)
{
    Node n;
    n.op = op;
    n.a = a.id;
    n.b = b.id;
    n.needs_grad = at(a).needs_grad || at(b).needs_grad;
    return push(std::move(n));
}

Var Tape::add(Var a, Var b) { return binary(Op::Add, a, b); }
Var Tape::sub(Var a, Var b) { return binary(Op::Sub, a, b); }
Var Tape::mul(Var a, Var b) { return binary(Op::Mul, a, b); }
Var Tape::div(Var a, Var b) { return binary(Op::Div, a, b); }
Var Tape::neg(Var a) { return unary(Op::Neg, a); }
Var Tape::sin(Var a) { return unary(Op::Sin, a); }
Var Tape::cos(Var a) { return unary(Op::Cos, a); }
Var Tape::exp(Var a) { return unary(Op::Exp, a); }
Var Tape::log(Var a) { return unary(Op::Log, a); }
Var Tape::sqrt(Var a) { return unary(Op::Sqrt, a); }
Var Tape::square(Var a) { return unary(Op::Square, a); }
Var Tape::relu(Var a) { return unary(Op::Relu, a); }
Var Tape::sigmoid(Var a) { return unary(Op::Sigmoid, a); }
Var Tape::sum(Var a) { return unary(Op::SumAll, a); }
Var Tape::mean(Var a) { return unary(Op::MeanAll, a); }
Var Tape::row_sum(Var a) { return unary(Op::RowSum, a); }
Var Tape::col_mean(Var a) { return unary(Op::ColMean, a); }
Var Tape::dot(Var a, Var b) { return binary(Op::Dot, a, b); }
Var Tape::matmul(Var a, Var b) { return binary(Op::MatMul, a, b); }

Var Tape::slice_cols(Var a, std::size_t start, std::size_t count)
{
    const Var v = unary(Op::SliceCols, a);
    nodes_[v.id].start = start;
    nodes_[v.id].count = count;
    return v;
}

Var Tape::scale(Var a, double factor)
{
    const Var v = unary(Op::Scale, a);
    nodes_[v.id].scalar = factor;
    return v;
}

Var Tape::shift(Var a, double offset)
{
    const Var v = unary(Op::Shift, a);
    nodes_[v.id].scalar = offset;
    return v;
}

Var Tape::clamp(Var a, double lo, double hi)
{
    if (!(lo <= hi))
        throw ContractViolation("clamp: lower bound exceeds upper bound");
    const Var v = unary(Op::Clamp, a);
    nodes_[v.id].scalar = lo;
    nodes_[v.id].scalar2 = hi;
    return v;
}

void Tape::bind(Var root, Tensor value)
{
    Node& n = at(root);
    if (n.op != Op::Parameter && n.op != Op::Constant)
        throw ContractViolation("Tape::bind: node is not a root");
    n.value = std::move(value);
    n.bound = true;
    evaluated_ = false;
}

Tensor& Tape::bound(Var root)
{
    Node& n = at(root);
    if (n.op != Op::Parameter && n.op != Op::Constant)
        throw ContractViolation("Tape::bound: node is not a root");
    if (!n.bound)
        throw ContractViolation("Tape::bound: root '" + n.name + "' is unbound");
    evaluated_ = false;
    return n.value;
}

const Tensor& Tape::value(Var v) const { return at(v).value; }
const Tensor& Tape::grad(Var v) const { return at(v).grad; }
Op Tape::op(Var v) const { return at(v).op; }
const std::string& Tape::name(Var v) const { return at(v).name; }

void Tape::eval(Node& n)
{
    const Tensor* a = n.op == Op::Parameter || n.op == Op::Constant ? nullptr : &nodes_[n.a].value;
    const Tensor& b = nodes_[n.b].value;
    switch (n.op) {
    case Op::Parameter:
    case Op::Constant:
        if (!n.bound)
            throw ContractViolation("Tape::forward: root '" + n.name + "' is unbound");
        break;
    case Op::Add: apply_binary(n.value, *a, b, n.op, [](double x, double y) { return x + y; }); break;
    case Op::Sub: apply_binary(n.value, *a, b, n.op, [](double x, double y) { return x - y; }); break;
    case Op::Mul: apply_binary(n.value, *a, b, n.op, [](double x, double y) { return x * y; }); break;
    case Op::Div:
        if ((b.array() == 0.0).any())
            throw NumericDomainError(op_name(n.op), "division by zero");
        apply_binary(n.value, *a, b, n.op, [](double x, double y) { return x / y; });
        break;
    case Op::Neg: n.value = -*a; break;
    case Op::Sin: n.value = a->array().sin().matrix(); break;
    case Op::Cos: n.value = a->array().cos().matrix(); break;
    case Op::Exp: n.value = a->array().exp().matrix(); break;
    case Op::Log:
        if (!(a->array() > 0.0).all())
            throw NumericDomainError(op_name(n.op), "argument must be positive");
        n.value = a->array().log().matrix();
        break;
    case Op::Sqrt:
        if (!(a->array() >= 0.0).all())
            throw NumericDomainError(op_name(n.op), "argument must be non-negative");
        n.value = a->array().sqrt().matrix();
        break;
    case Op::Square: n.value = a->array().square().matrix(); break;
    case Op::Relu: n.value = a->cwiseMax(0.0); break;
    case Op::Sigmoid:
        n.value = a->unaryExpr([](double x) {
            if (x >= 0.0)
                return 1.0 / (1.0 + std::exp(-x));
            const double e = std::exp(x);
            return e / (1.0 + e);
        });
        break;
    case Op::SumAll: n.value = Tensor::Constant(1, 1, a->sum()); break;
    case Op::MeanAll:
        if (a->size() == 0)
            throw ContractViolation("mean_reduce: empty operand");
        n.value = Tensor::Constant(1, 1, a->mean());
        break;
    case Op::RowSum: n.value = a->rowwise().sum(); break;
    case Op::ColMean:
        if (a->rows() == 0)
            throw ContractViolation("col_mean: empty operand");
        n.value = a->colwise().mean();
        break;
    case Op::Dot:
        if (a->rows() != b.rows() || a->cols() != b.cols())
            throw ContractViolation("dot: operand shapes differ");
        n.value = Tensor::Constant(1, 1, (a->array() * b.array()).sum());
        break;
    case Op::MatMul:
        if (a->cols() != b.rows())
            throw ContractViolation("matmul: inner dimensions differ");
        n.value.resize(a->rows(), b.cols());
        n.value.noalias() = *a * b;
        break;
    case Op::SliceCols:
        if (n.start + n.count > static_cast<std::size_t>(a->cols()))
            throw ContractViolation("slice_cols: column range out of bounds");
        n.value = a->middleCols(static_cast<Index>(n.start), static_cast<Index>(n.count));
        break;
    case Op::Scale: n.value = *a * n.scalar; break;
    case Op::Shift: n.value = a->array() + n.scalar; break;
    case Op::Clamp: n.value = a->cwiseMax(n.scalar).cwiseMin(n.scalar2); break;
    }
}

const Tensor& Tape::forward(Var out)
{
    at(out);
    for (std::uint32_t i = 0; i <= out.id; ++i)
        eval(nodes_[i]);
    evaluated_ = true;
    evaluated_through_ = out.id;
    return nodes_[out.id].value;
}

double Tape::forward_scalar(Var out)
{
    const Tensor& v = forward(out);
    if (v.rows() != 1 || v.cols() != 1)
        throw ContractViolation("Tape::forward_scalar: output is not 1x1");
    return v(0, 0);
}

void Tape::propagate(Node& n)
{
    const Tensor& g = n.grad;
    Node* na = n.op == Op::Parameter || n.op == Op::Constant ? nullptr : &nodes_[n.a];
    Node& nb = nodes_[n.b];
    const bool ga = na != nullptr && na->needs_grad;
    const bool gb = nb.needs_grad;
    Tensor tmp;
    switch (n.op) {
    case Op::Parameter:
    case Op::Constant: break;
    case Op::Add:
        if (ga) accumulate(na->grad, g);
        if (gb) accumulate(nb.grad, g);
        break;
    case Op::Sub:
        if (ga) accumulate(na->grad, g);
        if (gb) accumulate(nb.grad, -g);
        break;
    case Op::Mul:
        if (ga) {
            apply_binary(tmp, g, nb.value, n.op, [](double x, double y) { return x * y; });
            accumulate(na->grad, tmp);
        }
        if (gb) {
            apply_binary(tmp, g, na->value, n.op, [](double x, double y) { return x * y; });
            accumulate(nb.grad, tmp);
        }
        break;
    case Op::Div:
        if (ga) {
            apply_binary(tmp, g, nb.value, n.op, [](double x, double y) { return x / y; });
            accumulate(na->grad, tmp);
        }
        if (gb) {
            // d(a/b)/db = -(a/b) / b
            apply_binary(tmp, g, n.value, n.op, [](double x, double y) { return x * y; });
            Tensor scaled;
            apply_binary(scaled, tmp, nb.value, n.op, [](double x, double y) { return -x / y; });
            accumulate(nb.grad, scaled);
        }
        break;
    case Op::Neg: na->grad -= g; break;
    case Op::Sin: na->grad.array() += g.array() * na->value.array().cos(); break;
    case Op::Cos: na->grad.array() -= g.array() * na->value.array().sin(); break;
    case Op::Exp: na->grad.array() += g.array() * n.value.array(); break;
    case Op::Log: na->grad.array() += g.array() / na->value.array(); break;
    case Op::Sqrt:
        if ((n.value.array() == 0.0).any())
            throw NumericDomainError(op_name(n.op), "derivative undefined at 0");
        na->grad.array() += 0.5 * g.array() / n.value.array();
        break;
    case Op::Square: na->grad.array() += 2.0 * g.array() * na->value.array(); break;
    case Op::Relu: na->grad.array() += (na->value.array() > 0.0).select(g.array(), 0.0); break;
    case Op::Sigmoid: na->grad.array() += g.array() * n.value.array() * (1.0 - n.value.array()); break;
    case Op::SumAll: na->grad.array() += g(0, 0); break;
    case Op::MeanAll: na->grad.array() += g(0, 0) / static_cast<double>(na->value.size()); break;
    case Op::RowSum: na->grad.colwise() += g.col(0); break;
    case Op::ColMean: na->grad.rowwise() += g.row(0) / static_cast<double>(na->value.rows()); break;
    case Op::Dot:
        if (ga) na->grad += g(0, 0) * nb.value;
        if (gb) nb.grad += g(0, 0) * na->value;
        break;
    case Op::MatMul:
        if (ga) na->grad.noalias() += g * nb.value.transpose();
        if (gb) nb.grad.noalias() += na->value.transpose() * g;
        break;
    case Op::SliceCols:
        na->grad.middleCols(static_cast<Index>(n.start), static_cast<Index>(n.count)) += g;
        break;
    case Op::Scale: na->grad += n.scalar * g; break;
    case Op::Shift: na->grad += g; break;
    case Op::Clamp:
        na->grad.array() += (na->value.array() > n.scalar && na->value.array() < n.scalar2).select(g.array(), 0.0);
        break;
    }
}

void Tape::backward(Var out)
{
    at(out);
    if (!evaluated_ || evaluated_through_ < out.id)
        throw ContractViolation("Tape::backward: forward() has not been run on the current bindings");
    const Tensor& v = nodes_[out.id].value;
    if (v.rows() != 1 || v.cols() != 1)
        throw ContractViolation("Tape::backward: output is not 1x1");
    for (std::uint32_t i = 0; i <= out.id; ++i) {
        Node& n = nodes_[i];
        if (n.needs_grad)
            n.grad.setZero(n.value.rows(), n.value.cols());
        else
            n.grad.resize(0, 0);
    }
    if (!nodes_[out.id].needs_grad)
        return;
    nodes_[out.id].grad(0, 0) = 1.0;
    for (std::uint32_t i = out.id + 1; i-- > 0;) {
        Node& n = nodes_[i];
        if (n.needs_grad)
            propagate(n);
    }
}

double forward_eval(Tape& tape, Var output, std::span<const Tensor> parameter_values,
                    std::span<const Tensor> constant_values)
{
    const auto params = tape.parameters();
    const auto consts = tape.constants();
    if (parameter_values.size() != params.size() || constant_values.size() != consts.size())
        throw ContractViolation("forward_eval: binding count does not match the tape's roots");
    for (std::size_t i = 0; i < params.size(); ++i)
        tape.bind(params[i], parameter_values[i]);
    for (std::size_t i = 0; i < consts.size(); ++i)
        tape.bind(consts[i], constant_values[i]);
    return tape.forward_scalar(output);
}

std::vector<Tensor> backward(Tape& tape, Var output)
{
    tape.backward(output);
    std::vector<Tensor> grads;
    for (const Var p : tape.parameters())
        grads.push_back(tape.grad(p));
    return grads;
}

double grad_check(Tape& tape, Var output, std::span<const Tensor> point, double step)
{
    if (!(step > 0.0))
        throw ContractViolation("grad_check: step must be positive");
    const auto params = tape.parameters();
    if (point.size() != params.size())
        throw ContractViolation("grad_check: point does not match the tape's parameters");
    for (std::size_t i = 0; i < params.size(); ++i)
        tape.bind(params[i], point[i]);
    tape.forward_scalar(output);
    const auto analytic = backward(tape, output);

    double worst = 0.0;
    for (std::size_t i = 0; i < params.size(); ++i) {
        Tensor& x = tape.bound(params[i]);
        for (Index k = 0; k < x.size(); ++k) {
            const double saved = x.data()[k];
            x.data()[k] = saved + step;
            const double up = tape.forward_scalar(output);
            x.data()[k] = saved - step;
            const double down = tape.forward_scalar(output);
            x.data()[k] = saved;
            const double central = (up - down) / (2.0 * step);
            const double exact = analytic[i].data()[k];
            const double denom = std::max({std::abs(exact), std::abs(central), 1e-12});
            worst = std::max(worst, std::abs(exact - central) / denom);
        }
    }
    tape.forward_scalar(output);
    return worst;
}

} // namespace irsopt::ad

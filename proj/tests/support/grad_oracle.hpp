// SPDX-License-Identifier: Apache-2.0
// Central finite differences of the reference loss in quad precision.
#pragma once

#include <vector>

#include <boost/multiprecision/float128.hpp>

#include "irsopt/irsnet.hpp"
#include "reference_model.hpp"

namespace oracle {

using quad = boost::multiprecision::float128;

inline reference::Scenario scenario_of(const irsopt::SystemParams& p)
{
    return {p.m, p.n, p.interference(), p.p_b, p.p_i, p.sigma_z2, p.eta};
}

template <typename T>
reference::Net<T> to_reference(const irsopt::net::NetworkParams& params)
{
    auto flat = [](const Eigen::MatrixXd& m) {
        std::vector<T> out;
        for (Eigen::Index r = 0; r < m.rows(); ++r)
            for (Eigen::Index c = 0; c < m.cols(); ++c)
                out.push_back(T(m(r, c)));
        return out;
    };
    reference::Net<T> net;
    net.relu_before_norm = params.arch.relu_before_norm;
    for (std::size_t i = 0; i < params.hidden.size(); ++i) {
        reference::Layer<T> l;
        l.in = static_cast<std::size_t>(params.hidden[i].weight.rows());
        l.out = static_cast<std::size_t>(params.hidden[i].weight.cols());
        l.w = flat(params.hidden[i].weight);
        l.b = flat(params.hidden[i].bias);
        l.gamma = flat(params.norms[i].gamma);
        l.beta = flat(params.norms[i].beta);
        net.hidden.push_back(std::move(l));
    }
    net.output.in = static_cast<std::size_t>(params.output.weight.rows());
    net.output.out = static_cast<std::size_t>(params.output.weight.cols());
    net.output.w = flat(params.output.weight);
    net.output.b = flat(params.output.bias);
    return net;
}

// Pointers to every trainable scalar in NetworkParams::trainable() order.
template <typename T>
std::vector<T*> scalars(reference::Net<T>& net)
{
    std::vector<T*> out;
    auto add = [&](std::vector<T>& v) {
        for (auto& x : v)
            out.push_back(&x);
    };
    for (auto& l : net.hidden) {
        add(l.w);
        add(l.b);
        add(l.gamma);
        add(l.beta);
    }
    add(net.output.w);
    add(net.output.b);
    return out;
}

// dL/dparam for every trainable scalar, central differences with step h.
inline std::vector<double> fd_gradient(const irsopt::net::NetworkParams& params, const Eigen::MatrixXd& features,
                                       const irsopt::SystemParams& p, double h)
{
    reference::Net<quad> net = to_reference<quad>(params);
    std::vector<quad> x;
    for (Eigen::Index r = 0; r < features.rows(); ++r)
        for (Eigen::Index c = 0; c < features.cols(); ++c)
            x.push_back(quad(features(r, c)));
    const auto rows = static_cast<std::size_t>(features.rows());
    const reference::Scenario s = scenario_of(p);
    std::vector<double> g;
    for (quad* v : scalars(net)) {
        const quad saved = *v;
        *v = saved + quad(h);
        const quad up = reference::loss(net, x, rows, s);
        *v = saved - quad(h);
        const quad down = reference::loss(net, x, rows, s);
        *v = saved;
        g.push_back(static_cast<double>((up - down) / quad(2 * h)));
    }
    return g;
}

} // namespace oracle

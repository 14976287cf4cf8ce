// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "irsopt/autodiff.hpp"
#include "irsopt/channel.hpp"
#include "irsopt/features.hpp"

namespace irsopt::ad {

/// Records per-sample throughput C (B x 1) on `tape`.
///
/// `features` is a B x F_s node in the flat layout of `layout`; `theta_et`
/// and `theta_it` are B x N, `tau` is B x 1. Complex arithmetic is expanded
/// into real/imaginary pairs. The recorded graph is independent of the batch
/// size, so it can be re-bound for every minibatch.
Var record_throughput(Tape& tape, Var features, Var theta_et, Var theta_it, Var tau, const SystemParams& p,
                      const FeatureLayout& layout);

/// -mean(C): the unsupervised training loss.
Var record_loss(Tape& tape, Var throughput);

/// Self-contained throughput graph: features as a constant root, phases and
/// tau as parameter roots (so their gradients are available).
struct ThroughputGraph {
    Var features;
    Var theta_et;
    Var theta_it;
    Var tau;
    Var throughput; // B x 1
    Var loss;       // 1 x 1
};

ThroughputGraph build_throughput_graph(Tape& tape, const SystemParams& p);

} // namespace irsopt::ad

// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <string>

#include "irsopt/irsnet.hpp"

namespace irsopt::net {

// JSON document:
// {
//   "format": "irsnet-checkpoint", "version": 1, "seed": u64,
//   "architecture": {"m", "n", "interference", "input_size", "hidden": [...],
//                    "relu_before_norm", "normalize_inputs"},
//   "input": {"shift": [...], "scale": [...]},
//   "hidden": [{"rows", "cols", "weight": [row-major], "bias": [...]}, ...],
//   "batch_norm": [{"gamma", "beta", "running_mean", "running_var", "momentum", "epsilon"}, ...],
//   "output": {"rows", "cols", "weight", "bias"}
// }
// Doubles are written in shortest round-trip form, so a load reproduces
// every value bit for bit. Every field is required on load; a missing or
// malformed field raises ParseError naming it.

std::string checkpoint_to_string(const NetworkParams& params);
NetworkParams checkpoint_from_string(const std::string& text);

void save_checkpoint(const NetworkParams& params, const std::filesystem::path& path);
NetworkParams load_checkpoint(const std::filesystem::path& path);

} // namespace irsopt::net

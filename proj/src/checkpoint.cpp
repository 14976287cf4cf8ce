// SPDX-License-Identifier: Apache-2.0
#include "irsopt/checkpoint.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "irsopt/errors.hpp"

namespace irsopt::net {

using nlohmann::json;

namespace {

constexpr const char* kFormat = "irsnet-checkpoint";
constexpr int kVersion = 1;

json row_major(const Tensor& t)
{
    json arr = json::array();
    for (Eigen::Index r = 0; r < t.rows(); ++r)
        for (Eigen::Index c = 0; c < t.cols(); ++c)
            arr.push_back(t(r, c));
    return arr;
}

json dense_to_json(const DenseLayer& layer)
{
    return {{"rows", layer.weight.rows()},
            {"cols", layer.weight.cols()},
            {"weight", row_major(layer.weight)},
            {"bias", row_major(layer.bias)}};
}

const json& require(const json& obj, const std::string& key, const std::string& path)
{
    if (!obj.is_object() || !obj.contains(key))
        throw ParseError("checkpoint: missing field '" + path + key + "'");
    return obj.at(key);
}

template <typename T>
T require_as(const json& obj, const std::string& key, const std::string& path)
{
    const json& v = require(obj, key, path);
    try {
        return v.get<T>();
    } catch (const json::exception&) {
        throw ParseError("checkpoint: field '" + path + key + "' has the wrong type");
    }
}

Tensor read_tensor(const json& obj, const std::string& key, const std::string& path, Eigen::Index rows, Eigen::Index cols)
{
    const json& arr = require(obj, key, path);
    if (!arr.is_array() || static_cast<Eigen::Index>(arr.size()) != rows * cols)
        throw ParseError("checkpoint: field '" + path + key + "' must be an array of " + std::to_string(rows * cols)
                         + " numbers");
    Tensor t(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r)
        for (Eigen::Index c = 0; c < cols; ++c) {
            const json& v = arr[static_cast<std::size_t>(r * cols + c)];
            if (!v.is_number())
                throw ParseError("checkpoint: field '" + path + key + "' contains a non-number");
            t(r, c) = v.get<double>();
        }
    return t;
}

DenseLayer read_dense(const json& obj, const std::string& path, std::size_t in, std::size_t out)
{
    const auto rows = require_as<Eigen::Index>(obj, "rows", path);
    const auto cols = require_as<Eigen::Index>(obj, "cols", path);
    if (rows != static_cast<Eigen::Index>(in) || cols != static_cast<Eigen::Index>(out))
        throw ParseError("checkpoint: '" + path + "' shape disagrees with the architecture");
    return {read_tensor(obj, "weight", path, rows, cols), read_tensor(obj, "bias", path, 1, cols)};
}

} // namespace

std::string checkpoint_to_string(const NetworkParams& params)
{
    const auto& a = params.arch;
    json doc;
    doc["format"] = kFormat;
    doc["version"] = kVersion;
    doc["seed"] = params.seed;
    doc["architecture"] = {{"m", a.m},
                           {"n", a.n},
                           {"interference", a.interference},
                           {"input_size", a.input_size},
                           {"hidden", a.hidden},
                           {"relu_before_norm", a.relu_before_norm},
                           {"normalize_inputs", a.normalize_inputs}};
    doc["input"] = {{"shift", row_major(params.input_shift)}, {"scale", row_major(params.input_scale)}};
    doc["hidden"] = json::array();
    for (const auto& layer : params.hidden)
        doc["hidden"].push_back(dense_to_json(layer));
    doc["batch_norm"] = json::array();
    for (const auto& bn : params.norms)
        doc["batch_norm"].push_back({{"gamma", row_major(bn.gamma)},
                                     {"beta", row_major(bn.beta)},
                                     {"running_mean", row_major(bn.running_mean)},
                                     {"running_var", row_major(bn.running_var)},
                                     {"momentum", bn.momentum},
                                     {"epsilon", bn.epsilon}});
    doc["output"] = dense_to_json(params.output);
    return doc.dump(1) + "\n";
}

NetworkParams checkpoint_from_string(const std::string& text)
{
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("checkpoint: invalid JSON: ") + e.what());
    }
    if (require_as<std::string>(doc, "format", "") != kFormat)
        throw ParseError("checkpoint: field 'format' is not irsnet-checkpoint");
    if (require_as<int>(doc, "version", "") != kVersion)
        throw ParseError("checkpoint: unsupported 'version'");

    NetworkParams p;
    p.seed = require_as<std::uint64_t>(doc, "seed", "");
    const json& arch = require(doc, "architecture", "");
    auto& a = p.arch;
    a.m = require_as<std::size_t>(arch, "m", "architecture.");
    a.n = require_as<std::size_t>(arch, "n", "architecture.");
    a.interference = require_as<bool>(arch, "interference", "architecture.");
    a.input_size = require_as<std::size_t>(arch, "input_size", "architecture.");
    a.hidden = require_as<std::vector<std::size_t>>(arch, "hidden", "architecture.");
    a.relu_before_norm = require_as<bool>(arch, "relu_before_norm", "architecture.");
    a.normalize_inputs = require_as<bool>(arch, "normalize_inputs", "architecture.");
    if (a.n < 1 || a.input_size < 1)
        throw ParseError("checkpoint: 'architecture' has empty dimensions");

    const auto fs = static_cast<Eigen::Index>(a.input_size);
    const json& input = require(doc, "input", "");
    p.input_shift = read_tensor(input, "shift", "input.", 1, fs);
    p.input_scale = read_tensor(input, "scale", "input.", 1, fs);

    const json& hidden = require(doc, "hidden", "");
    const json& norms = require(doc, "batch_norm", "");
    if (!hidden.is_array() || hidden.size() != a.hidden.size())
        throw ParseError("checkpoint: 'hidden' must list one layer per architecture.hidden entry");
    if (!norms.is_array() || norms.size() != a.hidden.size())
        throw ParseError("checkpoint: 'batch_norm' must list one entry per hidden layer");
    std::size_t width = a.input_size;
    for (std::size_t i = 0; i < a.hidden.size(); ++i) {
        const std::string lpath = "hidden[" + std::to_string(i) + "].";
        p.hidden.push_back(read_dense(hidden[i], lpath, width, a.hidden[i]));
        const std::string npath = "batch_norm[" + std::to_string(i) + "].";
        const auto cols = static_cast<Eigen::Index>(a.hidden[i]);
        BatchNorm bn;
        bn.gamma = read_tensor(norms[i], "gamma", npath, 1, cols);
        bn.beta = read_tensor(norms[i], "beta", npath, 1, cols);
        bn.running_mean = read_tensor(norms[i], "running_mean", npath, 1, cols);
        bn.running_var = read_tensor(norms[i], "running_var", npath, 1, cols);
        bn.momentum = require_as<double>(norms[i], "momentum", npath);
        bn.epsilon = require_as<double>(norms[i], "epsilon", npath);
        if (!(bn.running_var.array() > 0.0).all())
            throw ParseError("checkpoint: '" + npath + "running_var' must be positive");
        p.norms.push_back(std::move(bn));
        width = a.hidden[i];
    }
    p.output = read_dense(require(doc, "output", ""), "output.", width, a.output_size());
    return p;
}

void save_checkpoint(const NetworkParams& params, const std::filesystem::path& path)
{
    std::ofstream out(path, std::ios::trunc);
    if (!out)
        throw IoError("cannot open " + path.string() + " for writing");
    out << checkpoint_to_string(params);
    if (!out)
        throw IoError("write failed: " + path.string());
}

NetworkParams load_checkpoint(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw IoError("cannot open " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    try {
        return checkpoint_from_string(buf.str());
    } catch (const ParseError& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
}

} // namespace irsopt::net

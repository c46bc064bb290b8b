#pragma once

#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "paracflow/flows/eliminator.hpp"
#include "paracflow/flows/model.hpp"

namespace paracflow::flows {

inline constexpr int kCheckpointSchemaVersion = 1;

namespace detail {

using nlohmann::json;

inline json mat_to_json(const Mat& m) {
    return json{{"rows", m.rows}, {"cols", m.cols}, {"data", m.data}};
}

inline Mat mat_from_json(const json& j) {
    Mat m(j.at("rows").get<int>(), j.at("cols").get<int>());
    m.data = j.at("data").get<Vec>();
    check_shape(m.data.size() == static_cast<std::size_t>(m.rows) * m.cols,
                "checkpoint: matrix data length mismatch");
    return m;
}

inline json mlp_to_json(const MlpNet& net) {
    json j;
    j["dims"] = net.dims;
    j["activation"] = net.activation == numkit::Activation::Tanh ? "tanh" : "relu";
    j["weights"] = json::array();
    j["biases"] = json::array();
    for (const auto& w : net.weights) j["weights"].push_back(w.data);
    for (const auto& b : net.biases) j["biases"].push_back(b);
    return j;
}

inline MlpNet mlp_from_json(const json& j) {
    MlpNet net;
    net.dims = j.at("dims").get<std::vector<int>>();
    const auto act = j.at("activation").get<std::string>();
    if (act == "tanh")
        net.activation = numkit::Activation::Tanh;
    else if (act == "relu")
        net.activation = numkit::Activation::Relu;
    else
        throw std::runtime_error("checkpoint: unknown activation '" + act + "'");
    const auto& ws = j.at("weights");
    const auto& bs = j.at("biases");
    check_shape(ws.size() + 1 == net.dims.size() && bs.size() == ws.size(),
                "checkpoint: layer count mismatch");
    for (std::size_t l = 0; l < ws.size(); ++l) {
        Mat w(net.dims[l + 1], net.dims[l]);
        w.data = ws[l].get<Vec>();
        check_shape(w.data.size() == static_cast<std::size_t>(w.rows) * w.cols,
                    "checkpoint: weight length mismatch");
        net.weights.push_back(std::move(w));
        Vec b = bs[l].get<Vec>();
        check_shape(b.size() == static_cast<std::size_t>(net.dims[l + 1]),
                    "checkpoint: bias length mismatch");
        net.biases.push_back(std::move(b));
    }
    return net;
}

inline json coupling_to_json(const CouplingLayer& l) {
    return json{{"dim", l.dim},
                {"split", l.split},
                {"cond_dim", l.cond_dim},
                {"sigma", mlp_to_json(l.sigma_net)},
                {"t", mlp_to_json(l.t_net)}};
}

inline CouplingLayer coupling_from_json(const json& j) {
    CouplingLayer l;
    l.dim = j.at("dim").get<int>();
    l.split = j.at("split").get<int>();
    l.cond_dim = j.at("cond_dim").get<int>();
    l.sigma_net = mlp_from_json(j.at("sigma"));
    l.t_net = mlp_from_json(j.at("t"));
    l.validate();
    return l;
}

}  // namespace detail

inline nlohmann::json model_to_json(const ParaCFlowModel& m) {
    nlohmann::json j;
    j["schema_version"] = kCheckpointSchemaVersion;
    j["kind"] = "paracflow_model";
    j["action_dim"] = m.action_dim;
    j["context_dim"] = m.context_dim;
    j["width"] = m.width;
    j["split"] = m.split;
    j["train_ascend"] = m.train_ascend;
    j["seed"] = m.seed;
    j["ascend_w"] = detail::mat_to_json(m.ascend_w);
    j["permutations"] = nlohmann::json::array();
    for (const auto& p : m.perms) j["permutations"].push_back(p.map);
    j["layers"] = nlohmann::json::array();
    for (const auto& l : m.layers) j["layers"].push_back(detail::coupling_to_json(l));
    j["head"] = detail::mlp_to_json(m.head);
    return j;
}

inline ParaCFlowModel model_from_json(const nlohmann::json& j) {
    const int version = j.at("schema_version").get<int>();
    if (version != kCheckpointSchemaVersion)
        throw std::runtime_error("checkpoint: schema version " + std::to_string(version) +
                                 " does not match supported version " +
                                 std::to_string(kCheckpointSchemaVersion));
    ParaCFlowModel m;
    m.action_dim = j.at("action_dim").get<int>();
    m.context_dim = j.at("context_dim").get<int>();
    m.width = j.at("width").get<int>();
    m.split = j.at("split").get<int>();
    m.train_ascend = j.at("train_ascend").get<bool>();
    m.seed = j.at("seed").get<std::uint64_t>();
    m.ascend_w = detail::mat_from_json(j.at("ascend_w"));
    for (const auto& pj : j.at("permutations")) {
        Permutation p;
        p.map = pj.get<std::vector<int>>();
        check_shape(p.is_bijection(), "checkpoint: permutation is not a bijection");
        m.perms.push_back(std::move(p));
    }
    for (const auto& lj : j.at("layers")) m.layers.push_back(detail::coupling_from_json(lj));
    check_shape(m.perms.size() == m.layers.size(), "checkpoint: layer/permutation count mismatch");
    m.head = detail::mlp_from_json(j.at("head"));
    return m;
}

inline nlohmann::json eliminator_to_json(const Eliminator& e) {
    nlohmann::json j;
    j["schema_version"] = kCheckpointSchemaVersion;
    j["kind"] = "eliminator";
    j["width"] = e.width;
    j["lead"] = e.lead;
    j["layers"] = nlohmann::json::array();
    for (const auto& l : e.layers) j["layers"].push_back(detail::coupling_to_json(l));
    return j;
}

inline Eliminator eliminator_from_json(const nlohmann::json& j) {
    const int version = j.at("schema_version").get<int>();
    if (version != kCheckpointSchemaVersion)
        throw std::runtime_error("checkpoint: schema version " + std::to_string(version) +
                                 " does not match supported version " +
                                 std::to_string(kCheckpointSchemaVersion));
    Eliminator e;
    e.width = j.at("width").get<int>();
    e.lead = j.at("lead").get<int>();
    for (const auto& lj : j.at("layers")) e.layers.push_back(detail::coupling_from_json(lj));
    return e;
}

/// Atomic save: write to a temp file in the target directory, then rename.
inline void save_json(const nlohmann::json& j, const std::string& path) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) throw std::runtime_error("checkpoint: cannot open '" + tmp + "' for writing");
        out << j.dump();
        if (!out) throw std::runtime_error("checkpoint: write failed for '" + tmp + "'");
    }
    std::filesystem::rename(tmp, path);
}

inline nlohmann::json load_json(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("checkpoint: cannot open '" + path + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error("checkpoint: parse error in '" + path + "': " + e.what());
    }
    return j;
}

inline void save_model(const ParaCFlowModel& m, const std::string& path) {
    save_json(model_to_json(m), path);
}

inline ParaCFlowModel load_model(const std::string& path) {
    return model_from_json(load_json(path));
}

}  // namespace paracflow::flows

#pragma once

#include <string>

#include <json.hpp>

#include "cortexlab/agent/agent.hpp"
#include "cortexlab/experiments/plan.hpp"

namespace cortexlab::persistence {

using nlohmann::json;

/// Named parameter arrays with shapes, plus enough config to rebuild the agent.
inline json checkpoint_to_json(const agent::Agent& a, const std::string& config_hash, std::uint64_t seed) {
    const auto& cfg = a.config();
    json params = json::array();
    for (const auto& p : a.parameters()) {
        params.push_back({{"name", p.name},
                          {"shape", p.tensor.shape()},
                          {"trainable", p.trainable},
                          {"values", std::vector<double>(p.tensor.values().begin(), p.tensor.values().end())}});
    }
    return {{"schema_version", experiments::kSchemaVersion},
            {"code_version", experiments::kCodeVersion},
            {"config_hash", config_hash},
            {"seed", seed},
            {"condition", agent::condition_name(cfg.condition)},
            {"d_h", cfg.d_h},
            {"obs_size", cfg.obs_size},
            {"action_count", cfg.action_count},
            {"parameters", params}};
}

/// Copies the stored values into a freshly built agent of the same architecture.
inline void load_checkpoint(const json& j, agent::Agent& a) {
    if (j.at("schema_version").get<int>() != experiments::kSchemaVersion)
        throw ConfigError("checkpoint: unsupported schema version");
    const auto& cfg = a.config();
    if (j.at("condition").get<std::string>() != agent::condition_name(cfg.condition) ||
        j.at("d_h").get<std::size_t>() != cfg.d_h || j.at("obs_size").get<std::size_t>() != cfg.obs_size ||
        j.at("action_count").get<std::size_t>() != cfg.action_count)
        throw ConfigError("checkpoint: architecture does not match");
    const auto& stored = j.at("parameters");
    const auto& params = a.parameters();
    if (stored.size() != params.size()) throw ConfigError("checkpoint: parameter count differs");
    for (std::size_t i = 0; i < params.size(); ++i) {
        const auto& s = stored.at(i);
        if (s.at("name").get<std::string>() != params[i].name ||
            s.at("shape").get<ad::Shape>() != params[i].tensor.shape())
            throw ConfigError("checkpoint: mismatch at " + params[i].name);
        const auto values = s.at("values").get<std::vector<double>>();
        ad::Tensor t = params[i].tensor;
        auto dst = t.mutable_values();
        if (values.size() != dst.size()) throw ConfigError("checkpoint: size mismatch at " + params[i].name);
        std::copy(values.begin(), values.end(), dst.begin());
    }
}

}  // namespace cortexlab::persistence

#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "cortexlab/agent/condition.hpp"
#include "cortexlab/env/world.hpp"

namespace cortexlab::experiments {

using nlohmann::json;

inline constexpr int kSchemaVersion = 1;
inline constexpr const char* kCodeVersion = "cortexlab-0.1.0";

/// Hyperparameter overrides applied on top of the condition defaults.
struct Overrides {
    std::optional<double> lr;
    std::optional<double> lambda_e;
    std::optional<double> lambda_p;
    std::optional<double> lambda_m;
    std::optional<double> lambda_s;
    std::optional<double> clip_norm;
    std::optional<std::size_t> window;

    void apply(agent::AgentConfig& c) const {
        if (lr) c.adam.lr = *lr;
        if (lambda_e) c.weights.entropy = *lambda_e;
        if (lambda_p) c.weights.obs_prediction = *lambda_p;
        if (lambda_m) c.weights.metacog = *lambda_m;
        if (lambda_s) c.weights.self_prediction = *lambda_s;
        if (clip_norm) c.clip_norm = *clip_norm;
        if (window) c.window = *window;
    }

    json to_json() const {
        json j = json::object();
        if (lr) j["lr"] = *lr;
        if (lambda_e) j["lambda_e"] = *lambda_e;
        if (lambda_p) j["lambda_p"] = *lambda_p;
        if (lambda_m) j["lambda_m"] = *lambda_m;
        if (lambda_s) j["lambda_s"] = *lambda_s;
        if (clip_norm) j["clip_norm"] = *clip_norm;
        if (window) j["window"] = *window;
        return j;
    }

    static Overrides from_json(const json& j) {
        if (!j.is_object()) throw ConfigError("overrides: expected an object");
        Overrides o;
        for (const auto& [k, v] : j.items()) {
            if (!v.is_number()) throw ConfigError("overrides: '" + k + "' must be a number");
            if (k == "lr") o.lr = v.get<double>();
            else if (k == "lambda_e") o.lambda_e = v.get<double>();
            else if (k == "lambda_p") o.lambda_p = v.get<double>();
            else if (k == "lambda_m") o.lambda_m = v.get<double>();
            else if (k == "lambda_s") o.lambda_s = v.get<double>();
            else if (k == "clip_norm") o.clip_norm = v.get<double>();
            else if (k == "window") {
                if (!v.is_number_integer() || v.get<long long>() <= 0)
                    throw ConfigError("overrides: window must be a positive integer");
                o.window = static_cast<std::size_t>(v.get<long long>());
            } else {
                throw ConfigError("overrides: unknown key '" + k + "'");
            }
        }
        return o;
    }
};

struct PlanCell {
    agent::Condition condition = agent::Condition::AddOn;
    env::Variant variant = env::Variant::Std1D;
    long steps = 0;
    std::uint64_t seed = 0;

    std::string id() const {
        return std::string(agent::condition_name(condition)) + "_" + env::variant_name(variant) + "_" +
               std::to_string(steps) + "_s" + std::to_string(seed);
    }

    json to_json() const {
        return {{"condition", agent::condition_name(condition)},
                {"variant", env::variant_name(variant)},
                {"steps", steps},
                {"seed", seed}};
    }

    static PlanCell from_json(const json& j) {
        PlanCell c;
        const auto cond = agent::parse_condition(j.at("condition").get<std::string>());
        const auto var = env::parse_variant(j.at("variant").get<std::string>());
        if (!cond || !var) throw ConfigError("cell: unknown condition or variant");
        c.condition = *cond;
        c.variant = *var;
        c.steps = j.at("steps").get<long>();
        c.seed = j.at("seed").get<std::uint64_t>();
        return c;
    }

    agent::AgentConfig agent_config(const Overrides& o) const {
        auto cfg = agent::make_agent_config(condition, env::make_config(variant));
        o.apply(cfg);
        cfg.validate();
        return cfg;
    }
};

inline std::vector<std::uint64_t> default_seeds() {
    std::vector<std::uint64_t> s(20);
    for (std::uint64_t i = 0; i < 20; ++i) s[i] = i;
    return s;
}

struct ExperimentPlan {
    std::vector<agent::Condition> conditions;
    std::vector<env::Variant> variants{env::Variant::Std1D};
    long steps = 10000;
    std::vector<std::uint64_t> seeds = default_seeds();
    Overrides overrides;

    void validate() const {
        if (conditions.empty()) throw ConfigError("plan: no conditions");
        if (variants.empty()) throw ConfigError("plan: no environment variants");
        if (steps <= 0) throw ConfigError("plan: steps must be positive");
        if (seeds.empty()) throw ConfigError("plan: no seeds");
        if (std::set<std::uint64_t>(seeds.begin(), seeds.end()).size() != seeds.size())
            throw ConfigError("plan: duplicate seeds");
        if (std::set<agent::Condition>(conditions.begin(), conditions.end()).size() != conditions.size())
            throw ConfigError("plan: duplicate conditions");
        if (std::set<env::Variant>(variants.begin(), variants.end()).size() != variants.size())
            throw ConfigError("plan: duplicate variants");
        for (const auto& c : cells()) (void)c.agent_config(overrides);
    }

    /// Every (condition, variant, seed) cell exactly once, in a fixed order.
    std::vector<PlanCell> cells() const {
        std::vector<PlanCell> out;
        for (auto v : variants)
            for (auto c : conditions)
                for (auto s : seeds) out.push_back({c, v, steps, s});
        return out;
    }

    /// Canonical form: fixed key order, names instead of enums. Runtime-only
    /// settings (output directory, worker count) are not part of it.
    json canonical() const {
        json conds = json::array(), vars = json::array();
        for (auto c : conditions) conds.push_back(agent::condition_name(c));
        for (auto v : variants) vars.push_back(env::variant_name(v));
        return {{"conditions", conds},
                {"variants", vars},
                {"steps", steps},
                {"seeds", seeds},
                {"overrides", overrides.to_json()}};
    }

    std::string hash() const { return fnv1a_hex(canonical().dump()); }

    static std::string fnv1a_hex(const std::string& s) {
        std::uint64_t h = 0xcbf29ce484222325ULL;
        for (unsigned char c : s) {
            h ^= c;
            h *= 0x100000001b3ULL;
        }
        static const char* digits = "0123456789abcdef";
        std::string out(16, '0');
        for (int i = 15; i >= 0; --i, h >>= 4) out[i] = digits[h & 0xf];
        return out;
    }
};

}  // namespace cortexlab::experiments

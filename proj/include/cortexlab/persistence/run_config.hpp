#pragma once

#include <charconv>
#include <cstdlib>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "cortexlab/experiments/plan.hpp"

namespace cortexlab::persistence {

using nlohmann::json;

/// An unknown condition or environment name.
class NameError : public ConfigError {
public:
    using ConfigError::ConfigError;
};

inline agent::Condition condition_from_name(const std::string& s) {
    if (auto c = agent::parse_condition(s)) return *c;
    std::string known;
    for (auto c : agent::kAllConditions) known += std::string(known.empty() ? "" : ", ") + agent::condition_name(c);
    throw NameError("unknown condition '" + s + "' (known: " + known + ")");
}

inline env::Variant variant_from_name(const std::string& s) {
    if (auto v = env::parse_variant(s)) return *v;
    throw NameError("unknown environment '" + s + "' (known: std1d, nonstat1d, std2d, nonstat2d)");
}

inline std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = s.find(sep, start);
        out.push_back(s.substr(start, pos - start));
        if (pos == std::string::npos) break;
        start = pos + 1;
    }
    return out;
}

inline std::uint64_t parse_u64(const std::string& s) {
    std::uint64_t v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty()) throw ConfigError("not a seed: '" + s + "'");
    return v;
}

/// "0,1,2", "0-19" or a mix of both.
inline std::vector<std::uint64_t> parse_seed_list(const std::string& s) {
    std::vector<std::uint64_t> out;
    for (const auto& part : split(s, ',')) {
        const auto dash = part.find('-');
        if (dash == std::string::npos) {
            out.push_back(parse_u64(part));
            continue;
        }
        const auto lo = parse_u64(part.substr(0, dash)), hi = parse_u64(part.substr(dash + 1));
        if (hi < lo) throw ConfigError("empty seed range '" + part + "'");
        for (auto x = lo; x <= hi; ++x) out.push_back(x);
    }
    return out;
}

/// Plan plus the runtime-only settings. Only the plan enters the hash.
struct RunConfig {
    experiments::ExperimentPlan plan;
    std::optional<std::string> out;
    unsigned workers = 1;

    json to_json() const {
        json j = plan.canonical();
        j["schema_version"] = experiments::kSchemaVersion;
        if (out) j["out"] = *out;
        j["workers"] = workers;
        return j;
    }

    static RunConfig from_json(const json& j) {
        if (!j.is_object()) throw ConfigError("run config: expected an object");
        RunConfig rc;
        auto names = [](const json& v, const char* key) {
            if (v.is_string()) return std::vector<std::string>{v.get<std::string>()};
            if (!v.is_array()) throw ConfigError(std::string("run config: '") + key + "' must be a name or a list");
            return v.get<std::vector<std::string>>();
        };
        for (const auto& [k, v] : j.items()) {
            if (k == "schema_version") {
                if (v.get<int>() != experiments::kSchemaVersion) throw ConfigError("run config: unsupported schema version");
            } else if (k == "conditions" || k == "condition") {
                for (const auto& n : names(v, "conditions")) rc.plan.conditions.push_back(condition_from_name(n));
            } else if (k == "variants" || k == "variant" || k == "env") {
                rc.plan.variants.clear();
                for (const auto& n : names(v, "variants")) rc.plan.variants.push_back(variant_from_name(n));
            } else if (k == "steps") {
                if (!v.is_number_integer()) throw ConfigError("run config: steps must be an integer");
                rc.plan.steps = v.get<long>();
            } else if (k == "seeds") {
                rc.plan.seeds = v.is_string() ? parse_seed_list(v.get<std::string>()) : v.get<std::vector<std::uint64_t>>();
            } else if (k == "overrides") {
                rc.plan.overrides = experiments::Overrides::from_json(v);
            } else if (k == "out") {
                rc.out = v.get<std::string>();
            } else if (k == "workers") {
                if (!v.is_number_integer() || v.get<long>() < 1) throw ConfigError("run config: workers must be >= 1");
                rc.workers = v.get<unsigned>();
            } else {
                throw ConfigError("run config: unknown key '" + k + "'");
            }
        }
        rc.plan.validate();
        return rc;
    }
};

/// --out, else $CORTEXLAB_OUT, else ./cortexlab-out.
inline std::string resolve_out_dir(const std::optional<std::string>& flag) {
    if (flag && !flag->empty()) return *flag;
    if (const char* e = std::getenv("CORTEXLAB_OUT"); e && *e) return e;
    return "cortexlab-out";
}

}  // namespace cortexlab::persistence

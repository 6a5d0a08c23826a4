#pragma once

#include <cstdio>
#include <map>
#include <optional>
#include <sstream>
#include <string>

#include <json.hpp>

#include "cortexlab/diagnostics/diagnostics.hpp"
#include "cortexlab/experiments/record.hpp"

namespace cortexlab::diagnostics {

using nlohmann::json;

inline json stats_json(const SummaryStats& s) {
    return {{"mean", s.mean}, {"std", s.std}, {"min", s.min}, {"max", s.max}, {"n", s.n}};
}

/// {condition, seed, collapse, gamma_eff_range, sensitivity}; absent signals are "not_applicable".
inline json diagnostic_report(const experiments::RunRecord& r,
                              const std::optional<std::map<std::string, SignalSensitivity>>& sensitivity) {
    json j{{"schema_version", experiments::kSchemaVersion},
           {"code_version", r.code_version},
           {"config_hash", r.config_hash},
           {"condition", agent::condition_name(r.cell.condition)},
           {"variant", env::variant_name(r.cell.variant)},
           {"seed", r.cell.seed},
           {"steps", r.counts.steps},
           {"metric", r.metric}};
    const auto collapse = collapse_stats(r.telemetry);
    if (collapse.applicable()) {
        json c = json::object();
        for (const auto& [name, s] : collapse.signals) c[name] = stats_json(s);
        j["collapse"] = c;
        const auto& g = collapse.at("gamma_eff");
        j["gamma_eff_range"] = {{"min", g.min}, {"max", g.max}, {"width", g.range()}};
    } else {
        j["collapse"] = "not_applicable";
        j["gamma_eff_range"] = "not_applicable";
    }
    if (sensitivity) {
        json s = json::object();
        for (const auto& [name, e] : *sensitivity) {
            if (!e.mean_kl) {
                s[name] = "not_applicable";
                continue;
            }
            s[name] = {{"mean_kl", *e.mean_kl}, {"max_kl", e.max_kl}, {"min_kl", e.min_kl},
                       {"probes", e.probes}, {"site", e.site}};
        }
        j["sensitivity"] = s;
    }
    return j;
}

/// step,confidence,attn_1,attn_2,attn_3,gamma_eff,surprise,death,food; one row per step,
/// signal columns empty when the run had no monitor signals.
inline std::string collapse_csv(const experiments::RunRecord& r) {
    const auto& t = r.telemetry;
    std::vector<int> deaths(static_cast<std::size_t>(t.steps), 0), food(static_cast<std::size_t>(t.steps), 0);
    for (long s : t.death_steps) deaths.at(static_cast<std::size_t>(s)) = 1;
    for (long s : t.food_steps) food.at(static_cast<std::size_t>(s)) += 1;
    std::ostringstream os;
    os << "step,confidence,attn_1,attn_2,attn_3,gamma_eff,surprise,death,food\n";
    char buf[64];
    auto num = [&](double x) {
        std::snprintf(buf, sizeof buf, "%.17g", x);
        return std::string(buf);
    };
    for (std::size_t i = 0; i < deaths.size(); ++i) {
        os << i << ',';
        if (t.has_signals) {
            os << num(t.confidence[i]) << ',' << num(t.attn_alloc[0][i]) << ',' << num(t.attn_alloc[1][i]) << ','
               << num(t.attn_alloc[2][i]) << ',' << num(t.gamma_eff[i]) << ',' << num(t.surprise[i]) << ',';
        } else {
            os << ",,,,,,";
        }
        os << deaths[i] << ',' << food[i] << '\n';
    }
    return os.str();
}

}  // namespace cortexlab::diagnostics

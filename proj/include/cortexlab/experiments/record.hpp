#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "cortexlab/experiments/plan.hpp"
#include "cortexlab/experiments/stats.hpp"
#include "cortexlab/training/trainer.hpp"

namespace cortexlab::experiments {

struct RunRecord {
    PlanCell cell;
    std::string config_hash;
    std::string code_version = kCodeVersion;
    training::RunCounts counts;
    double metric = 0.0;
    std::size_t parameter_count = 0;
    training::TelemetrySeries telemetry;
    std::vector<training::WindowTelemetry> windows;
    double wall_seconds = 0.0;
};

inline json telemetry_to_json(const training::TelemetrySeries& t) {
    json j{{"has_signals", t.has_signals},
           {"steps", t.steps},
           {"food_steps", t.food_steps},
           {"poison_steps", t.poison_steps},
           {"death_steps", t.death_steps}};
    if (t.has_signals) {
        j["confidence"] = t.confidence;
        j["uncertainty"] = t.uncertainty;
        j["attn_alloc"] = {t.attn_alloc[0], t.attn_alloc[1], t.attn_alloc[2]};
        j["surprise"] = t.surprise;
        j["felt_duration"] = t.felt_duration;
        j["predictability"] = {t.predictability[0], t.predictability[1], t.predictability[2]};
        j["tsm_prediction_norm"] = t.tsm_prediction_norm;
        j["gamma_eff"] = t.gamma_eff;
    }
    return j;
}

inline training::TelemetrySeries telemetry_from_json(const json& j) {
    training::TelemetrySeries t;
    t.has_signals = j.at("has_signals").get<bool>();
    t.steps = j.at("steps").get<long>();
    t.food_steps = j.at("food_steps").get<std::vector<long>>();
    t.poison_steps = j.at("poison_steps").get<std::vector<long>>();
    t.death_steps = j.at("death_steps").get<std::vector<long>>();
    if (t.has_signals) {
        t.confidence = j.at("confidence").get<std::vector<double>>();
        t.uncertainty = j.at("uncertainty").get<std::vector<double>>();
        for (std::size_t i = 0; i < 3; ++i) {
            t.attn_alloc[i] = j.at("attn_alloc").at(i).get<std::vector<double>>();
            t.predictability[i] = j.at("predictability").at(i).get<std::vector<double>>();
        }
        t.surprise = j.at("surprise").get<std::vector<double>>();
        t.felt_duration = j.at("felt_duration").get<std::vector<double>>();
        t.tsm_prediction_norm = j.at("tsm_prediction_norm").get<std::vector<double>>();
        t.gamma_eff = j.at("gamma_eff").get<std::vector<double>>();
        const std::size_t n = static_cast<std::size_t>(t.steps);
        for (const auto* v : {&t.confidence, &t.uncertainty, &t.surprise, &t.felt_duration, &t.gamma_eff}) {
            if (v->size() != n) throw ConfigError("telemetry: series length does not match step count");
        }
    }
    return t;
}

inline json window_to_json(const training::WindowTelemetry& w) {
    return {{"window", w.window},       {"steps", w.steps},
            {"total", w.total},         {"policy", w.policy},
            {"entropy_coeff", w.entropy_coeff}, {"mean_log_prob", w.mean_log_prob},
            {"obs", w.obs},             {"surprise", w.surprise},
            {"tsm", w.tsm},             {"gamma_mean", w.gamma_mean},
            {"baseline", w.baseline},   {"grad_norm", w.grad_norm}};
}

inline training::WindowTelemetry window_from_json(const json& j) {
    training::WindowTelemetry w;
    w.window = j.at("window").get<long>();
    w.steps = j.at("steps").get<long>();
    w.total = j.at("total").get<double>();
    w.policy = j.at("policy").get<double>();
    w.entropy_coeff = j.at("entropy_coeff").get<double>();
    w.mean_log_prob = j.at("mean_log_prob").get<double>();
    w.obs = j.at("obs").get<double>();
    w.surprise = j.at("surprise").get<double>();
    w.tsm = j.at("tsm").get<double>();
    w.gamma_mean = j.at("gamma_mean").get<double>();
    w.baseline = j.at("baseline").get<double>();
    w.grad_norm = j.at("grad_norm").get<double>();
    return w;
}

/// `with_wall_time` off gives the reproducible part of the record.
inline json record_to_json(const RunRecord& r, bool with_wall_time = true) {
    json windows = json::array();
    for (const auto& w : r.windows) windows.push_back(window_to_json(w));
    json j{{"schema_version", kSchemaVersion},
           {"code_version", r.code_version},
           {"config_hash", r.config_hash},
           {"cell", r.cell.to_json()},
           {"steps", r.counts.steps},
           {"food", r.counts.food},
           {"poison", r.counts.poison},
           {"deaths", r.counts.deaths},
           {"reward", r.counts.reward},
           {"metric", r.metric},
           {"parameter_count", r.parameter_count},
           {"telemetry", telemetry_to_json(r.telemetry)},
           {"windows", windows}};
    if (with_wall_time) j["wall_seconds"] = r.wall_seconds;
    return j;
}

inline RunRecord record_from_json(const json& j) {
    if (j.at("schema_version").get<int>() != kSchemaVersion) throw ConfigError("record: unsupported schema version");
    RunRecord r;
    r.code_version = j.at("code_version").get<std::string>();
    r.config_hash = j.at("config_hash").get<std::string>();
    r.cell = PlanCell::from_json(j.at("cell"));
    r.counts.steps = j.at("steps").get<long>();
    r.counts.food = j.at("food").get<long>();
    r.counts.poison = j.at("poison").get<long>();
    r.counts.deaths = j.at("deaths").get<long>();
    r.counts.reward = j.at("reward").get<double>();
    r.metric = j.at("metric").get<double>();
    r.parameter_count = j.at("parameter_count").get<std::size_t>();
    r.telemetry = telemetry_from_json(j.at("telemetry"));
    for (const auto& w : j.at("windows")) r.windows.push_back(window_from_json(w));
    r.wall_seconds = j.value("wall_seconds", 0.0);
    return r;
}

}  // namespace cortexlab::experiments

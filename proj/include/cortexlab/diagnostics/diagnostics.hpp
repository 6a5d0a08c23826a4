#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cortexlab/agent/agent.hpp"
#include "cortexlab/env/world.hpp"
#include "cortexlab/training/trainer.hpp"

namespace cortexlab::diagnostics {

struct SummaryStats {
    double mean = 0.0;
    double std = 0.0;  // ddof = 1
    double min = 0.0;
    double max = 0.0;
    std::size_t n = 0;

    double range() const { return max - min; }
};

inline SummaryStats summarize(std::span<const double> xs) {
    if (xs.size() < 2) throw UsageError("summarize: sample standard deviation needs at least 2 samples");
    SummaryStats s;
    s.n = xs.size();
    double sum = 0.0;
    for (double x : xs) sum += x;
    s.mean = sum / s.n;
    double ss = 0.0;
    for (double x : xs) ss += (x - s.mean) * (x - s.mean);
    s.std = std::sqrt(ss / (s.n - 1));
    const auto [lo, hi] = std::minmax_element(xs.begin(), xs.end());
    s.min = *lo;
    s.max = *hi;
    return s;
}

/// Per-signal summaries; empty map when the run carried no monitor signals.
struct CollapseStats {
    std::map<std::string, SummaryStats> signals;

    bool applicable() const { return !signals.empty(); }
    const SummaryStats& at(const std::string& k) const { return signals.at(k); }
};

inline CollapseStats collapse_stats(const training::TelemetrySeries& s) {
    CollapseStats out;
    if (!s.has_signals) return out;
    out.signals["confidence"] = summarize(s.confidence);
    out.signals["uncertainty"] = summarize(s.uncertainty);
    for (std::size_t i = 0; i < 3; ++i) {
        out.signals["attn_alloc_" + std::to_string(i + 1)] = summarize(s.attn_alloc[i]);
        out.signals["predictability_" + std::to_string(i + 1)] = summarize(s.predictability[i]);
    }
    out.signals["surprise"] = summarize(s.surprise);
    out.signals["felt_duration"] = summarize(s.felt_duration);
    out.signals["tsm_prediction_norm"] = summarize(s.tsm_prediction_norm);
    out.signals["gamma_eff"] = summarize(s.gamma_eff);
    return out;
}

inline constexpr double kProbabilityFloor = 1e-12;

/// sum p_i ln(p_i / max(q_i, 1e-12)), with 0 ln 0 = 0.
inline double kl_divergence(std::span<const double> p, std::span<const double> q) {
    if (p.size() != q.size()) throw UsageError("kl_divergence: distributions differ in size");
    double kl = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (p[i] > 0.0) kl += p[i] * std::log(p[i] / std::max(q[i], kProbabilityFloor));
    }
    return std::max(kl, 0.0);
}

struct SignalSensitivity {
    std::optional<double> mean_kl;  // absent: not applicable in this condition
    double max_kl = 0.0;
    double min_kl = 0.0;
    long probes = 0;
    std::string site;
};

struct SensitivityOptions {
    long steps = 1000;
    long every = 100;
    double delta = 0.5;
    bool synthetic = false;  // inject into signals the condition does not consume
};

/// Frozen-parameter re-run on the run's environment seed; at every `every`-th step
/// each signal is perturbed by +delta at its consumption site and KL(base || perturbed)
/// of the policy is recorded. Neither the agent nor its parameters are modified.
inline std::map<std::string, SignalSensitivity> policy_sensitivity(const agent::Agent& a, const env::EnvConfig& env_cfg,
                                                                   std::uint64_t seed, const SensitivityOptions& opt) {
    if (opt.every <= 0) throw ConfigError("policy_sensitivity: probe interval must be positive");
    const auto paths = a.config().paths();
    std::map<std::string, SignalSensitivity> out;
    std::map<std::string, std::vector<double>> kls;
    for (auto s : agent::kProbeSignals) {
        auto site = agent::probe_site(paths, s);
        SignalSensitivity entry;
        if (site) {
            entry.site = *site;
        } else if (opt.synthetic) {
            entry.site = "synthetic";
        }
        out[agent::probe_signal_name(s)] = entry;
    }

    env::World world(env_cfg, seed);
    auto last = world.reset();
    agent::AgentState state;
    state.levels = a.params().cortex.initial_state();
    Rng act(seed, Stream::Evaluation);
    for (long t = 1; t <= opt.steps; ++t) {
        const agent::StepInput in{last.observation, last.dt, last.reward, last.events.in_danger};
        auto base = agent::agent_forward(a.config(), a.params(), state, in, nullptr, std::nullopt, false);
        if (t % opt.every == 0) {
            for (auto s : agent::kProbeSignals) {
                auto& entry = out[agent::probe_signal_name(s)];
                if (entry.site.empty()) continue;
                const auto pert = agent::agent_forward(a.config(), a.params(), state, in, nullptr,
                                                       agent::Probe{s, opt.delta});
                kls[agent::probe_signal_name(s)].push_back(kl_divergence(base.probs, pert.probs));
            }
        }
        const int action = static_cast<int>(act.categorical(base.probs));
        state = base.next.detached();
        last = world.step(action);
    }
    for (auto& [name, entry] : out) {
        const auto it = kls.find(name);
        if (it == kls.end() || it->second.empty()) continue;
        const auto& v = it->second;
        double sum = 0.0;
        for (double x : v) sum += x;
        entry.mean_kl = sum / v.size();
        entry.max_kl = *std::max_element(v.begin(), v.end());
        entry.min_kl = *std::min_element(v.begin(), v.end());
        entry.probes = static_cast<long>(v.size());
    }
    return out;
}

}  // namespace cortexlab::diagnostics

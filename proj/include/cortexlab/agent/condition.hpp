#pragma once

#include <array>
#include <optional>
#include <string>

#include "cortexlab/env/world.hpp"
#include "cortexlab/numeric/optim.hpp"

namespace cortexlab::agent {

enum class Condition {
    AddOn,
    Structural,
    NoSelfMonitoring,
    ParamMatched,
    AuxControl,
    SingleTau,
    ConfidenceOnly,
    SurpriseOnly,
    TsmOnly,
};

inline constexpr std::array<Condition, 9> kAllConditions{
    Condition::AddOn,      Condition::Structural,     Condition::NoSelfMonitoring,
    Condition::ParamMatched, Condition::AuxControl,   Condition::SingleTau,
    Condition::ConfidenceOnly, Condition::SurpriseOnly, Condition::TsmOnly,
};

inline const char* condition_name(Condition c) {
    switch (c) {
        case Condition::AddOn: return "addon";
        case Condition::Structural: return "structural";
        case Condition::NoSelfMonitoring: return "nosm";
        case Condition::ParamMatched: return "parammatched";
        case Condition::AuxControl: return "auxcontrol";
        case Condition::SingleTau: return "singletau";
        case Condition::ConfidenceOnly: return "confidenceonly";
        case Condition::SurpriseOnly: return "surpriseonly";
        case Condition::TsmOnly: return "tsmonly";
    }
    return "?";
}

inline std::optional<Condition> parse_condition(const std::string& s) {
    for (auto c : kAllConditions) {
        if (s == condition_name(c)) return c;
    }
    return std::nullopt;
}

/// Which parts of the architecture a condition switches on.
struct Pathways {
    bool modules = false;             // metacog, TSM, duration present; signals fed back as input
    bool confidence_entropy = false;  // entropy coefficient scaled by (1.5 - mean confidence)
    bool surprise_gating = false;     // workspace fires on surprise instead of every 10 steps
    bool tsm_policy = false;          // predictability-weighted levels + TSM prediction into the policy
    bool random_aux_targets = false;  // surprise/TSM losses regress onto noise
    bool single_tau = false;
    std::size_t d_h = 32;
};

inline Pathways pathways(Condition c) {
    Pathways p;
    switch (c) {
        case Condition::AddOn: p.modules = true; break;
        case Condition::Structural:
            p.modules = p.confidence_entropy = p.surprise_gating = p.tsm_policy = true;
            break;
        case Condition::NoSelfMonitoring: break;
        case Condition::ParamMatched: p.d_h = 40; break;
        case Condition::AuxControl: p.modules = p.random_aux_targets = true; break;
        case Condition::SingleTau: p.modules = p.single_tau = true; break;
        case Condition::ConfidenceOnly: p.modules = p.confidence_entropy = true; break;
        case Condition::SurpriseOnly: p.modules = p.surprise_gating = true; break;
        case Condition::TsmOnly: p.modules = p.tsm_policy = true; break;
    }
    return p;
}

struct LossWeights {
    double entropy = 0.01;
    double obs_prediction = 0.1;
    double metacog = 0.05;
    double self_prediction = 0.05;
};

inline constexpr std::size_t kFeedbackSize = 7;

struct AgentConfig {
    Condition condition = Condition::AddOn;
    std::size_t d_h = 32;
    std::size_t obs_size = 30;
    std::size_t action_count = 3;
    LossWeights weights;
    std::size_t window = 50;
    double clip_norm = 1.0;
    double baseline_decay = 0.99;
    ad::AdamConfig adam;

    Pathways paths() const {
        Pathways p = pathways(condition);
        p.d_h = d_h;
        return p;
    }

    std::size_t input_size() const { return obs_size + 1 + (paths().modules ? kFeedbackSize : 0); }

    void validate() const {
        if (d_h == 0 || d_h % 2 != 0) throw ConfigError("agent: d_h must be a positive even number");
        if (obs_size == 0) throw ConfigError("agent: empty observation");
        if (action_count < 2) throw ConfigError("agent: need at least two actions");
        if (window == 0) throw ConfigError("agent: window must be positive");
        if (!(clip_norm > 0)) throw ConfigError("agent: clip norm must be positive");
        if (!(baseline_decay >= 0 && baseline_decay < 1)) throw ConfigError("agent: baseline decay must be in [0,1)");
        if (!(adam.lr > 0)) throw ConfigError("agent: learning rate must be positive");
    }
};

inline AgentConfig make_agent_config(Condition c, const env::EnvConfig& env) {
    AgentConfig cfg;
    cfg.condition = c;
    cfg.d_h = pathways(c).d_h;
    cfg.obs_size = env.observation_size();
    cfg.action_count = static_cast<std::size_t>(env.action_count());
    return cfg;
}

/// lambda_e * (1.5 - c) when confidence drives exploration, lambda_e otherwise.
inline double entropy_coefficient(const AgentConfig& cfg, double mean_confidence) {
    if (!cfg.paths().confidence_entropy) return cfg.weights.entropy;
    return cfg.weights.entropy * (1.5 - mean_confidence);
}

}  // namespace cortexlab::agent

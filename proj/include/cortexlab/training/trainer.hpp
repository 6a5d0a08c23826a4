#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "cortexlab/agent/agent.hpp"
#include "cortexlab/env/world.hpp"
#include "cortexlab/training/loss.hpp"

namespace cortexlab::training {

/// Per-step monitor outputs and event markers for one run. Signal arrays are
/// empty in module-free conditions.
struct TelemetrySeries {
    bool has_signals = false;
    std::vector<double> confidence;
    std::vector<double> uncertainty;
    std::array<std::vector<double>, 3> attn_alloc;
    std::vector<double> surprise;
    std::vector<double> felt_duration;
    std::array<std::vector<double>, 3> predictability;
    std::vector<double> tsm_prediction_norm;
    std::vector<double> gamma_eff;
    std::vector<long> food_steps;
    std::vector<long> poison_steps;
    std::vector<long> death_steps;
    long steps = 0;

    void append(const monitor::MonitorSignals& s) {
        has_signals = true;
        confidence.push_back(s.confidence);
        uncertainty.push_back(s.uncertainty);
        for (std::size_t i = 0; i < 3; ++i) {
            attn_alloc[i].push_back(s.attn_alloc[i]);
            predictability[i].push_back(s.predictability[i]);
        }
        surprise.push_back(s.surprise);
        felt_duration.push_back(s.felt_duration);
        double sq = 0.0;
        for (double x : s.tsm_prediction) sq += x * x;
        tsm_prediction_norm.push_back(std::sqrt(sq));
        gamma_eff.push_back(s.gamma_eff);
    }
};

struct WindowTelemetry {
    long window = 0;
    long steps = 0;
    double total = 0.0;
    double policy = 0.0;
    double entropy_coeff = 0.0;
    double mean_log_prob = 0.0;
    double obs = 0.0;
    double surprise = 0.0;
    double tsm = 0.0;
    double gamma_mean = 0.0;
    double baseline = 0.0;
    double grad_norm = 0.0;
};

struct RunCounts {
    long steps = 0;
    long food = 0;    // every item eaten, poison included
    long poison = 0;
    long deaths = 0;
    double reward = 0.0;
};

/// Windowed REINFORCE over one agent/world pair. Random streams: environment,
/// action sampling and auxiliary targets all derive from the run seed.
class Trainer {
public:
    Trainer(const agent::AgentConfig& cfg, const env::EnvConfig& env_cfg, std::uint64_t seed)
        : agent_(cfg, seed),
          world_(env_cfg, seed),
          adam_(agent_.parameters(), cfg.adam),
          params_(agent_.parameters()),
          action_rng_(seed, Stream::ActionSampling),
          aux_rng_(seed, Stream::AuxTargets) {
        if (cfg.obs_size != env_cfg.observation_size() ||
            cfg.action_count != static_cast<std::size_t>(env_cfg.action_count()))
            throw ConfigError("trainer: agent and environment dimensions disagree");
        baseline_.decay = cfg.baseline_decay;
        last_ = world_.reset();
    }

    void run(long steps) {
        for (long i = 0; i < steps; ++i) step();
    }

    /// One environment step; updates when the window is full.
    void step() {
        const agent::StepInput in{last_.observation, last_.dt, last_.reward, last_.events.in_danger};
        auto out = agent_.forward(in, &aux_rng_);
        const int action = static_cast<int>(action_rng_.categorical(out.probs));
        auto outcome = world_.step(action);

        window_.log_probs.push_back(ad::select(out.log_probs, static_cast<std::size_t>(action)));
        window_.rewards.push_back(outcome.reward);
        window_.gammas.push_back(out.gamma_eff);
        if (out.obs_loss) window_.obs_terms.push_back(*out.obs_loss);
        if (out.surprise_loss) window_.surprise_terms.push_back(*out.surprise_loss);
        if (out.tsm_loss) window_.tsm_terms.push_back(*out.tsm_loss);
        if (out.confidence.defined()) window_.confidences.push_back(out.confidence.item());
        if (out.signals) telemetry_.append(*out.signals);

        const long t = counts_.steps;
        counts_.food += outcome.events.ate_food;
        counts_.poison += outcome.events.ate_poison;
        counts_.reward += outcome.reward;
        for (int k = 0; k < outcome.events.ate_food; ++k) telemetry_.food_steps.push_back(t);
        if (outcome.events.ate_poison > 0) telemetry_.poison_steps.push_back(t);
        if (outcome.events.died) {
            ++counts_.deaths;
            telemetry_.death_steps.push_back(t);
        }
        ++counts_.steps;
        telemetry_.steps = counts_.steps;

        baseline_.update(outcome.reward);
        agent_.commit(out);
        last_ = std::move(outcome);
        if (window_.size() >= agent_.config().window) update();
    }

    /// Applies the accumulated window (also used to flush a partial one).
    void update() {
        if (window_.empty()) return;
        const auto loss = total_loss(window_, window_baseline_, agent_.config());
        ad::backward(loss.total);
        WindowTelemetry w;
        w.window = static_cast<long>(windows_.size());
        w.steps = static_cast<long>(window_.size());
        w.total = loss.total.item();
        w.policy = loss.policy;
        w.entropy_coeff = loss.entropy_coeff;
        w.mean_log_prob = loss.mean_log_prob;
        w.obs = loss.obs;
        w.surprise = loss.surprise;
        w.tsm = loss.tsm;
        w.gamma_mean = loss.gamma_mean;
        w.baseline = window_baseline_;
        w.grad_norm = ad::clip_global_norm(params_, agent_.config().clip_norm);
        adam_.step(params_);
        ad::zero_grads(params_);
        windows_.push_back(w);
        agent_.detach_state();
        window_.clear();
        window_baseline_ = baseline_.value;
    }

    agent::Agent& agent() { return agent_; }
    const agent::Agent& agent() const { return agent_; }
    env::World& world() { return world_; }
    const RunCounts& counts() const { return counts_; }
    const TelemetrySeries& telemetry() const { return telemetry_; }
    const std::vector<WindowTelemetry>& windows() const { return windows_; }
    const EmaBaseline& baseline() const { return baseline_; }
    const WindowBuffer& window() const { return window_; }
    const ad::Adam& optimizer() const { return adam_; }

private:
    agent::Agent agent_;
    env::World world_;
    ad::Adam adam_;
    ad::ParameterList params_;
    Rng action_rng_;
    Rng aux_rng_;
    EmaBaseline baseline_;
    double window_baseline_ = 0.0;
    WindowBuffer window_;
    env::StepOutcome last_;
    RunCounts counts_;
    TelemetrySeries telemetry_;
    std::vector<WindowTelemetry> windows_;
};

}  // namespace cortexlab::training

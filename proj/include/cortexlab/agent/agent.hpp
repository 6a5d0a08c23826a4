#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "cortexlab/agent/condition.hpp"
#include "cortexlab/cortical/workspace.hpp"
#include "cortexlab/monitor/monitor.hpp"

namespace cortexlab::agent {

using ad::Tensor;
using cortical::kLevels;
using cortical::LevelHidden;

inline constexpr double kPredictabilitySharpness = 5.0;

struct AgentParams {
    ad::Linear projection;
    cortical::Hierarchy cortex;
    cortical::WorkspaceParams workspace;
    ad::Linear policy_hidden;
    ad::Linear policy_out;
    ad::Linear obs_head;  // bias-free
    std::optional<monitor::MetacogParams> metacog;
    std::optional<monitor::TsmParams> tsm;
    std::optional<monitor::DurationParams> duration;

    AgentParams() = default;
    AgentParams(const AgentConfig& cfg, Rng& rng) {
        const auto paths = cfg.paths();
        const std::size_t d = cfg.d_h;
        projection = ad::Linear(cfg.input_size(), d, rng);
        cortex = cortical::Hierarchy(d, rng, paths.single_tau);
        workspace = cortical::WorkspaceParams(d, 4 * d, rng, paths.surprise_gating);
        policy_hidden = ad::Linear(paths.tsm_policy ? 2 * d : d, d, rng);
        policy_out = ad::Linear(d, cfg.action_count, rng);
        obs_head = ad::Linear(d, cfg.obs_size, rng, false);
        if (paths.modules) {
            metacog.emplace(d, rng);
            tsm.emplace(d, rng);
            duration.emplace(d, rng);
        }
    }

    ad::ParameterList parameters() const {
        ad::ParameterList ps;
        projection.collect(ps, "input");
        cortex.collect(ps);
        workspace.collect(ps);
        policy_hidden.collect(ps, "policy.hidden");
        policy_out.collect(ps, "policy.out");
        obs_head.collect(ps, "obs_head");
        if (metacog) metacog->collect(ps);
        if (tsm) tsm->collect(ps);
        if (duration) duration->collect(ps);
        return ps;
    }
};

/// Everything carried from one step to the next.
struct AgentState {
    cortical::LevelStates levels;
    cortical::WorkspaceState workspace;
    std::optional<std::array<Tensor, kLevels>> predictions;  // low-rank next-state guesses
    monitor::SnapshotBuffer snapshots;
    Tensor feedback;                       // previous [c, u, a1, a2, a3, surprise, d_felt]
    std::optional<Tensor> pending_obs;     // prediction of the next observation
    long step = 0;

    AgentState detached() const {
        AgentState s;
        for (std::size_t i = 0; i < kLevels; ++i) s.levels[i] = levels[i].detached();
        s.workspace = workspace.detached();
        if (predictions) {
            std::array<Tensor, kLevels> p;
            for (std::size_t i = 0; i < kLevels; ++i) p[i] = (*predictions)[i].detach();
            s.predictions = p;
        }
        s.snapshots = snapshots;
        if (feedback.defined()) s.feedback = feedback.detach();
        s.step = step;
        return s;
    }
};

enum class ProbeSignal { Confidence, Surprise, Predictability };

inline constexpr std::array<ProbeSignal, 3> kProbeSignals{ProbeSignal::Confidence, ProbeSignal::Surprise,
                                                         ProbeSignal::Predictability};

inline const char* probe_signal_name(ProbeSignal s) {
    switch (s) {
        case ProbeSignal::Confidence: return "confidence";
        case ProbeSignal::Surprise: return "surprise";
        case ProbeSignal::Predictability: return "predictability";
    }
    return "?";
}

/// Additive perturbation of one monitor signal where the policy consumes it.
struct Probe {
    ProbeSignal signal = ProbeSignal::Confidence;
    double delta = 0.5;
};

/// Where a probe lands for a condition; empty when the signal has no consumer.
inline std::optional<std::string> probe_site(const Pathways& p, ProbeSignal s) {
    switch (s) {
        case ProbeSignal::Confidence:
            if (p.modules) return std::string("feedback[0]");
            break;
        case ProbeSignal::Surprise:
            if (p.modules) return std::string(p.surprise_gating ? "feedback[5]+gate" : "feedback[5]");
            break;
        case ProbeSignal::Predictability:
            if (p.tsm_policy) return std::string("predictability logits");
            break;
    }
    return std::nullopt;
}

struct StepInput {
    std::span<const double> obs;
    double dt = 1.0;
    double last_reward = 0.0;
    bool in_danger = false;
};

struct StepOutput {
    Tensor logits;
    Tensor log_probs;
    std::vector<double> probs;
    AgentState next;
    std::optional<Tensor> obs_loss;
    std::optional<Tensor> surprise_loss;
    std::optional<Tensor> tsm_loss;
    Tensor confidence;  // undefined without modules
    Tensor gamma_eff;
    std::optional<monitor::MonitorSignals> signals;
    bool fired = false;
    double fire_weight = 0.0;
};

namespace detail {

inline Tensor one_hot(std::size_t n, std::size_t k, double value) {
    std::vector<double> v(n, 0.0);
    v[k] = value;
    return Tensor::vector(std::move(v));
}

inline Tensor uniform_noise(std::size_t n, Rng& rng) {
    std::vector<double> v(n);
    for (auto& x : v) x = rng.uniform(-1.0, 1.0);
    return Tensor::vector(std::move(v));
}


}  // namespace detail

/// One agent step as a pure function of (params, state, input). With a probe, or
/// with `with_losses` off, the losses are skipped and no random numbers are drawn.
/// `aux_rng` supplies the random regression targets of the auxiliary-control condition.
inline StepOutput agent_forward(const AgentConfig& cfg, const AgentParams& p, const AgentState& state,
                                const StepInput& in, Rng* aux_rng = nullptr,
                                const std::optional<Probe>& probe = std::nullopt, bool with_losses = true) {
    using namespace ad;
    const auto paths = cfg.paths();
    const std::size_t d = cfg.d_h;
    if (in.obs.size() != cfg.obs_size) throw ConfigError("agent: observation size does not match the configuration");
    const bool training = with_losses && !probe.has_value();
    const bool probe_conf = probe && probe->signal == ProbeSignal::Confidence;
    const bool probe_surprise = probe && probe->signal == ProbeSignal::Surprise;
    const bool probe_pred = probe && probe->signal == ProbeSignal::Predictability;

    StepOutput out;
    AgentState& next = out.next;
    next.step = state.step + 1;

    const Tensor obs = Tensor::vector({in.obs.begin(), in.obs.end()});
    std::vector<Tensor> parts{obs, Tensor::vector({in.dt})};
    if (paths.modules) {
        Tensor fb = state.feedback.defined() ? state.feedback : Tensor::zeros({kFeedbackSize});
        if (probe_conf) fb = add(fb, detail::one_hot(kFeedbackSize, 0, probe->delta));
        if (probe_surprise) fb = add(fb, detail::one_hot(kFeedbackSize, 5, probe->delta));
        parts.push_back(fb);
    }
    const Tensor u = p.projection(concat(parts));
    auto stepped = cortical::hierarchy_step(p.cortex, state.levels, u, in.dt);
    next.levels = stepped.next;
    LevelHidden h;
    for (std::size_t i = 0; i < kLevels; ++i) h[i] = next.levels[i].h;

    if (training && state.pending_obs) out.obs_loss = mse(*state.pending_obs, obs);

    Tensor attn = Tensor::vector({1.0 / 3, 1.0 / 3, 1.0 / 3});
    Tensor gate_surprise = Tensor::scalar(0.0);
    Tensor predictability_logits, tsm_prediction;
    out.gamma_eff = Tensor::scalar(monitor::kBaseGamma);
    if (paths.modules) {
        const Tensor h_cat = concat({h[0], h[1], h[2]});
        std::optional<std::array<Tensor, kLevels>> targets;
        if (training && paths.random_aux_targets && state.predictions) {
            if (!aux_rng) throw UsageError("agent: auxiliary-control condition needs a target stream");
            targets = {detail::uniform_noise(d, *aux_rng), detail::uniform_noise(d, *aux_rng),
                       detail::uniform_noise(d, *aux_rng)};
        }
        auto scored = monitor::surprise_predict_and_score(*p.metacog, h, state.predictions, targets);
        next.predictions = scored.predictions;
        if (training) out.surprise_loss = scored.loss;
        const auto mc = monitor::metacog_forward(*p.metacog, h_cat, scored.error);
        attn = mc.attn_alloc;
        gate_surprise = probe_surprise ? add_scalar(scored.error, probe->delta) : scored.error;

        next.snapshots = state.snapshots;
        next.snapshots.push(state.step, h_cat);
        const auto self_model = monitor::tsm_predict(*p.tsm, h_cat);
        predictability_logits = self_model.predictability_logits;
        tsm_prediction = self_model.prediction;
        if (training) {
            Tensor target = h_cat;
            if (paths.random_aux_targets && next.snapshots.at(state.step - monitor::kTsmHorizon)) {
                if (!aux_rng) throw UsageError("agent: auxiliary-control condition needs a target stream");
                target = detail::uniform_noise(kLevels * d, *aux_rng);
            }
            if (auto delayed = monitor::tsm_delayed_loss(*p.tsm, next.snapshots, target, state.step))
                out.tsm_loss = delayed->loss;
        }

        const Tensor features = concat({
            Tensor::scalar(in.dt),
            l2norm(sub(h[0], state.levels[0].h)),
            l2norm(sub(h[1], state.levels[1].h)),
            l2norm(sub(h[2], state.levels[2].h)),
            scored.error,
            Tensor::scalar(std::abs(in.last_reward)),
            Tensor::scalar(in.in_danger ? 1.0 : 0.0),
            mc.confidence,
        });
        const Tensor felt = monitor::felt_duration(*p.duration, features, h_cat);
        out.gamma_eff = monitor::effective_gamma(felt);
        out.confidence = mc.confidence;
        next.feedback = concat({mc.vector(), felt});

        monitor::MonitorSignals sig;
        sig.confidence = mc.confidence.item();
        sig.uncertainty = mc.uncertainty.item();
        for (std::size_t i = 0; i < kLevels; ++i) {
            sig.attn_alloc[i] = mc.attn_alloc[i];
            sig.predictability[i] = self_model.predictability[i];
        }
        sig.surprise = scored.surprise;
        sig.felt_duration = felt.item();
        const auto pv = self_model.prediction.values();
        sig.tsm_prediction.assign(pv.begin(), pv.end());
        sig.gamma_eff = out.gamma_eff.item();
        out.signals = std::move(sig);
    }

    next.workspace = state.workspace;
    next.workspace.push(h);
    const auto mode = paths.surprise_gating ? cortical::FiringMode::SurpriseGated : cortical::FiringMode::Periodic;
    const auto bc = cortical::workspace_maybe_broadcast(p.workspace, next.workspace, h, attn, gate_surprise, mode);
    out.fired = bc.fired;
    out.fire_weight = bc.weight;
    for (std::size_t i = 0; i < kLevels; ++i) next.levels[i].h = bc.hidden[i];

    Tensor policy_in = bc.hidden[2];
    if (paths.tsm_policy) {
        Tensor logits = predictability_logits;
        if (probe_pred) logits = add_scalar(logits, probe->delta);
        const Tensor w = softmax(scale(sigmoid(logits), kPredictabilitySharpness));
        std::vector<Tensor> weighted;
        for (std::size_t i = 0; i < kLevels; ++i) weighted.push_back(mul_scalar(select(w, i), bc.hidden[i]));
        policy_in = concat({add_n(weighted), detach(slice(tsm_prediction, 2 * d, d))});
    }
    out.logits = p.policy_out(relu(p.policy_hidden(policy_in)));
    out.log_probs = log_softmax(out.logits);
    out.probs.resize(cfg.action_count);
    for (std::size_t a = 0; a < cfg.action_count; ++a) out.probs[a] = std::exp(out.log_probs[a]);

    if (training) next.pending_obs = p.obs_head(bc.hidden[2]);
    return out;
}

/// Parameters, optimizer-visible list and recurrent state for one condition.
class Agent {
public:
    Agent(AgentConfig cfg, std::uint64_t seed) : cfg_(std::move(cfg)) {
        cfg_.validate();
        Rng init(seed, Stream::AgentInit);
        params_ = AgentParams(cfg_, init);
        list_ = params_.parameters();
        reset_state();
    }

    const AgentConfig& config() const { return cfg_; }
    const AgentParams& params() const { return params_; }
    const ad::ParameterList& parameters() const { return list_; }
    const AgentState& state() const { return state_; }

    std::size_t count_parameters() const {
        std::size_t n = 0;
        for (const auto& e : list_) {
            if (e.trainable) n += e.tensor.numel();
        }
        return n;
    }

    StepOutput forward(const StepInput& in, Rng* aux_rng = nullptr,
                       const std::optional<Probe>& probe = std::nullopt) const {
        return agent_forward(cfg_, params_, state_, in, aux_rng, probe);
    }

    void commit(StepOutput& out) { state_ = std::move(out.next); }

    void reset_state() {
        state_ = AgentState{};
        state_.levels = params_.cortex.initial_state();
    }

    void detach_state() { state_ = state_.detached(); }

private:
    AgentConfig cfg_;
    AgentParams params_;
    ad::ParameterList list_;
    AgentState state_;
};

}  // namespace cortexlab::agent

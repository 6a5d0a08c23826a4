#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "cortexlab/agent/condition.hpp"
#include "cortexlab/numeric/ops.hpp"

namespace cortexlab::training {

using ad::Tensor;

/// G_t = r_t + gamma_t G_{t+1}, G = 0 past the end of the window.
inline std::vector<double> compute_returns(std::span<const double> rewards, std::span<const double> gammas) {
    if (rewards.size() != gammas.size()) throw UsageError("compute_returns: length mismatch");
    std::vector<double> g(rewards.size());
    double next = 0.0;
    for (std::size_t i = rewards.size(); i-- > 0;) {
        next = rewards[i] + gammas[i] * next;
        g[i] = next;
    }
    return g;
}

/// Same recursion with differentiable discounts.
inline std::vector<Tensor> compute_returns(std::span<const double> rewards, std::span<const Tensor> gammas) {
    if (rewards.size() != gammas.size()) throw UsageError("compute_returns: length mismatch");
    std::vector<Tensor> g(rewards.size());
    Tensor next = Tensor::scalar(0.0);
    for (std::size_t i = rewards.size(); i-- > 0;) {
        next = ad::add_scalar(ad::mul(gammas[i], next), rewards[i]);
        g[i] = next;
    }
    return g;
}

struct EmaBaseline {
    double value = 0.0;
    double decay = 0.99;

    void update(double reward) { value = decay * value + (1.0 - decay) * reward; }
};

/// Per-step quantities accumulated over one BPTT window.
struct WindowBuffer {
    std::vector<Tensor> log_probs;  // of the sampled actions
    std::vector<double> rewards;
    std::vector<Tensor> gammas;
    std::vector<Tensor> obs_terms;
    std::vector<Tensor> surprise_terms;
    std::vector<Tensor> tsm_terms;
    std::vector<double> confidences;

    std::size_t size() const { return log_probs.size(); }
    bool empty() const { return log_probs.empty(); }

    void clear() { *this = WindowBuffer{}; }
};

struct LossBreakdown {
    Tensor total;
    double policy = 0.0;
    double entropy_coeff = 0.0;
    double mean_log_prob = 0.0;
    double obs = 0.0;
    double surprise = 0.0;
    double tsm = 0.0;
    double gamma_mean = 0.0;
    int terms = 0;
};

inline Tensor mean_of(const std::vector<Tensor>& xs) { return ad::scale(ad::add_n(xs), 1.0 / xs.size()); }

/// L = mean[-log pi (G - b)] + lambda_e' mean[log pi] + lambda_p mean(obs) + lambda_m mean(surprise)
///     + lambda_s mean(tsm); empty auxiliary lists drop their term.
inline LossBreakdown total_loss(const WindowBuffer& w, double baseline, const agent::AgentConfig& cfg) {
    using namespace ad;
    if (w.empty()) throw UsageError("total_loss: empty window");
    if (w.rewards.size() != w.size() || w.gammas.size() != w.size())
        throw UsageError("total_loss: window lists differ in length");
    LossBreakdown out;
    const auto returns = compute_returns(w.rewards, w.gammas);
    std::vector<Tensor> pg;
    double gsum = 0.0;
    for (std::size_t t = 0; t < w.size(); ++t) {
        pg.push_back(mul(neg(w.log_probs[t]), add_scalar(returns[t], -baseline)));
        gsum += w.gammas[t].item();
    }
    out.gamma_mean = gsum / w.size();

    double mean_conf = 0.5;
    if (!w.confidences.empty()) {
        mean_conf = 0.0;
        for (double c : w.confidences) mean_conf += c;
        mean_conf /= w.confidences.size();
    }
    out.entropy_coeff = agent::entropy_coefficient(cfg, mean_conf);

    const Tensor policy = mean_of(pg);
    const Tensor mean_lp = mean_of(w.log_probs);
    out.policy = policy.item();
    out.mean_log_prob = mean_lp.item();
    std::vector<Tensor> terms{policy, scale(mean_lp, out.entropy_coeff)};
    auto aux = [&](const std::vector<Tensor>& xs, double weight, double& value) {
        if (xs.empty()) return;
        const Tensor m = mean_of(xs);
        value = m.item();
        terms.push_back(scale(m, weight));
    };
    aux(w.obs_terms, cfg.weights.obs_prediction, out.obs);
    aux(w.surprise_terms, cfg.weights.metacog, out.surprise);
    aux(w.tsm_terms, cfg.weights.self_prediction, out.tsm);
    out.terms = static_cast<int>(terms.size());
    out.total = add_n(terms);
    return out;
}

}  // namespace cortexlab::training

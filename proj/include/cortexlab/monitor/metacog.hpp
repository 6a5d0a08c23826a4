#pragma once

#include <array>
#include <optional>
#include <string>

#include "cortexlab/cortical/hierarchy.hpp"
#include "cortexlab/numeric/layers.hpp"

namespace cortexlab::monitor {

using ad::Tensor;
using cortical::kLevels;
using cortical::LevelHidden;

inline constexpr std::size_t kPredictorRank = 8;
inline constexpr double kSurpriseLossWeight = 0.05;

/// Confidence/uncertainty/attention head plus per-level low-rank next-state predictors.
struct MetacogParams {
    ad::Linear hidden;  // 3 d_h -> 32
    ad::Linear out;     // 32 -> 6; channel 5 unused, surprise is supplied separately
    std::array<ad::Linear, kLevels> down;  // d_h -> 8
    std::array<ad::Linear, kLevels> up;    // 8 -> d_h

    MetacogParams() = default;
    MetacogParams(std::size_t d_h, Rng& rng) : hidden(kLevels * d_h, 32, rng), out(32, 6, rng) {
        for (std::size_t i = 0; i < kLevels; ++i) {
            down[i] = ad::Linear(d_h, kPredictorRank, rng);
            up[i] = ad::Linear(kPredictorRank, d_h, rng);
        }
    }

    void collect(ad::ParameterList& ps) const {
        hidden.collect(ps, "metacog.hidden");
        out.collect(ps, "metacog.out");
        for (std::size_t i = 0; i < kLevels; ++i) {
            down[i].collect(ps, "metacog.down" + std::to_string(i + 1));
            up[i].collect(ps, "metacog.up" + std::to_string(i + 1));
        }
    }
};

struct MetacogSignals {
    Tensor confidence;   // scalar, sigmoid
    Tensor uncertainty;  // scalar, softplus
    Tensor attn_logits;  // {3}
    Tensor attn_alloc;   // {3}, softmax
    Tensor surprise;     // scalar

    /// [confidence, uncertainty, a1, a2, a3, surprise]
    Tensor vector() const { return ad::concat({confidence, uncertainty, attn_alloc, surprise}); }
};

/// `surprise` is the prediction error of the previous step's predictions against
/// the current states (0 when there were none).
inline MetacogSignals metacog_forward(const MetacogParams& p, const Tensor& h_cat, const Tensor& surprise) {
    using namespace ad;
    const Tensor raw = p.out(relu(p.hidden(h_cat)));
    MetacogSignals s;
    s.confidence = sigmoid(select(raw, 0));
    s.uncertainty = softplus(select(raw, 1));
    s.attn_logits = slice(raw, 2, 3);
    s.attn_alloc = softmax(s.attn_logits);
    s.surprise = surprise;
    return s;
}

inline MetacogSignals metacog_forward(const MetacogParams& p, const Tensor& h_cat, double surprise) {
    return metacog_forward(p, h_cat, Tensor::scalar(surprise));
}

struct SurpriseScore {
    std::array<Tensor, kLevels> predictions;  // for the next step
    std::optional<Tensor> loss;               // mean over levels of MSE(prediction, target)
    Tensor error = Tensor::scalar(0.0);       // mean over levels of MSE(prediction, actual)
    double surprise = 0.0;                    // error's value
};

/// Scores the stored predictions against the current states and makes new ones.
/// `targets`, when given, replace the actual states in the loss only.
inline SurpriseScore surprise_predict_and_score(const MetacogParams& p, const LevelHidden& levels,
                                                const std::optional<std::array<Tensor, kLevels>>& stored,
                                                const std::optional<std::array<Tensor, kLevels>>& targets = std::nullopt) {
    using namespace ad;
    SurpriseScore out;
    if (stored) {
        std::vector<Tensor> errs, losses;
        for (std::size_t i = 0; i < kLevels; ++i) {
            errs.push_back(mse((*stored)[i], levels[i]));
            losses.push_back(targets ? mse((*stored)[i], (*targets)[i]) : errs.back());
        }
        out.error = scale(add_n(errs), 1.0 / kLevels);
        out.surprise = out.error.item();
        out.loss = targets ? scale(add_n(losses), 1.0 / kLevels) : out.error;
    }
    for (std::size_t i = 0; i < kLevels; ++i) out.predictions[i] = p.up[i](p.down[i](levels[i]));
    return out;
}

}  // namespace cortexlab::monitor

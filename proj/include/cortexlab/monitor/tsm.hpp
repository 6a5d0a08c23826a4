#pragma once

#include <deque>
#include <optional>
#include <utility>

#include "cortexlab/cortical/hierarchy.hpp"
#include "cortexlab/numeric/layers.hpp"

namespace cortexlab::monitor {

using ad::Tensor;

inline constexpr std::size_t kTsmLatent = 16;
inline constexpr int kTsmHorizon = 5;
inline constexpr std::size_t kTsmBufferCapacity = kTsmHorizon + 5;
inline constexpr double kSelfPredictionLossWeight = 0.05;

/// Temporal self-model: z = relu(enc h), z_mod = z * sigmoid(hor H), prediction = dec z_mod,
/// predictability = sigmoid(head z). enc, hor and dec are bias-free.
struct TsmParams {
    ad::Linear enc;   // 3 d_h -> 16
    ad::Linear hor;   // 1 -> 16
    ad::Linear dec;   // 16 -> 3 d_h
    ad::Linear head;  // 16 -> 3

    TsmParams() = default;
    TsmParams(std::size_t d_h, Rng& rng)
        : enc(cortical::kLevels * d_h, kTsmLatent, rng, false),
          hor(1, kTsmLatent, rng, false),
          dec(kTsmLatent, cortical::kLevels * d_h, rng, false),
          head(kTsmLatent, cortical::kLevels, rng) {}

    void collect(ad::ParameterList& ps) const {
        enc.collect(ps, "tsm.enc");
        hor.collect(ps, "tsm.hor");
        dec.collect(ps, "tsm.dec");
        head.collect(ps, "tsm.head");
    }
};

struct TsmOutput {
    Tensor prediction;              // {3 d_h}
    Tensor predictability_logits;  // {3}
    Tensor predictability;         // {3}
};

inline TsmOutput tsm_predict(const TsmParams& p, const Tensor& h_cat, double horizon = kTsmHorizon) {
    using namespace ad;
    const Tensor z = relu(p.enc(h_cat));
    const Tensor z_mod = mul(z, sigmoid(p.hor(Tensor::vector({horizon}))));
    TsmOutput out;
    out.prediction = p.dec(z_mod);
    out.predictability_logits = p.head(z);
    out.predictability = sigmoid(out.predictability_logits);
    return out;
}

/// Detached (step, [h1,h2,h3]) snapshots, newest at the back.
class SnapshotBuffer {
public:
    void push(long step, const Tensor& h_cat) {
        entries_.emplace_back(step, h_cat.detach());
        while (entries_.size() > kTsmBufferCapacity) entries_.pop_front();
    }

    std::optional<Tensor> at(long step) const {
        for (const auto& [s, t] : entries_) {
            if (s == step) return t;
        }
        return std::nullopt;
    }

    std::size_t size() const { return entries_.size(); }
    const std::deque<std::pair<long, Tensor>>& entries() const { return entries_; }

private:
    std::deque<std::pair<long, Tensor>> entries_;
};

struct DelayedLoss {
    Tensor loss;
    long source_step = 0;
};

/// Re-runs the prediction from the snapshot taken `horizon` steps ago and scores it
/// against `target` (normally the current states). Absent while the buffer is too young.
inline std::optional<DelayedLoss> tsm_delayed_loss(const TsmParams& p, const SnapshotBuffer& buffer,
                                                   const Tensor& target, long step, int horizon = kTsmHorizon) {
    const auto snapshot = buffer.at(step - horizon);
    if (!snapshot) return std::nullopt;
    return DelayedLoss{ad::mse(tsm_predict(p, *snapshot, horizon).prediction, target), step - horizon};
}

}  // namespace cortexlab::monitor

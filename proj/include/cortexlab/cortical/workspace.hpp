#pragma once

#include <array>
#include <cmath>
#include <deque>
#include <string>

#include "cortexlab/cortical/hierarchy.hpp"
#include "cortexlab/numeric/layers.hpp"

namespace cortexlab::cortical {

inline constexpr std::size_t kWorkspaceHistory = 5;
inline constexpr int kBroadcastPeriod = 10;
inline constexpr double kGateBiasInit = -2.0;
inline constexpr double kFiringTemperature = 0.1;
inline constexpr double kThresholdInit = -2.0;

/// Single post-norm transformer encoder layer over a token matrix {n, d}.
struct EncoderLayer {
    ad::Linear q, k, v, o;
    ad::Linear ff1, ff2;
    ad::LayerNorm norm1, norm2;
    std::size_t heads = 2;

    EncoderLayer() = default;
    EncoderLayer(std::size_t d, std::size_t n_heads, std::size_t ff_width, Rng& rng)
        : q(d, d, rng), k(d, d, rng), v(d, d, rng), o(d, d, rng),
          ff1(d, ff_width, rng), ff2(ff_width, d, rng), norm1(d), norm2(d), heads(n_heads) {
        if (d % n_heads != 0) throw ConfigError("encoder: model dim not divisible by head count");
    }

    Tensor operator()(const Tensor& x) const {
        using namespace ad;
        const std::size_t d = x.dim(1);
        const std::size_t dh = d / heads;
        const Tensor qx = q.rows(x), kx = k.rows(x), vx = v.rows(x);
        std::vector<Tensor> outs;
        for (std::size_t h = 0; h < heads; ++h) {
            const Tensor qh = slice_cols(qx, h * dh, dh);
            const Tensor kh = slice_cols(kx, h * dh, dh);
            const Tensor vh = slice_cols(vx, h * dh, dh);
            const Tensor scores = scale(matmul(qh, transpose(kh)), 1.0 / std::sqrt(static_cast<double>(dh)));
            outs.push_back(matmul(softmax(scores), vh));
        }
        const Tensor attended = o.rows(concat_cols(outs));
        const Tensor x1 = norm1(add(x, attended));
        const Tensor ff = ff2.rows(relu(ff1.rows(x1)));
        return norm2(add(x1, ff));
    }

    void collect(ad::ParameterList& out, const std::string& name) const {
        q.collect(out, name + ".q");
        k.collect(out, name + ".k");
        v.collect(out, name + ".v");
        o.collect(out, name + ".o");
        ff1.collect(out, name + ".ff1");
        ff2.collect(out, name + ".ff2");
        norm1.collect(out, name + ".norm1");
        norm2.collect(out, name + ".norm2");
    }
};

enum class FiringMode {
    Periodic,       // every kBroadcastPeriod steps
    SurpriseGated,  // soft weight sigmoid((surprise - sigmoid(theta)) / temperature), every step
};

struct WorkspaceParams {
    EncoderLayer encoder;
    std::array<ad::Linear, kLevels> gates;  // d_h -> 1, weight 0, bias -2
    Tensor threshold;                       // theta_s; only used when surprise-gated

    WorkspaceParams() = default;
    WorkspaceParams(std::size_t d_h, std::size_t ff_width, Rng& rng, bool with_threshold)
        : encoder(d_h, 2, ff_width, rng) {
        for (auto& g : gates) {
            g.weight = ad::init_constant({1, d_h}, 0.0);
            g.bias = ad::init_constant({1}, kGateBiasInit);
        }
        if (with_threshold) threshold = Tensor::scalar(kThresholdInit, true);
    }

    void collect(ad::ParameterList& out) const {
        encoder.collect(out, "workspace.encoder");
        for (std::size_t i = 0; i < kLevels; ++i) gates[i].collect(out, "workspace.gate" + std::to_string(i + 1));
        if (threshold.defined()) out.push_back({"workspace.threshold", threshold, true});
    }
};

/// Ring buffers of the last kWorkspaceHistory hidden states per level.
struct WorkspaceState {
    std::array<std::deque<Tensor>, kLevels> history;
    long step = 0;

    void push(const LevelHidden& hs) {
        for (std::size_t i = 0; i < kLevels; ++i) {
            history[i].push_back(hs[i]);
            while (history[i].size() > kWorkspaceHistory) history[i].pop_front();
        }
        ++step;
    }

    WorkspaceState detached() const {
        WorkspaceState w;
        w.step = step;
        for (std::size_t i = 0; i < kLevels; ++i)
            for (const auto& t : history[i]) w.history[i].push_back(t.detach());
        return w;
    }
};

struct Broadcast {
    LevelHidden hidden;
    bool fired = false;
    double weight = 0.0;  // soft firing weight (1 or 0 when periodic)
};

/// Token matrix {3*L, d}: per level, oldest to newest, zero-padded at the front.
inline Tensor workspace_tokens(const WorkspaceState& ws, std::size_t d_h) {
    std::vector<Tensor> rows;
    const Tensor zero = Tensor::zeros({d_h});
    for (std::size_t i = 0; i < kLevels; ++i) {
        for (std::size_t pad = ws.history[i].size(); pad < kWorkspaceHistory; ++pad) rows.push_back(zero);
        for (const auto& t : ws.history[i]) rows.push_back(t);
    }
    return ad::stack_rows(rows);
}

/// Attends over the buffered tokens and adds the gated per-level summary back:
/// h_i += gate_i(summary_i) * summary_i * (3 * attn_i) * w. The buffers must
/// already contain the current states.
inline Broadcast workspace_maybe_broadcast(const WorkspaceParams& p, const WorkspaceState& ws, const LevelHidden& hs,
                                           const Tensor& attn_alloc, const Tensor& surprise, FiringMode mode) {
    using namespace ad;
    Broadcast out;
    out.hidden = hs;
    Tensor weight;
    if (mode == FiringMode::Periodic) {
        if (ws.step % kBroadcastPeriod != 0) return out;
        out.fired = true;
        out.weight = 1.0;
    } else {
        if (!p.threshold.defined()) throw ConfigError("workspace: surprise gating needs a threshold parameter");
        const Tensor thr = sigmoid(p.threshold);
        weight = sigmoid(scale(sub(surprise, thr), 1.0 / kFiringTemperature));
        out.fired = surprise.item() > thr.item();
        out.weight = weight.item();
    }
    const std::size_t d = hs[0].numel();
    const Tensor encoded = p.encoder(workspace_tokens(ws, d));
    for (std::size_t i = 0; i < kLevels; ++i) {
        const Tensor summary = mean_rows(encoded, i * kWorkspaceHistory, kWorkspaceHistory);
        const Tensor gate = select(sigmoid(p.gates[i](summary)), 0);
        Tensor factor = mul(gate, scale(select(attn_alloc, i), 3.0));
        if (weight.defined()) factor = mul(factor, weight);
        out.hidden[i] = add(hs[i], mul_scalar(factor, summary));
    }
    return out;
}

inline Broadcast workspace_maybe_broadcast(const WorkspaceParams& p, const WorkspaceState& ws, const LevelHidden& hs,
                                           const Tensor& attn_alloc, double surprise, FiringMode mode) {
    return workspace_maybe_broadcast(p, ws, hs, attn_alloc, Tensor::scalar(surprise), mode);
}

}  // namespace cortexlab::cortical

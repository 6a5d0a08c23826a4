#pragma once

#include <cmath>
#include <string>

#include "cortexlab/numeric/layers.hpp"
#include "cortexlab/numeric/ops.hpp"

namespace cortexlab::cortical {

using ad::Tensor;

inline constexpr double kTraceDecay = 0.95;
inline constexpr double kTraceRate = 0.01;
inline constexpr double kMemoryDecay = 0.99;

/// Liquid cell weights. tau = exp(log_tau); a frozen log_tau is a constant
/// that never reaches the optimizer.
struct PlasticCellParams {
    Tensor w_in;   // {d_h, d_in}
    Tensor w_rec;  // {d_h, d_h}
    Tensor w_mem;  // {d_h, d_h}
    Tensor log_tau;
    bool tau_frozen = false;

    PlasticCellParams() = default;
    PlasticCellParams(std::size_t d_in, std::size_t d_h, double tau, Rng& rng, bool freeze_tau = false)
        : w_in(ad::init_uniform({d_h, d_in}, d_in, rng)),
          w_rec(ad::init_uniform({d_h, d_h}, d_h, rng)),
          w_mem(ad::init_uniform({d_h, d_h}, d_h, rng)),
          log_tau(Tensor::scalar(std::log(tau), !freeze_tau)),
          tau_frozen(freeze_tau) {}

    std::size_t hidden() const { return w_rec.dim(0); }
    double tau() const { return std::exp(log_tau.item()); }

    void collect(ad::ParameterList& out, const std::string& name) const {
        out.push_back({name + ".w_in", w_in, true});
        out.push_back({name + ".w_rec", w_rec, true});
        out.push_back({name + ".w_mem", w_mem, true});
        out.push_back({name + ".log_tau", log_tau, !tau_frozen});
    }
};

/// h carries the graph; the Hebbian trace and EMA memory are plain values.
struct PlasticCellState {
    Tensor h;
    Tensor trace;   // {d_h, d_h}
    Tensor memory;  // {d_h}

    static PlasticCellState zeros(std::size_t d_h) {
        return {Tensor::zeros({d_h}), Tensor::zeros({d_h, d_h}), Tensor::zeros({d_h})};
    }

    PlasticCellState detached() const { return {h.detach(), trace.detach(), memory.detach()}; }
};

struct CellStep {
    PlasticCellState next;
    Tensor x_new;
    Tensor alpha;
};

/// alpha = dt/(tau+dt); x_new = tanh(W_in u + W_rec h + T h + W_mem m);
/// h' = (1-alpha) h + alpha x_new; T' = 0.95 T + 0.01 x_new h^T; m' = 0.99 m + 0.01 h'.
inline CellStep cell_step(const PlasticCellParams& p, const PlasticCellState& s, const Tensor& input, double dt) {
    if (!(dt > 0.0)) throw UsageError("cell_step: dt must be positive");
    using namespace ad;
    const Tensor tau_plus_dt = add_scalar(exp(p.log_tau), dt);
    const Tensor alpha = scale(reciprocal(tau_plus_dt), dt);
    const Tensor pre = add_n({matmul(p.w_in, input), matmul(p.w_rec, s.h), matmul(s.trace, s.h),
                              matmul(p.w_mem, s.memory)});
    const Tensor x_new = tanh(pre);
    const Tensor h_next = add(s.h, mul_scalar(alpha, sub(x_new, s.h)));

    const std::size_t d = p.hidden();
    std::vector<double> trace(d * d);
    const auto tv = s.trace.values();
    const auto xv = x_new.values();
    const auto hv = s.h.values();
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j) trace[i * d + j] = kTraceDecay * tv[i * d + j] + kTraceRate * xv[i] * hv[j];
    std::vector<double> memory(d);
    const auto mv = s.memory.values();
    const auto hn = h_next.values();
    for (std::size_t i = 0; i < d; ++i) memory[i] = kMemoryDecay * mv[i] + (1.0 - kMemoryDecay) * hn[i];

    return {{h_next, Tensor::from({d, d}, std::move(trace)), Tensor::from({d}, std::move(memory))}, x_new, alpha};
}

}  // namespace cortexlab::cortical

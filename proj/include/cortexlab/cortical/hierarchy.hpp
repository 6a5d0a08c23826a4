#pragma once

#include <array>
#include <cmath>

#include "cortexlab/cortical/cell.hpp"

namespace cortexlab::cortical {

inline constexpr std::size_t kLevels = 3;
inline constexpr std::array<double, kLevels> kInitialTaus{5.0, 30.0, 100.0};
inline constexpr double kSingleTau = 30.0;

using LevelStates = std::array<PlasticCellState, kLevels>;
using LevelHidden = std::array<Tensor, kLevels>;

/// Three stacked cells; levels 2 and 3 read the layer-normalized output of the level below.
struct Hierarchy {
    std::array<PlasticCellParams, kLevels> cells;
    std::array<ad::LayerNorm, kLevels - 1> norms;

    Hierarchy() = default;
    Hierarchy(std::size_t d_h, Rng& rng, bool single_tau = false) {
        for (std::size_t i = 0; i < kLevels; ++i) {
            cells[i] = PlasticCellParams(d_h, d_h, single_tau ? kSingleTau : kInitialTaus[i], rng, single_tau);
        }
        for (auto& n : norms) n = ad::LayerNorm(d_h);
    }

    std::size_t hidden() const { return cells[0].hidden(); }

    void collect(ad::ParameterList& out) const {
        for (std::size_t i = 0; i < kLevels; ++i) cells[i].collect(out, "cortex.cell" + std::to_string(i + 1));
        for (std::size_t i = 0; i < norms.size(); ++i) norms[i].collect(out, "cortex.norm" + std::to_string(i + 2));
    }

    LevelStates initial_state() const {
        LevelStates s;
        for (auto& c : s) c = PlasticCellState::zeros(hidden());
        return s;
    }
};

struct HierarchyStep {
    LevelStates next;
    std::array<Tensor, kLevels> alphas;
};

inline HierarchyStep hierarchy_step(const Hierarchy& net, const LevelStates& states, const Tensor& projected,
                                    double dt) {
    HierarchyStep out;
    Tensor input = projected;
    for (std::size_t i = 0; i < kLevels; ++i) {
        auto step = cell_step(net.cells[i], states[i], input, dt);
        out.next[i] = step.next;
        out.alphas[i] = step.alpha;
        if (i + 1 < kLevels) input = net.norms[i](step.next.h);
    }
    return out;
}

}  // namespace cortexlab::cortical

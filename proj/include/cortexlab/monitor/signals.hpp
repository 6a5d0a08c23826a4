#pragma once

#include <array>
#include <cmath>
#include <string>
#include <vector>

namespace cortexlab::monitor {

/// Plain-value snapshot of one step's monitor outputs.
struct MonitorSignals {
    double confidence = 0.5;
    double uncertainty = 0.0;
    std::array<double, 3> attn_alloc{1.0 / 3, 1.0 / 3, 1.0 / 3};
    double surprise = 0.0;
    double felt_duration = 1.0;
    std::array<double, 3> predictability{0.5, 0.5, 0.5};
    std::vector<double> tsm_prediction;
    double gamma_eff = 0.99;

    /// Empty string when every range constraint holds, otherwise the first violation.
    std::string range_violation() const {
        auto bad = [](double v) { return !std::isfinite(v); };
        if (bad(confidence) || confidence <= 0.0 || confidence >= 1.0) return "confidence";
        if (bad(uncertainty) || uncertainty < 0.0) return "uncertainty";
        double s = 0.0;
        for (double a : attn_alloc) {
            if (bad(a) || a < 0.0) return "attn_alloc";
            s += a;
        }
        if (std::abs(s - 1.0) > 1e-6) return "attn_alloc sum";
        if (bad(surprise) || surprise < 0.0) return "surprise";
        if (bad(felt_duration) || felt_duration < 0.1) return "felt_duration";
        for (double p : predictability)
            if (bad(p) || p <= 0.0 || p >= 1.0) return "predictability";
        if (bad(gamma_eff) || gamma_eff < 0.9 || gamma_eff > 0.999) return "gamma_eff";
        return {};
    }
};

}  // namespace cortexlab::monitor

#pragma once

#include <algorithm>
#include <cmath>
#include <span>

#include "cortexlab/cortical/hierarchy.hpp"
#include "cortexlab/numeric/layers.hpp"

namespace cortexlab::monitor {

using ad::Tensor;

inline constexpr std::size_t kDurationFeatures = 8;
inline constexpr double kDurationFloor = 0.1;
inline constexpr double kBaseGamma = 0.99;
inline constexpr double kGammaSensitivity = 0.1;
inline constexpr double kGammaMin = 0.9;
inline constexpr double kGammaMax = 0.999;

struct DurationParams {
    ad::Linear context;  // 3 d_h -> 16
    ad::Linear feature;  // 8 -> 16
    ad::Linear hidden;   // 32 -> 16
    ad::Linear out;      // 16 -> 1

    DurationParams() = default;
    DurationParams(std::size_t d_h, Rng& rng)
        : context(cortical::kLevels * d_h, 16, rng),
          feature(kDurationFeatures, 16, rng),
          hidden(32, 16, rng),
          out(16, 1, rng) {}

    void collect(ad::ParameterList& ps) const {
        context.collect(ps, "duration.context");
        feature.collect(ps, "duration.feature");
        hidden.collect(ps, "duration.hidden");
        out.collect(ps, "duration.out");
    }
};

/// features = [dt, |dh1|, |dh2|, |dh3|, surprise, |r|, danger, confidence]; result >= 0.1.
inline Tensor felt_duration(const DurationParams& p, const Tensor& features, const Tensor& h_cat) {
    using namespace ad;
    if (features.rank() != 1 || features.numel() != kDurationFeatures)
        throw UsageError("felt_duration: expected 8 features");
    const Tensor joined = concat({p.context(h_cat), p.feature(features)});
    const Tensor raw = select(p.out(relu(p.hidden(joined))), 0);
    return add_scalar(softplus(raw), kDurationFloor);
}

inline Tensor felt_duration(const DurationParams& p, std::span<const double> features, const Tensor& h_cat) {
    if (features.size() != kDurationFeatures) throw UsageError("felt_duration: expected 8 features");
    return felt_duration(p, Tensor::vector({features.begin(), features.end()}), h_cat);
}

/// gamma_eff = clamp(0.99^(1 + 0.1 (d - 1)), 0.9, 0.999)
inline Tensor effective_gamma(const Tensor& d_felt) {
    using namespace ad;
    const Tensor exponent = add_scalar(scale(add_scalar(d_felt, -1.0), kGammaSensitivity), 1.0);
    return clamp(exp(scale(exponent, std::log(kBaseGamma))), kGammaMin, kGammaMax);
}

inline double effective_gamma(double d_felt) {
    return std::clamp(std::exp(((d_felt - 1.0) * kGammaSensitivity + 1.0) * std::log(kBaseGamma)), kGammaMin, kGammaMax);
}

}  // namespace cortexlab::monitor

#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "cortexlab/numeric/tensor.hpp"

namespace cortexlab::ad {

/// A named leaf. Frozen parameters stay in the model but are invisible to the optimizer.
struct Parameter {
    std::string name;
    Tensor tensor;
    bool trainable = true;
};

using ParameterList = std::vector<Parameter>;

inline void zero_grads(ParameterList& params) {
    for (auto& p : params) p.tensor.zero_grad();
}

inline double global_grad_norm(const ParameterList& params) {
    double s = 0.0;
    for (const auto& p : params) {
        if (!p.trainable || !p.tensor.has_grad()) continue;
        for (double g : p.tensor.grad()) s += g * g;
    }
    return std::sqrt(s);
}

/// Rescales all trainable gradients by max_norm/g when the global norm g exceeds
/// max_norm. Returns the norm measured before clipping.
inline double clip_global_norm(ParameterList& params, double max_norm = 1.0) {
    const double norm = global_grad_norm(params);
    if (norm > max_norm) {
        const double factor = max_norm / norm;
        for (auto& p : params) {
            if (!p.trainable || !p.tensor.has_grad()) continue;
            for (double& g : p.tensor.mutable_grad()) g *= factor;
        }
    }
    return norm;
}

struct AdamConfig {
    double lr = 3e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

/// Bias-corrected Adam over the trainable entries of a ParameterList.
class Adam {
public:
    explicit Adam(const ParameterList& params, AdamConfig config = {}) : config_(config) {
        for (const auto& p : params) {
            first_.emplace_back(p.tensor.numel(), 0.0);
            second_.emplace_back(p.tensor.numel(), 0.0);
        }
    }

    const AdamConfig& config() const { return config_; }
    long step_count() const { return step_; }
    const std::vector<std::vector<double>>& first_moments() const { return first_; }

    void step(ParameterList& params) {
        if (params.size() != first_.size()) throw ConfigError("adam: parameter list changed size");
        ++step_;
        const double bc1 = 1.0 - std::pow(config_.beta1, static_cast<double>(step_));
        const double bc2 = 1.0 - std::pow(config_.beta2, static_cast<double>(step_));
        for (std::size_t k = 0; k < params.size(); ++k) {
            auto& p = params[k];
            if (p.tensor.numel() != first_[k].size()) {
                throw ConfigError("adam: shape of '" + p.name + "' changed");
            }
            if (!p.trainable || !p.tensor.has_grad()) continue;
            auto values = p.tensor.mutable_values();
            const auto grad = p.tensor.grad();
            auto& m = first_[k];
            auto& v = second_[k];
            for (std::size_t i = 0; i < values.size(); ++i) {
                m[i] = config_.beta1 * m[i] + (1.0 - config_.beta1) * grad[i];
                v[i] = config_.beta2 * v[i] + (1.0 - config_.beta2) * grad[i] * grad[i];
                const double mhat = m[i] / bc1;
                const double vhat = v[i] / bc2;
                values[i] -= config_.lr * mhat / (std::sqrt(vhat) + config_.eps);
            }
        }
    }

private:
    AdamConfig config_;
    long step_ = 0;
    std::vector<std::vector<double>> first_;
    std::vector<std::vector<double>> second_;
};

}  // namespace cortexlab::ad

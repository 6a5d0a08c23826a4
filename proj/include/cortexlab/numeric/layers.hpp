#pragma once

#include <cmath>
#include <string>

#include "cortexlab/numeric/ops.hpp"
#include "cortexlab/numeric/optim.hpp"
#include "cortexlab/numeric/random.hpp"

namespace cortexlab::ad {

/// uniform(-1/sqrt(fan_in), +1/sqrt(fan_in)) leaf.
inline Tensor init_uniform(Shape shape, std::size_t fan_in, Rng& rng) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    std::vector<double> v(shape_numel(shape));
    for (auto& x : v) x = rng.uniform(-bound, bound);
    return Tensor::from(std::move(shape), std::move(v), true);
}

inline Tensor init_constant(Shape shape, double value) {
    std::vector<double> v(shape_numel(shape), value);
    return Tensor::from(std::move(shape), std::move(v), true);
}

/// y = W x (+ b), W stored {out, in}.
struct Linear {
    Tensor weight;
    Tensor bias;  // undefined when bias-free

    Linear() = default;
    Linear(std::size_t in, std::size_t out, Rng& rng, bool with_bias = true)
        : weight(init_uniform({out, in}, in, rng)) {
        if (with_bias) bias = init_uniform({out}, in, rng);
    }

    std::size_t in_features() const { return weight.dim(1); }
    std::size_t out_features() const { return weight.dim(0); }

    Tensor operator()(const Tensor& x) const {
        Tensor y = matmul(weight, x);
        return bias.defined() ? add(y, bias) : y;
    }

    /// Applies the map to every row of X{m, in}.
    Tensor rows(const Tensor& x) const {
        Tensor y = matmul(x, transpose(weight));
        return bias.defined() ? add_row(y, bias) : y;
    }

    void collect(ParameterList& out, const std::string& name) const {
        out.push_back({name + ".weight", weight, true});
        if (bias.defined()) out.push_back({name + ".bias", bias, true});
    }
};

/// Layer normalization with learnable gain (init 1) and bias (init 0).
struct LayerNorm {
    Tensor gain;
    Tensor bias;

    LayerNorm() = default;
    explicit LayerNorm(std::size_t dim) : gain(init_constant({dim}, 1.0)), bias(init_constant({dim}, 0.0)) {}

    Tensor operator()(const Tensor& x) const {
        Tensor y = layer_norm(x);
        if (x.rank() == 2) return add_row(mul_row(y, gain), bias);
        return add(mul(y, gain), bias);
    }

    void collect(ParameterList& out, const std::string& name) const {
        out.push_back({name + ".gain", gain, true});
        out.push_back({name + ".bias", bias, true});
    }
};

}  // namespace cortexlab::ad

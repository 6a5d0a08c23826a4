#pragma once

// Differentiable operations over ad::Tensor. No implicit broadcasting: operands
// must match exactly, apart from the explicit scalar and row-wise variants.

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "cortexlab/numeric/tensor.hpp"

namespace cortexlab::ad {

namespace detail {

inline void require_same_shape(const char* op, const Tensor& a, const Tensor& b) {
    if (a.shape() != b.shape()) {
        throw ConfigError(std::string(op) + ": shape mismatch " + shape_str(a.shape()) + " vs " +
                          shape_str(b.shape()));
    }
}

inline void require_rank(const char* op, const Tensor& a, std::size_t rank) {
    if (a.rank() != rank) {
        throw ConfigError(std::string(op) + ": expected rank " + std::to_string(rank) + ", got " +
                          shape_str(a.shape()));
    }
}

inline Node& parent(Node& n, std::size_t i) { return *n.parents[i]; }

// Elementwise unary op with derivative expressed through input x and output y.
template <typename Fwd, typename Deriv>
Tensor unary(const char* op, const Tensor& a, Fwd fwd, Deriv deriv) {
    std::vector<double> out(a.numel());
    const auto x = a.values();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = fwd(x[i]);
    return make_result(op, a.shape(), std::move(out), {a}, [deriv](Node& n) {
        Node& p = parent(n, 0);
        auto& g = p.grad_buffer();
        for (std::size_t i = 0; i < g.size(); ++i) g[i] += n.grad[i] * deriv(p.value[i], n.value[i]);
    });
}

// Applies `fn(row_in, row_out, cols)` to every trailing-dimension row.
inline std::size_t last_dim(const Tensor& a) { return a.rank() == 0 ? 1 : a.shape().back(); }

}  // namespace detail

// ---------------------------------------------------------------------------
// Elementwise binary

inline Tensor add(const Tensor& a, const Tensor& b) {
    detail::require_same_shape("add", a, b);
    std::vector<double> out(a.numel());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = a[i] + b[i];
    return detail::make_result("add", a.shape(), std::move(out), {a, b}, [](Node& n) {
        for (std::size_t k = 0; k < 2; ++k) {
            Node& p = detail::parent(n, k);
            if (!p.requires_grad) continue;
            auto& g = p.grad_buffer();
            for (std::size_t i = 0; i < g.size(); ++i) g[i] += n.grad[i];
        }
    });
}

inline Tensor sub(const Tensor& a, const Tensor& b) {
    detail::require_same_shape("sub", a, b);
    std::vector<double> out(a.numel());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = a[i] - b[i];
    return detail::make_result("sub", a.shape(), std::move(out), {a, b}, [](Node& n) {
        for (std::size_t k = 0; k < 2; ++k) {
            Node& p = detail::parent(n, k);
            if (!p.requires_grad) continue;
            const double sign = k == 0 ? 1.0 : -1.0;
            auto& g = p.grad_buffer();
            for (std::size_t i = 0; i < g.size(); ++i) g[i] += sign * n.grad[i];
        }
    });
}

inline Tensor mul(const Tensor& a, const Tensor& b) {
    detail::require_same_shape("mul", a, b);
    std::vector<double> out(a.numel());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = a[i] * b[i];
    return detail::make_result("mul", a.shape(), std::move(out), {a, b}, [](Node& n) {
        Node& pa = detail::parent(n, 0);
        Node& pb = detail::parent(n, 1);
        if (pa.requires_grad) {
            auto& g = pa.grad_buffer();
            for (std::size_t i = 0; i < g.size(); ++i) g[i] += n.grad[i] * pb.value[i];
        }
        if (pb.requires_grad) {
            auto& g = pb.grad_buffer();
            for (std::size_t i = 0; i < g.size(); ++i) g[i] += n.grad[i] * pa.value[i];
        }
    });
}

/// Sum of any number of same-shape tensors as one node.
inline Tensor add_n(const std::vector<Tensor>& terms) {
    if (terms.empty()) throw UsageError("add_n: no terms");
    for (const auto& t : terms) detail::require_same_shape("add_n", terms.front(), t);
    std::vector<double> out(terms.front().numel(), 0.0);
    for (const auto& t : terms) {
        for (std::size_t i = 0; i < out.size(); ++i) out[i] += t[i];
    }
    return detail::make_result("add_n", terms.front().shape(), std::move(out), terms, [](Node& n) {
        for (auto& pp : n.parents) {
            if (!pp->requires_grad) continue;
            auto& g = pp->grad_buffer();
            for (std::size_t i = 0; i < g.size(); ++i) g[i] += n.grad[i];
        }
    });
}

// ---------------------------------------------------------------------------
// Scalar forms

inline Tensor scale(const Tensor& a, double c) {
    return detail::unary("scale", a, [c](double x) { return c * x; }, [c](double, double) { return c; });
}

inline Tensor add_scalar(const Tensor& a, double c) {
    return detail::unary("add_scalar", a, [c](double x) { return x + c; }, [](double, double) { return 1.0; });
}

inline Tensor neg(const Tensor& a) { return scale(a, -1.0); }

/// s * x where s holds exactly one value; the only broadcast the suite allows.
inline Tensor mul_scalar(const Tensor& s, const Tensor& x) {
    if (s.numel() != 1) throw ConfigError("mul_scalar: scalar operand has shape " + shape_str(s.shape()));
    const double sv = s[0];
    std::vector<double> out(x.numel());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = sv * x[i];
    return detail::make_result("mul_scalar", x.shape(), std::move(out), {s, x}, [](Node& n) {
        Node& ps = detail::parent(n, 0);
        Node& px = detail::parent(n, 1);
        if (ps.requires_grad) {
            double acc = 0.0;
            for (std::size_t i = 0; i < n.grad.size(); ++i) acc += n.grad[i] * px.value[i];
            ps.grad_buffer()[0] += acc;
        }
        if (px.requires_grad) {
            auto& g = px.grad_buffer();
            const double sv = ps.value[0];
            for (std::size_t i = 0; i < g.size(); ++i) g[i] += sv * n.grad[i];
        }
    });
}

// ---------------------------------------------------------------------------
// Unary nonlinearities

inline Tensor tanh(const Tensor& a) {
    return detail::unary("tanh", a, [](double x) { return std::tanh(x); },
                         [](double, double y) { return 1.0 - y * y; });
}

inline double sigmoid_value(double x) {
    if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

inline double softplus_value(double x) { return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x))); }

inline Tensor sigmoid(const Tensor& a) {
    return detail::unary("sigmoid", a, sigmoid_value, [](double, double y) { return y * (1.0 - y); });
}

inline Tensor softplus(const Tensor& a) {
    return detail::unary("softplus", a, softplus_value, [](double x, double) { return sigmoid_value(x); });
}

inline Tensor relu(const Tensor& a) {
    return detail::unary("relu", a, [](double x) { return x > 0 ? x : 0.0; },
                         [](double x, double) { return x > 0 ? 1.0 : 0.0; });
}

inline Tensor exp(const Tensor& a) {
    return detail::unary("exp", a, [](double x) { return std::exp(x); }, [](double, double y) { return y; });
}

inline Tensor log(const Tensor& a) {
    return detail::unary("log", a, [](double x) { return std::log(x); }, [](double x, double) { return 1.0 / x; });
}

inline Tensor abs(const Tensor& a) {
    return detail::unary("abs", a, [](double x) { return std::abs(x); },
                         [](double x, double) { return x > 0 ? 1.0 : (x < 0 ? -1.0 : 0.0); });
}

inline Tensor reciprocal(const Tensor& a) {
    return detail::unary("reciprocal", a, [](double x) { return 1.0 / x; },
                         [](double, double y) { return -y * y; });
}

inline Tensor pow(const Tensor& a, double p) {
    return detail::unary("pow", a, [p](double x) { return std::pow(x, p); },
                         [p](double x, double) { return p * std::pow(x, p - 1.0); });
}

/// Gradient passes only strictly inside (lo, hi).
inline Tensor clamp(const Tensor& a, double lo, double hi) {
    return detail::unary("clamp", a, [lo, hi](double x) { return std::clamp(x, lo, hi); },
                         [lo, hi](double x, double) { return (x > lo && x < hi) ? 1.0 : 0.0; });
}

inline Tensor detach(const Tensor& a) { return a.detach(); }

// ---------------------------------------------------------------------------
// Reductions

inline Tensor sum(const Tensor& a) {
    double s = 0.0;
    for (double v : a.values()) s += v;
    return detail::make_result("sum", {}, {s}, {a}, [](Node& n) {
        auto& g = detail::parent(n, 0).grad_buffer();
        for (auto& gi : g) gi += n.grad[0];
    });
}

inline Tensor mean(const Tensor& a) {
    return scale(sum(a), 1.0 / static_cast<double>(a.numel()));
}

/// mean((a - b)^2) as a single node.
inline Tensor mse(const Tensor& a, const Tensor& b) {
    detail::require_same_shape("mse", a, b);
    const double inv_n = 1.0 / static_cast<double>(a.numel());
    double s = 0.0;
    for (std::size_t i = 0; i < a.numel(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return detail::make_result("mse", {}, {s * inv_n}, {a, b}, [inv_n](Node& n) {
        Node& pa = detail::parent(n, 0);
        Node& pb = detail::parent(n, 1);
        const double g0 = n.grad[0] * 2.0 * inv_n;
        for (std::size_t i = 0; i < pa.value.size(); ++i) {
            const double d = g0 * (pa.value[i] - pb.value[i]);
            if (pa.requires_grad) pa.grad_buffer()[i] += d;
            if (pb.requires_grad) pb.grad_buffer()[i] -= d;
        }
    });
}

/// Euclidean norm; the gradient at the origin is taken as zero.
inline Tensor l2norm(const Tensor& a) {
    double s = 0.0;
    for (double v : a.values()) s += v * v;
    const double norm = std::sqrt(s);
    return detail::make_result("l2norm", {}, {norm}, {a}, [](Node& n) {
        Node& p = detail::parent(n, 0);
        const double norm = n.value[0];
        if (norm == 0.0) return;
        auto& g = p.grad_buffer();
        for (std::size_t i = 0; i < g.size(); ++i) g[i] += n.grad[0] * p.value[i] / norm;
    });
}

// ---------------------------------------------------------------------------
// Linear algebra

/// {m,k}x{k,n} -> {m,n} and {m,k}x{k} -> {m}.
inline Tensor matmul(const Tensor& a, const Tensor& b) {
    detail::require_rank("matmul", a, 2);
    const std::size_t m = a.dim(0), k = a.dim(1);
    if (b.rank() == 1) {
        if (b.dim(0) != k) {
            throw ConfigError("matmul: " + shape_str(a.shape()) + " x " + shape_str(b.shape()));
        }
        std::vector<double> out(m, 0.0);
        const auto av = a.values();
        const auto bv = b.values();
        for (std::size_t i = 0; i < m; ++i) {
            double acc = 0.0;
            const double* row = av.data() + i * k;
            for (std::size_t j = 0; j < k; ++j) acc += row[j] * bv[j];
            out[i] = acc;
        }
        return detail::make_result("matvec", {m}, std::move(out), {a, b}, [m, k](Node& n) {
            Node& pa = detail::parent(n, 0);
            Node& pb = detail::parent(n, 1);
            if (pa.requires_grad) {
                auto& g = pa.grad_buffer();
                for (std::size_t i = 0; i < m; ++i) {
                    const double gi = n.grad[i];
                    if (gi == 0.0) continue;
                    double* row = g.data() + i * k;
                    for (std::size_t j = 0; j < k; ++j) row[j] += gi * pb.value[j];
                }
            }
            if (pb.requires_grad) {
                auto& g = pb.grad_buffer();
                for (std::size_t i = 0; i < m; ++i) {
                    const double gi = n.grad[i];
                    if (gi == 0.0) continue;
                    const double* row = pa.value.data() + i * k;
                    for (std::size_t j = 0; j < k; ++j) g[j] += gi * row[j];
                }
            }
        });
    }
    detail::require_rank("matmul", b, 2);
    if (b.dim(0) != k) throw ConfigError("matmul: " + shape_str(a.shape()) + " x " + shape_str(b.shape()));
    const std::size_t ncols = b.dim(1);
    std::vector<double> out(m * ncols, 0.0);
    const auto av = a.values();
    const auto bv = b.values();
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t l = 0; l < k; ++l) {
            const double ail = av[i * k + l];
            if (ail == 0.0) continue;
            const double* brow = bv.data() + l * ncols;
            double* orow = out.data() + i * ncols;
            for (std::size_t j = 0; j < ncols; ++j) orow[j] += ail * brow[j];
        }
    }
    return detail::make_result("matmul", {m, ncols}, std::move(out), {a, b}, [m, k, ncols](Node& n) {
        Node& pa = detail::parent(n, 0);
        Node& pb = detail::parent(n, 1);
        if (pa.requires_grad) {
            // dA = G B^T
            auto& g = pa.grad_buffer();
            for (std::size_t i = 0; i < m; ++i) {
                const double* grow = n.grad.data() + i * ncols;
                for (std::size_t l = 0; l < k; ++l) {
                    const double* brow = pb.value.data() + l * ncols;
                    double acc = 0.0;
                    for (std::size_t j = 0; j < ncols; ++j) acc += grow[j] * brow[j];
                    g[i * k + l] += acc;
                }
            }
        }
        if (pb.requires_grad) {
            // dB = A^T G
            auto& g = pb.grad_buffer();
            for (std::size_t i = 0; i < m; ++i) {
                const double* grow = n.grad.data() + i * ncols;
                for (std::size_t l = 0; l < k; ++l) {
                    const double ail = pa.value[i * k + l];
                    if (ail == 0.0) continue;
                    double* gb = g.data() + l * ncols;
                    for (std::size_t j = 0; j < ncols; ++j) gb[j] += ail * grow[j];
                }
            }
        }
    });
}

inline Tensor transpose(const Tensor& a) {
    detail::require_rank("transpose", a, 2);
    const std::size_t r = a.dim(0), c = a.dim(1);
    std::vector<double> out(r * c);
    for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < c; ++j) out[j * r + i] = a[i * c + j];
    return detail::make_result("transpose", {c, r}, std::move(out), {a}, [r, c](Node& n) {
        auto& g = detail::parent(n, 0).grad_buffer();
        for (std::size_t i = 0; i < r; ++i)
            for (std::size_t j = 0; j < c; ++j) g[i * c + j] += n.grad[j * r + i];
    });
}

/// X{m,n} + b{n} applied to every row.
inline Tensor add_row(const Tensor& x, const Tensor& b) {
    detail::require_rank("add_row", x, 2);
    detail::require_rank("add_row", b, 1);
    const std::size_t m = x.dim(0), c = x.dim(1);
    if (b.dim(0) != c) throw ConfigError("add_row: " + shape_str(x.shape()) + " + " + shape_str(b.shape()));
    std::vector<double> out(m * c);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < c; ++j) out[i * c + j] = x[i * c + j] + b[j];
    return detail::make_result("add_row", x.shape(), std::move(out), {x, b}, [m, c](Node& n) {
        Node& px = detail::parent(n, 0);
        Node& pb = detail::parent(n, 1);
        if (px.requires_grad) {
            auto& g = px.grad_buffer();
            for (std::size_t i = 0; i < g.size(); ++i) g[i] += n.grad[i];
        }
        if (pb.requires_grad) {
            auto& g = pb.grad_buffer();
            for (std::size_t i = 0; i < m; ++i)
                for (std::size_t j = 0; j < c; ++j) g[j] += n.grad[i * c + j];
        }
    });
}

/// X{m,n} * s{n} applied to every row.
inline Tensor mul_row(const Tensor& x, const Tensor& s) {
    detail::require_rank("mul_row", x, 2);
    detail::require_rank("mul_row", s, 1);
    const std::size_t m = x.dim(0), c = x.dim(1);
    if (s.dim(0) != c) throw ConfigError("mul_row: " + shape_str(x.shape()) + " * " + shape_str(s.shape()));
    std::vector<double> out(m * c);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < c; ++j) out[i * c + j] = x[i * c + j] * s[j];
    return detail::make_result("mul_row", x.shape(), std::move(out), {x, s}, [m, c](Node& n) {
        Node& px = detail::parent(n, 0);
        Node& ps = detail::parent(n, 1);
        if (px.requires_grad) {
            auto& g = px.grad_buffer();
            for (std::size_t i = 0; i < m; ++i)
                for (std::size_t j = 0; j < c; ++j) g[i * c + j] += n.grad[i * c + j] * ps.value[j];
        }
        if (ps.requires_grad) {
            auto& g = ps.grad_buffer();
            for (std::size_t i = 0; i < m; ++i)
                for (std::size_t j = 0; j < c; ++j) g[j] += n.grad[i * c + j] * px.value[i * c + j];
        }
    });
}

// ---------------------------------------------------------------------------
// Row-wise normalizers over the last dimension

inline Tensor softmax(const Tensor& a) {
    const std::size_t c = detail::last_dim(a);
    const std::size_t rows = a.numel() / c;
    std::vector<double> out(a.numel());
    for (std::size_t r = 0; r < rows; ++r) {
        const double* x = a.values().data() + r * c;
        double* y = out.data() + r * c;
        const double mx = *std::max_element(x, x + c);
        double z = 0.0;
        for (std::size_t j = 0; j < c; ++j) z += (y[j] = std::exp(x[j] - mx));
        for (std::size_t j = 0; j < c; ++j) y[j] /= z;
    }
    return detail::make_result("softmax", a.shape(), std::move(out), {a}, [rows, c](Node& n) {
        auto& g = detail::parent(n, 0).grad_buffer();
        for (std::size_t r = 0; r < rows; ++r) {
            const double* y = n.value.data() + r * c;
            const double* gy = n.grad.data() + r * c;
            double dot = 0.0;
            for (std::size_t j = 0; j < c; ++j) dot += gy[j] * y[j];
            for (std::size_t j = 0; j < c; ++j) g[r * c + j] += y[j] * (gy[j] - dot);
        }
    });
}

inline Tensor log_softmax(const Tensor& a) {
    const std::size_t c = detail::last_dim(a);
    const std::size_t rows = a.numel() / c;
    std::vector<double> out(a.numel());
    for (std::size_t r = 0; r < rows; ++r) {
        const double* x = a.values().data() + r * c;
        double* y = out.data() + r * c;
        const double mx = *std::max_element(x, x + c);
        double z = 0.0;
        for (std::size_t j = 0; j < c; ++j) z += std::exp(x[j] - mx);
        const double lz = mx + std::log(z);
        for (std::size_t j = 0; j < c; ++j) y[j] = x[j] - lz;
    }
    return detail::make_result("log_softmax", a.shape(), std::move(out), {a}, [rows, c](Node& n) {
        auto& g = detail::parent(n, 0).grad_buffer();
        for (std::size_t r = 0; r < rows; ++r) {
            const double* y = n.value.data() + r * c;
            const double* gy = n.grad.data() + r * c;
            double gs = 0.0;
            for (std::size_t j = 0; j < c; ++j) gs += gy[j];
            for (std::size_t j = 0; j < c; ++j) g[r * c + j] += gy[j] - std::exp(y[j]) * gs;
        }
    });
}

inline constexpr double kLayerNormEps = 1e-5;

/// Normalizes each last-dimension row to zero mean and unit variance (no affine).
inline Tensor layer_norm(const Tensor& a, double eps = kLayerNormEps) {
    const std::size_t c = detail::last_dim(a);
    const std::size_t rows = a.numel() / c;
    std::vector<double> out(a.numel());
    std::vector<double> inv_std(rows);
    for (std::size_t r = 0; r < rows; ++r) {
        const double* x = a.values().data() + r * c;
        double mu = 0.0;
        for (std::size_t j = 0; j < c; ++j) mu += x[j];
        mu /= static_cast<double>(c);
        double var = 0.0;
        for (std::size_t j = 0; j < c; ++j) var += (x[j] - mu) * (x[j] - mu);
        var /= static_cast<double>(c);
        inv_std[r] = 1.0 / std::sqrt(var + eps);
        for (std::size_t j = 0; j < c; ++j) out[r * c + j] = (x[j] - mu) * inv_std[r];
    }
    return detail::make_result("layer_norm", a.shape(), std::move(out), {a},
                               [rows, c, inv_std = std::move(inv_std)](Node& n) {
        auto& g = detail::parent(n, 0).grad_buffer();
        const double inv_c = 1.0 / static_cast<double>(c);
        for (std::size_t r = 0; r < rows; ++r) {
            const double* y = n.value.data() + r * c;
            const double* gy = n.grad.data() + r * c;
            double mg = 0.0, mgy = 0.0;
            for (std::size_t j = 0; j < c; ++j) {
                mg += gy[j];
                mgy += gy[j] * y[j];
            }
            mg *= inv_c;
            mgy *= inv_c;
            for (std::size_t j = 0; j < c; ++j) g[r * c + j] += inv_std[r] * (gy[j] - mg - y[j] * mgy);
        }
    });
}

// ---------------------------------------------------------------------------
// Structural ops

inline Tensor reshape(const Tensor& a, Shape shape) {
    if (shape_numel(shape) != a.numel()) {
        throw ConfigError("reshape: " + shape_str(a.shape()) + " -> " + shape_str(shape));
    }
    std::vector<double> out(a.values().begin(), a.values().end());
    return detail::make_result("reshape", std::move(shape), std::move(out), {a}, [](Node& n) {
        auto& g = detail::parent(n, 0).grad_buffer();
        for (std::size_t i = 0; i < g.size(); ++i) g[i] += n.grad[i];
    });
}

/// Joins rank-1 (or scalar) tensors end to end.
inline Tensor concat(const std::vector<Tensor>& parts) {
    std::vector<double> out;
    for (const auto& p : parts) {
        if (p.rank() > 1) throw ConfigError("concat: expected vectors, got " + shape_str(p.shape()));
        out.insert(out.end(), p.values().begin(), p.values().end());
    }
    const std::size_t n_out = out.size();
    return detail::make_result("concat", {n_out}, std::move(out), parts, [](Node& n) {
        std::size_t off = 0;
        for (auto& pp : n.parents) {
            const std::size_t len = pp->value.size();
            if (pp->requires_grad) {
                auto& g = pp->grad_buffer();
                for (std::size_t i = 0; i < len; ++i) g[i] += n.grad[off + i];
            }
            off += len;
        }
    });
}

inline Tensor slice(const Tensor& a, std::size_t begin, std::size_t len) {
    detail::require_rank("slice", a, 1);
    if (begin + len > a.numel()) {
        throw ConfigError("slice: [" + std::to_string(begin) + ", +" + std::to_string(len) + ") out of " +
                          shape_str(a.shape()));
    }
    std::vector<double> out(a.values().begin() + begin, a.values().begin() + begin + len);
    return detail::make_result("slice", {len}, std::move(out), {a}, [begin, len](Node& n) {
        auto& g = detail::parent(n, 0).grad_buffer();
        for (std::size_t i = 0; i < len; ++i) g[begin + i] += n.grad[i];
    });
}

/// One element as a scalar.
inline Tensor select(const Tensor& a, std::size_t index) {
    if (index >= a.numel()) throw ConfigError("select: index out of range");
    return detail::make_result("select", {}, {a[index]}, {a}, [index](Node& n) {
        detail::parent(n, 0).grad_buffer()[index] += n.grad[0];
    });
}

/// Stacks equal-length vectors as the rows of a matrix.
inline Tensor stack_rows(const std::vector<Tensor>& rows) {
    if (rows.empty()) throw UsageError("stack_rows: no rows");
    const std::size_t c = rows.front().numel();
    std::vector<double> out;
    out.reserve(rows.size() * c);
    for (const auto& r : rows) {
        if (r.rank() != 1 || r.numel() != c) throw ConfigError("stack_rows: ragged rows");
        out.insert(out.end(), r.values().begin(), r.values().end());
    }
    return detail::make_result("stack_rows", {rows.size(), c}, std::move(out), rows, [c](Node& n) {
        for (std::size_t r = 0; r < n.parents.size(); ++r) {
            Node& p = *n.parents[r];
            if (!p.requires_grad) continue;
            auto& g = p.grad_buffer();
            for (std::size_t j = 0; j < c; ++j) g[j] += n.grad[r * c + j];
        }
    });
}

/// Column block [begin, begin+count) of a matrix.
inline Tensor slice_cols(const Tensor& a, std::size_t begin, std::size_t count) {
    detail::require_rank("slice_cols", a, 2);
    const std::size_t m = a.dim(0), c = a.dim(1);
    if (begin + count > c) throw ConfigError("slice_cols: out of range");
    std::vector<double> out(m * count);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < count; ++j) out[i * count + j] = a[i * c + begin + j];
    return detail::make_result("slice_cols", {m, count}, std::move(out), {a}, [m, c, begin, count](Node& n) {
        auto& g = detail::parent(n, 0).grad_buffer();
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = 0; j < count; ++j) g[i * c + begin + j] += n.grad[i * count + j];
    });
}

/// Joins matrices with equal row counts side by side.
inline Tensor concat_cols(const std::vector<Tensor>& parts) {
    if (parts.empty()) throw UsageError("concat_cols: no parts");
    const std::size_t m = parts.front().dim(0);
    std::size_t total = 0;
    for (const auto& p : parts) {
        detail::require_rank("concat_cols", p, 2);
        if (p.dim(0) != m) throw ConfigError("concat_cols: row count mismatch");
        total += p.dim(1);
    }
    std::vector<double> out(m * total);
    std::size_t off = 0;
    for (const auto& p : parts) {
        const std::size_t c = p.dim(1);
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = 0; j < c; ++j) out[i * total + off + j] = p[i * c + j];
        off += c;
    }
    return detail::make_result("concat_cols", {m, total}, std::move(out), parts, [m, total](Node& n) {
        std::size_t off = 0;
        for (auto& pp : n.parents) {
            const std::size_t c = pp->shape[1];
            if (pp->requires_grad) {
                auto& g = pp->grad_buffer();
                for (std::size_t i = 0; i < m; ++i)
                    for (std::size_t j = 0; j < c; ++j) g[i * c + j] += n.grad[i * total + off + j];
            }
            off += c;
        }
    });
}

/// Mean over rows [begin, begin+count) of a matrix, giving a vector.
inline Tensor mean_rows(const Tensor& a, std::size_t begin, std::size_t count) {
    detail::require_rank("mean_rows", a, 2);
    const std::size_t c = a.dim(1);
    if (count == 0 || begin + count > a.dim(0)) throw ConfigError("mean_rows: out of range");
    const double inv = 1.0 / static_cast<double>(count);
    std::vector<double> out(c, 0.0);
    for (std::size_t i = begin; i < begin + count; ++i)
        for (std::size_t j = 0; j < c; ++j) out[j] += a[i * c + j] * inv;
    return detail::make_result("mean_rows", {c}, std::move(out), {a}, [begin, count, c, inv](Node& n) {
        auto& g = detail::parent(n, 0).grad_buffer();
        for (std::size_t i = begin; i < begin + count; ++i)
            for (std::size_t j = 0; j < c; ++j) g[i * c + j] += n.grad[j] * inv;
    });
}

}  // namespace cortexlab::ad

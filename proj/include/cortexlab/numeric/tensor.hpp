#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <numeric>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "cortexlab/numeric/errors.hpp"

namespace cortexlab::ad {

using Shape = std::vector<std::size_t>;

inline std::size_t shape_numel(const Shape& shape) {
    return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

inline std::string shape_str(const Shape& shape) {
    std::ostringstream os;
    os << '[';
    for (std::size_t i = 0; i < shape.size(); ++i) os << (i ? "," : "") << shape[i];
    os << ']';
    return os.str();
}

struct Node;
using NodePtr = std::shared_ptr<Node>;

// Propagates node.grad into node.parents[*].grad.
using BackwardFn = std::function<void(Node&)>;

struct Node {
    Shape shape;
    std::vector<double> value;
    std::vector<double> grad;  // empty until touched by backward
    bool requires_grad = false;
    const char* op = "leaf";
    std::vector<NodePtr> parents;
    BackwardFn backward;
    std::uint64_t visit_mark = 0;

    bool is_leaf() const { return parents.empty(); }

    std::vector<double>& grad_buffer() {
        if (grad.size() != value.size()) grad.assign(value.size(), 0.0);
        return grad;
    }
};

/// Handle to a node in a dynamic reverse-mode graph. Copies share the node.
class Tensor {
public:
    Tensor() = default;
    explicit Tensor(NodePtr node) : node_(std::move(node)) {}

    static Tensor from(Shape shape, std::vector<double> values, bool requires_grad = false) {
        if (shape_numel(shape) != values.size()) {
            throw ConfigError("tensor: shape " + shape_str(shape) + " holds " +
                              std::to_string(shape_numel(shape)) + " values, got " +
                              std::to_string(values.size()));
        }
        auto n = std::make_shared<Node>();
        n->shape = std::move(shape);
        n->value = std::move(values);
        n->requires_grad = requires_grad;
        return Tensor(std::move(n));
    }

    static Tensor zeros(Shape shape, bool requires_grad = false) {
        const auto n = shape_numel(shape);
        return from(std::move(shape), std::vector<double>(n, 0.0), requires_grad);
    }

    static Tensor scalar(double v, bool requires_grad = false) {
        return from({}, {v}, requires_grad);
    }

    static Tensor vector(std::vector<double> values, bool requires_grad = false) {
        const auto n = values.size();
        return from({n}, std::move(values), requires_grad);
    }

    bool defined() const { return static_cast<bool>(node_); }
    const Shape& shape() const { return node_->shape; }
    std::size_t dim(std::size_t i) const { return node_->shape.at(i); }
    std::size_t rank() const { return node_->shape.size(); }
    std::size_t numel() const { return node_->value.size(); }
    bool requires_grad() const { return node_->requires_grad; }
    const char* op() const { return node_->op; }

    std::span<const double> values() const { return node_->value; }
    double operator[](std::size_t i) const { return node_->value[i]; }

    /// In-place access for optimizers and tests; never use on a node inside a live graph.
    std::span<double> mutable_values() { return node_->value; }

    double item() const {
        if (numel() != 1) throw UsageError("item() on tensor of shape " + shape_str(shape()));
        return node_->value[0];
    }

    bool has_grad() const { return !node_->grad.empty(); }
    std::span<const double> grad() const { return node_->grad; }
    std::span<double> mutable_grad() { return node_->grad_buffer(); }
    void zero_grad() { node_->grad.assign(node_->value.size(), 0.0); }

    /// Same values, cut from the graph.
    Tensor detach() const {
        return from(node_->shape, node_->value, false);
    }

    Node& node() const { return *node_; }
    const NodePtr& ptr() const { return node_; }

    /// Checks the finiteness invariant; throws NumericError naming `where`.
    void validate(const std::string& where = "tensor") const {
        for (double v : node_->value) {
            if (!std::isfinite(v)) throw NumericError(where + ": non-finite value in " + node_->op);
        }
    }

private:
    NodePtr node_;
};

namespace detail {

inline std::uint64_t next_visit_epoch() {
    static thread_local std::uint64_t epoch = 0;
    return ++epoch;
}

/// Builds a result node. Parents and the backward rule are kept only when some
/// input needs a gradient.
inline Tensor make_result(const char* op, Shape shape, std::vector<double> value,
                          std::vector<Tensor> inputs, BackwardFn backward) {
    for (double v : value) {
        if (!std::isfinite(v)) throw NumericError(std::string("op '") + op + "' produced a non-finite value");
    }
    auto n = std::make_shared<Node>();
    n->shape = std::move(shape);
    n->value = std::move(value);
    n->op = op;
    bool needs = false;
    for (const auto& t : inputs) needs = needs || t.requires_grad();
    if (needs) {
        n->requires_grad = true;
        n->parents.reserve(inputs.size());
        for (auto& t : inputs) n->parents.push_back(t.ptr());
        n->backward = std::move(backward);
    }
    return Tensor(std::move(n));
}

}  // namespace detail

/// Reverse sweep from a scalar loss. Leaf gradients accumulate; interior
/// gradients are reset so the same graph can be swept more than once.
inline void backward(const Tensor& loss) {
    if (loss.numel() != 1) throw UsageError("backward: loss must be scalar, got shape " + shape_str(loss.shape()));
    if (!loss.requires_grad()) return;

    const auto epoch = detail::next_visit_epoch();
    std::vector<Node*> order;
    std::vector<std::pair<Node*, std::size_t>> stack;
    stack.emplace_back(&loss.node(), 0);
    loss.node().visit_mark = epoch;
    while (!stack.empty()) {
        auto& [node, next] = stack.back();
        if (next < node->parents.size()) {
            Node* p = node->parents[next++].get();
            if (p->requires_grad && p->visit_mark != epoch) {
                p->visit_mark = epoch;
                stack.emplace_back(p, 0);
            }
        } else {
            order.push_back(node);
            stack.pop_back();
        }
    }
    for (Node* n : order) {
        if (!n->is_leaf()) n->grad.assign(n->value.size(), 0.0);
    }
    loss.node().grad_buffer()[0] += 1.0;
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        Node* n = *it;
        if (n->backward) n->backward(*n);
    }
}

}  // namespace cortexlab::ad

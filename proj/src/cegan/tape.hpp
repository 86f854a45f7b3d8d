#pragma once

#include <functional>
#include <string>
#include <vector>

#include "cegan/errors.hpp"
#include "cegan/tensor.hpp"

namespace cegan {

// Append-only record of one forward computation. Node inputs always precede
// the node, so a single reverse sweep is a valid backpropagation order.
// A tape is single-owner; leaves borrow the caller's tensors, which must
// outlive the tape.
template <typename T>
class Tape {
public:
    using Index = int32_t;

    explicit Tape(bool check_finite = false) : check_finite_(check_finite) {}

    Tape(const Tape&) = delete;
    Tape& operator=(const Tape&) = delete;

    // Watched leaf: backward accumulates into t.grad when t.requires_grad.
    // Pass trainable=false to run a parameter as a frozen constant.
    Index leaf(Tensor<T>& t, bool trainable = true) {
        Node n;
        n.op = "leaf";
        n.borrowed = &t;
        n.needs = t.requires_grad && trainable;
        n.acc = n.needs ? &t : nullptr;
        nodes_.push_back(std::move(n));
        return Index(nodes_.size() - 1);
    }

    // Constant input, never differentiated. Borrows the caller's tensor.
    Index constant(const Tensor<T>& t) {
        Node n;
        n.op = "constant";
        n.borrowed = &t;
        nodes_.push_back(std::move(n));
        return Index(nodes_.size() - 1);
    }

    // Constant input owned by the tape (e.g. detached values).
    Index constant_value(Tensor<T> t) {
        Node n;
        n.op = "constant";
        n.storage = std::move(t);
        nodes_.push_back(std::move(n));
        return Index(nodes_.size() - 1);
    }

    // Records an op result. backward(tape, self_index) reads grad(self) and
    // pushes into the parents it captured; null for ops with no grad path.
    Index apply(const char* op, Tensor<T> value, bool needs,
                std::function<void(Tape&, Index)> backward) {
        if (check_finite_ && !all_finite(value))
            throw NumericError(std::string("op '") + op + "' produced non-finite values");
        Node n;
        n.op = op;
        n.storage = std::move(value);
        n.needs = needs;
        n.back = needs ? std::move(backward) : nullptr;
        nodes_.push_back(std::move(n));
        return Index(nodes_.size() - 1);
    }

    const Tensor<T>& value(Index i) const {
        const Node& n = nodes_[size_t(i)];
        return n.borrowed ? *n.borrowed : n.storage;
    }

    bool needs_grad(Index i) const { return nodes_[size_t(i)].needs; }

    const char* op_name(Index i) const { return nodes_[size_t(i)].op; }

    size_t size() const { return nodes_.size(); }

    // Gradient buffer of a node, allocated to zeros on first touch.
    std::vector<T>& grad_buf(Index i) {
        Node& n = nodes_[size_t(i)];
        if (n.grad.empty()) n.grad.assign(size_t(value(i).numel()), T(0));
        return n.grad;
    }

    // Reverse accumulation from a scalar loss. Each node is visited exactly
    // once; leaf gradients add into the borrowed tensors, so repeated
    // backward passes (across tapes or on one tape) accumulate.
    void backward(Index loss) {
        if (value(loss).numel() != 1)
            throw ContractError("backward requires a scalar loss, got shape " +
                                shape_str(value(loss).shape));
        for (Node& n : nodes_) n.grad.clear();
        nodes_[size_t(loss)].grad.assign(1, T(1));
        for (Index i = loss; i >= 0; --i) {
            Node& n = nodes_[size_t(i)];
            if (n.grad.empty()) continue;
            if (n.back) n.back(*this, i);
            if (n.acc) {
                n.acc->ensure_grad();
                T* dst = n.acc->grad.data();
                const T* src = n.grad.data();
                for (size_t k = 0; k < n.grad.size(); ++k) dst[k] += src[k];
            }
        }
    }

    // First recorded tensor containing a non-finite element, if any.
    // Used for abort diagnostics.
    std::pair<Index, const char*> first_nonfinite() const {
        for (size_t i = 0; i < nodes_.size(); ++i)
            if (!all_finite(value(Index(i)))) return {Index(i), nodes_[i].op};
        return {Index(-1), nullptr};
    }

    bool check_finite() const { return check_finite_; }

private:
    struct Node {
        const char* op = "";
        Tensor<T> storage;
        const Tensor<T>* borrowed = nullptr;
        Tensor<T>* acc = nullptr;
        std::vector<T> grad;
        bool needs = false;
        std::function<void(Tape&, Index)> back;
    };

    std::vector<Node> nodes_;
    bool check_finite_ = false;
};

}  // namespace cegan

#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "rpvae/nn/tensor.hpp"

namespace rpvae::nn {

/// Trainable tensor that outlives any single tape. Tape::backward adds the
/// gradient of the loss into `grad`; callers reset it with zero_grad().
struct Parameter {
    std::string name;
    Tensor value;
    Tensor grad;

    Parameter(std::string n, Tensor v) : name(std::move(n)), value(std::move(v)), grad(value.shape()) {}
    void zero_grad();
};

class Tape;

/// Handle to a node recorded on a Tape. Cheap to copy; valid while the tape lives.
class Var {
public:
    Var() = default;

    bool valid() const noexcept { return tape_ != nullptr; }
    Tape& tape() const;
    std::size_t id() const noexcept { return id_; }

    const Tensor& value() const;
    const Shape& shape() const { return value().shape(); }
    /// Gradient accumulated by the last backward pass (zeros if unreached).
    Tensor grad() const;

private:
    friend class Tape;
    Var(Tape* tape, std::size_t id) : tape_(tape), id_(id) {}

    Tape* tape_ = nullptr;
    std::size_t id_ = 0;
};

/// Records tensor operations in execution order and replays them in reverse
/// to accumulate gradients. One tape per forward/backward pass.
class Tape {
public:
    using BackwardFn = std::function<void(Tape&, std::size_t self)>;

    Tape() = default;
    Tape(const Tape&) = delete;
    Tape& operator=(const Tape&) = delete;

    Var constant(Tensor value);
    /// Leaf that receives a gradient but is not bound to a Parameter.
    Var variable(Tensor value);
    Var parameter(Parameter& param);

    /// Appends an op result. `backward` runs only if some input requires a gradient.
    Var record(Tensor value, std::initializer_list<Var> inputs, BackwardFn backward);

    /// Seeds d(loss)/d(loss) = 1 and propagates to every reachable leaf.
    /// The loss must be a single-element tensor. A tape can be consumed once.
    void backward(Var loss);

    const Tensor& value(std::size_t id) const { return nodes_.at(id).value; }
    bool requires_grad(std::size_t id) const { return nodes_.at(id).requires_grad; }
    /// Gradient buffer of a node, allocated as zeros on first use.
    Tensor& grad(std::size_t id);
    bool has_grad(std::size_t id) const { return nodes_.at(id).grad.size() != 0; }
    std::size_t size() const noexcept { return nodes_.size(); }

private:
    struct Node {
        Tensor value;
        Tensor grad;
        bool requires_grad = false;
        Parameter* param = nullptr;
        BackwardFn backward;
    };

    Var push(Node node);

    std::vector<Node> nodes_;
    bool consumed_ = false;
};

}  // namespace rpvae::nn

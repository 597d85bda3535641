#include "rpvae/nn/tape.hpp"

#include <algorithm>
#include <stdexcept>

namespace rpvae::nn {

void Parameter::zero_grad() {
    std::fill(grad.data().begin(), grad.data().end(), 0.0);
}

Tape& Var::tape() const {
    if (!tape_) throw std::logic_error("use of an unbound Var");
    return *tape_;
}

const Tensor& Var::value() const { return tape().value(id_); }

Tensor Var::grad() const {
    Tape& t = tape();
    if (t.has_grad(id_)) return t.grad(id_);
    return Tensor(value().shape());
}

Var Tape::push(Node node) {
    nodes_.push_back(std::move(node));
    return Var(this, nodes_.size() - 1);
}

Var Tape::constant(Tensor value) {
    return push(Node{std::move(value), {}, false, nullptr, {}});
}

Var Tape::variable(Tensor value) {
    return push(Node{std::move(value), {}, true, nullptr, {}});
}

Var Tape::parameter(Parameter& param) {
    return push(Node{param.value, {}, true, &param, {}});
}

Var Tape::record(Tensor value, std::initializer_list<Var> inputs, BackwardFn backward) {
    if (consumed_) throw std::logic_error("cannot record on a tape after backward()");
    bool needs = false;
    for (const Var& in : inputs) {
        if (&in.tape() != this) throw std::logic_error("op inputs belong to a different tape");
        needs = needs || nodes_[in.id()].requires_grad;
    }
    Node node{std::move(value), {}, needs, nullptr, {}};
    if (needs) node.backward = std::move(backward);
    return push(std::move(node));
}

Tensor& Tape::grad(std::size_t id) {
    Node& n = nodes_.at(id);
    if (n.grad.size() == 0) n.grad = Tensor(n.value.shape());
    return n.grad;
}

void Tape::backward(Var loss) {
    if (!loss.valid() || &loss.tape() != this) {
        throw std::logic_error("backward() needs a loss recorded by a forward pass on this tape");
    }
    if (consumed_) throw std::logic_error("backward() already ran on this tape");
    if (nodes_[loss.id()].value.size() != 1) {
        throw std::invalid_argument("backward() needs a scalar loss, got shape " +
                                    shape_string(nodes_[loss.id()].value.shape()));
    }
    consumed_ = true;
    if (!nodes_[loss.id()].requires_grad) return;
    grad(loss.id())[0] = 1.0;
    for (std::size_t id = loss.id() + 1; id-- > 0;) {
        Node& n = nodes_[id];
        if (!n.requires_grad || n.grad.size() == 0) continue;
        if (n.backward) n.backward(*this, id);
    }
    for (Node& n : nodes_) {
        if (!n.param || n.grad.size() == 0) continue;
        auto dst = n.param->grad.data();
        auto src = n.grad.data();
        for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
    }
}

}  // namespace rpvae::nn

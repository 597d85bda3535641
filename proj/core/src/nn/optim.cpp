#include "rpvae/nn/optim.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace rpvae::nn {

std::string_view to_string(OptimizerKind kind) noexcept {
    return kind == OptimizerKind::Sgd ? "sgd" : "adam";
}

OptimizerKind parse_optimizer_kind(std::string_view text) {
    if (text == "sgd") return OptimizerKind::Sgd;
    if (text == "adam") return OptimizerKind::Adam;
    throw std::invalid_argument("unknown optimizer '" + std::string(text) + "'");
}

void validate(const OptimizerConfig& cfg) {
    if (!(cfg.learning_rate > 0.0) || !std::isfinite(cfg.learning_rate)) {
        throw std::invalid_argument("optimizer: learning_rate must be finite and > 0");
    }
    if (cfg.kind == OptimizerKind::Adam) {
        if (!(cfg.beta1 >= 0.0 && cfg.beta1 < 1.0) || !(cfg.beta2 >= 0.0 && cfg.beta2 < 1.0)) {
            throw std::invalid_argument("optimizer: Adam betas must lie in [0, 1)");
        }
        if (!(cfg.epsilon > 0.0)) throw std::invalid_argument("optimizer: Adam epsilon must be > 0");
    }
}

void Sgd::step(std::span<Parameter> params) {
    for (Parameter& p : params) {
        auto w = p.value.data();
        const auto g = p.grad.data();
        for (std::size_t i = 0; i < w.size(); ++i) w[i] -= lr_ * g[i];
    }
}

void Adam::step(std::span<Parameter> params) {
    if (m_.empty()) {
        for (const Parameter& p : params) {
            m_.emplace_back(p.value.size(), 0.0);
            v_.emplace_back(p.value.size(), 0.0);
        }
    }
    if (m_.size() != params.size()) throw std::logic_error("Adam: parameter set changed between steps");
    ++t_;
    const double b1 = cfg_.beta1, b2 = cfg_.beta2;
    const double c1 = 1.0 - std::pow(b1, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(b2, static_cast<double>(t_));
    for (std::size_t k = 0; k < params.size(); ++k) {
        auto w = params[k].value.data();
        const auto g = params[k].grad.data();
        auto& m = m_[k];
        auto& v = v_[k];
        for (std::size_t i = 0; i < w.size(); ++i) {
            m[i] = b1 * m[i] + (1.0 - b1) * g[i];
            v[i] = b2 * v[i] + (1.0 - b2) * g[i] * g[i];
            const double mhat = m[i] / c1;
            const double vhat = v[i] / c2;
            w[i] -= cfg_.learning_rate * mhat / (std::sqrt(vhat) + cfg_.epsilon);
        }
    }
}

std::unique_ptr<Optimizer> make_optimizer(const OptimizerConfig& cfg) {
    validate(cfg);
    if (cfg.kind == OptimizerKind::Sgd) return std::make_unique<Sgd>(cfg.learning_rate);
    return std::make_unique<Adam>(cfg);
}

}  // namespace rpvae::nn

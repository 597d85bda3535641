#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <string_view>
#include <vector>

#include "rpvae/nn/tape.hpp"

namespace rpvae::nn {

enum class OptimizerKind { Sgd, Adam };

std::string_view to_string(OptimizerKind kind) noexcept;
OptimizerKind parse_optimizer_kind(std::string_view text);

struct OptimizerConfig {
    OptimizerKind kind = OptimizerKind::Adam;
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

void validate(const OptimizerConfig& cfg);

class Optimizer {
public:
    virtual ~Optimizer() = default;
    /// Applies one update from the gradients currently held in params.
    virtual void step(std::span<Parameter> params) = 0;
};

class Sgd final : public Optimizer {
public:
    explicit Sgd(double learning_rate) : lr_(learning_rate) {}
    void step(std::span<Parameter> params) override;

private:
    double lr_;
};

class Adam final : public Optimizer {
public:
    explicit Adam(const OptimizerConfig& cfg) : cfg_(cfg) {}
    void step(std::span<Parameter> params) override;

private:
    OptimizerConfig cfg_;
    std::vector<std::vector<double>> m_;
    std::vector<std::vector<double>> v_;
    std::size_t t_ = 0;
};

std::unique_ptr<Optimizer> make_optimizer(const OptimizerConfig& cfg);

}  // namespace rpvae::nn

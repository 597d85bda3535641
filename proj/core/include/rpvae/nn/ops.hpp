#pragma once

#include <cstddef>

#include "rpvae/nn/tape.hpp"

namespace rpvae::nn {

// Elementwise ops require identical shapes; no broadcasting.
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);
Var scale(Var a, double factor);
Var exp(Var a);
Var relu(Var a);
Var sigmoid(Var a);

/// Sum / mean of every element; result has shape [1].
Var sum(Var a);
Var mean(Var a);

Var reshape(Var a, Shape shape);

/// x: [N, in], weight: [out, in], bias: [out] -> [N, out].
Var dense(Var x, Var weight, Var bias);

/// Valid (unpadded) strided 2-D cross-correlation.
/// x: [N, C, H, W], kernel: [O, C, kh, kw], bias: [O] -> [N, O, Ho, Wo]
/// with Ho = (H - kh) / stride + 1.
Var conv2d(Var x, Var kernel, Var bias, std::size_t stride);

std::size_t conv_output_extent(std::size_t input, std::size_t kernel, std::size_t stride);

/// z = mu + exp(logvar / 2) * eps, with eps a recorded constant of the same shape.
Var reparameterize(Var mu, Var logvar, const Tensor& eps);

/// Mean of (pred - target)^2 over every element. Shape [1].
Var mse(Var pred, Var target);

/// Closed-form KL(N(mu, exp(logvar)) || N(0, I)) summed over latent
/// coordinates and averaged over the batch rows. mu, logvar: [N, D]. Shape [1].
Var gaussian_kl(Var mu, Var logvar);

}  // namespace rpvae::nn

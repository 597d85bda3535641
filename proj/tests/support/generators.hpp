#pragma once

// Hand-rolled random input generators for property tests.

#include <cmath>
#include <cstddef>
#include <numbers>
#include <vector>

#include "rpvae/nn/tensor.hpp"
#include "rpvae/recurrence.hpp"
#include "rpvae/rng.hpp"
#include "rpvae/timeseries.hpp"

namespace rpvae::testing {

/// Mixture of shapes: white noise, sinusoid, random walk, step.
inline TimeSeries random_series(Rng& rng, std::size_t length) {
    TimeSeries ts;
    ts.dt_s = rng.uniform(0.001, 1.0);
    ts.samples.resize(length);
    const auto kind = rng.next() % 4;
    const double scale = std::pow(10.0, rng.uniform(-3.0, 3.0));
    const double offset = rng.uniform(-5.0, 5.0);
    double walk = 0.0;
    const double freq = rng.uniform(0.01, 0.5);
    const std::size_t step_at = length / 2;
    for (std::size_t i = 0; i < length; ++i) {
        double v = 0.0;
        switch (kind) {
            case 0: v = rng.normal(); break;
            case 1: v = std::sin(2.0 * std::numbers::pi * freq * static_cast<double>(i)); break;
            case 2: walk += rng.normal(); v = walk; break;
            default: v = (i < step_at ? 0.0 : 1.0) + 0.01 * rng.normal(); break;
        }
        ts.samples[i] = offset + scale * v;
    }
    return ts;
}

inline std::size_t random_length(Rng& rng, std::size_t lo, std::size_t hi) {
    return lo + static_cast<std::size_t>(rng.next() % (hi - lo + 1));
}

inline recurrence::GrayscaleImage random_image(Rng& rng, std::size_t h, std::size_t w) {
    recurrence::GrayscaleImage img(h, w);
    for (double& p : img.pixels) p = rng.uniform(0.0, 1.0);
    return img;
}

inline nn::Tensor random_tensor(Rng& rng, nn::Shape shape, double lo = -1.0, double hi = 1.0) {
    nn::Tensor t(std::move(shape));
    for (double& v : t.data()) v = rng.uniform(lo, hi);
    return t;
}

/// Uniform values with magnitude in [min_abs, max_abs] and random sign, so
/// nothing sits on a ReLU kink.
inline nn::Tensor away_from_zero(Rng& rng, nn::Shape shape, double min_abs = 0.05, double max_abs = 1.0) {
    nn::Tensor t(std::move(shape));
    for (double& v : t.data()) {
        const double mag = rng.uniform(min_abs, max_abs);
        v = (rng.next() & 1U) ? mag : -mag;
    }
    return t;
}

}  // namespace rpvae::testing

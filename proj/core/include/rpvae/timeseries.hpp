#pragma once

#include <vector>

namespace rpvae {

/// Uniformly sampled scalar signal (per-unit voltage magnitude).
struct TimeSeries {
    std::vector<double> samples;
    double dt_s = 1.0;
    double t0_s = 0.0;

    std::size_t size() const noexcept { return samples.size(); }
    double time_at(std::size_t i) const noexcept { return t0_s + static_cast<double>(i) * dt_s; }
};

/// Throws std::invalid_argument unless the series has >= 2 finite samples and dt_s > 0.
void validate(const TimeSeries& series);

}  // namespace rpvae

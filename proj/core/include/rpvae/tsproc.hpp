#pragma once

#include <cstddef>

#include "rpvae/timeseries.hpp"

namespace rpvae::tsproc {

struct PaaConfig {
    std::size_t factor = 5;
};

/// Piecewise aggregate approximation: each output sample is the mean of
/// `factor` consecutive inputs. A trailing partial frame is dropped and the
/// sample interval grows by `factor`. Throws if the output would be empty.
TimeSeries paa(const TimeSeries& series, PaaConfig cfg);

/// Affine map onto [0, 1]. A constant series maps to all zeros.
TimeSeries minmax_normalize(const TimeSeries& series);

}  // namespace rpvae::tsproc

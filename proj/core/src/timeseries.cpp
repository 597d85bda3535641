#include "rpvae/timeseries.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace rpvae {

void validate(const TimeSeries& series) {
    if (series.samples.size() < 2) {
        throw std::invalid_argument("time series needs at least 2 samples");
    }
    if (!(series.dt_s > 0.0) || !std::isfinite(series.dt_s) || !std::isfinite(series.t0_s)) {
        throw std::invalid_argument("time series sample interval must be finite and positive");
    }
    if (!std::all_of(series.samples.begin(), series.samples.end(),
                     [](double v) { return std::isfinite(v); })) {
        throw std::invalid_argument("time series contains non-finite samples");
    }
}

}  // namespace rpvae

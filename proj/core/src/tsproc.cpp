#include "rpvae/tsproc.hpp"

#include <algorithm>
#include <stdexcept>

namespace rpvae::tsproc {

TimeSeries paa(const TimeSeries& series, PaaConfig cfg) {
    if (cfg.factor < 1) throw std::invalid_argument("paa: factor must be >= 1");
    const std::size_t frames = series.size() / cfg.factor;
    if (frames == 0) {
        throw std::invalid_argument("paa: series of length " + std::to_string(series.size()) +
                                    " is shorter than factor " + std::to_string(cfg.factor));
    }
    TimeSeries out;
    out.dt_s = series.dt_s * static_cast<double>(cfg.factor);
    out.t0_s = series.t0_s;
    out.samples.resize(frames);
    if (cfg.factor == 1) {
        std::copy_n(series.samples.begin(), frames, out.samples.begin());
        return out;
    }
    const double inv = 1.0 / static_cast<double>(cfg.factor);
    for (std::size_t f = 0; f < frames; ++f) {
        double acc = 0.0;
        for (std::size_t k = 0; k < cfg.factor; ++k) acc += series.samples[f * cfg.factor + k];
        out.samples[f] = acc * inv;
    }
    return out;
}

TimeSeries minmax_normalize(const TimeSeries& series) {
    if (series.samples.empty()) throw std::invalid_argument("minmax_normalize: empty series");
    TimeSeries out = series;
    const auto [lo_it, hi_it] = std::minmax_element(series.samples.begin(), series.samples.end());
    const double lo = *lo_it;
    const double range = *hi_it - lo;
    if (range == 0.0) {
        std::fill(out.samples.begin(), out.samples.end(), 0.0);
        return out;
    }
    for (double& v : out.samples) v = (v - lo) / range;
    return out;
}

}  // namespace rpvae::tsproc

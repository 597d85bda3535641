#include "rpvae/datagen.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "rpvae/rng.hpp"

namespace rpvae::datagen {

namespace {

bool finite_all(std::initializer_list<double> values) {
    for (double v : values) {
        if (!std::isfinite(v)) return false;
    }
    return true;
}

}  // namespace

std::string_view to_string(LineClass line) noexcept {
    return line == LineClass::LineA ? "LineA" : "LineB";
}

std::string_view to_string(GeneratorId gen) noexcept {
    return gen == GeneratorId::Gen1 ? "Gen1" : "Gen4";
}

LineClass parse_line_class(std::string_view text) {
    if (text == "LineA") return LineClass::LineA;
    if (text == "LineB") return LineClass::LineB;
    throw std::invalid_argument("unknown line class '" + std::string(text) + "'");
}

GeneratorId parse_generator_id(std::string_view text) {
    if (text == "Gen1") return GeneratorId::Gen1;
    if (text == "Gen4") return GeneratorId::Gen4;
    throw std::invalid_argument("unknown generator id '" + std::string(text) + "'");
}

const BranchParams& SignalModelParams::branch(LineClass line, GeneratorId gen) const {
    return branches[branch_index(line, gen)];
}

BranchParams& SignalModelParams::branch(LineClass line, GeneratorId gen) {
    return branches[branch_index(line, gen)];
}

std::size_t SignalModelParams::sample_count() const {
    return static_cast<std::size_t>(std::llround(window_s * sample_rate_hz));
}

SignalModelParams default_signal_params() {
    SignalModelParams p;
    constexpr double z0 = 200.0;
    // Zero-impedance dip depth per generator: k_g / Z0.
    const double dip_gen1 = 0.40 * z0;
    const double dip_gen4 = 0.25 * z0;
    for (auto line : {LineClass::LineA, LineClass::LineB}) {
        for (auto gen : {GeneratorId::Gen1, GeneratorId::Gen4}) {
            BranchParams& b = p.branch(line, gen);
            b.dip_offset_ohm = z0;
            b.dip_gain = gen == GeneratorId::Gen1 ? dip_gen1 : dip_gen4;
            b.osc_amp_gain = 0.5 * b.dip_gain;
            if (line == LineClass::LineA) {
                b.osc_freq_hz = 0.8;
                b.damping_ratio = 0.08;
                b.phase_rad = 0.0;
            } else {
                b.osc_freq_hz = 1.3;
                b.damping_ratio = 0.15;
                b.phase_rad = 0.5;
            }
        }
    }
    return p;
}

void validate(const SignalModelParams& p) {
    if (!finite_all({p.f_nom_hz, p.sample_rate_hz, p.window_s, p.prefault_s, p.noise_std})) {
        throw std::invalid_argument("signal model: non-finite global parameter");
    }
    if (!(p.f_nom_hz > 0.0)) throw std::invalid_argument("signal model: f_nom_hz must be > 0");
    if (!(p.sample_rate_hz > 0.0)) throw std::invalid_argument("signal model: sample_rate_hz must be > 0");
    if (!(p.window_s > 0.0)) throw std::invalid_argument("signal model: window_s must be > 0");
    if (p.prefault_s < 0.0) throw std::invalid_argument("signal model: prefault_s must be >= 0");
    if (p.noise_std < 0.0) throw std::invalid_argument("signal model: noise_std must be >= 0");
    if (p.sample_count() < 2) throw std::invalid_argument("signal model: window holds fewer than 2 samples");
    for (const BranchParams& b : p.branches) {
        if (!finite_all({b.dip_gain, b.dip_offset_ohm, b.osc_freq_hz, b.damping_ratio,
                         b.osc_amp_gain, b.phase_rad})) {
            throw std::invalid_argument("signal model: non-finite branch parameter");
        }
        if (!(b.damping_ratio > 0.0 && b.damping_ratio < 1.0)) {
            throw std::invalid_argument("signal model: damping_ratio must lie in (0, 1)");
        }
        if (!(b.osc_freq_hz > 0.0)) throw std::invalid_argument("signal model: osc_freq_hz must be > 0");
        if (!(b.dip_offset_ohm > 0.0)) throw std::invalid_argument("signal model: dip_offset_ohm must be > 0");
    }
    for (std::size_t i = 0; i < p.branches.size(); ++i) {
        for (std::size_t j = i + 1; j < p.branches.size(); ++j) {
            if (p.branches[i] == p.branches[j]) {
                throw std::invalid_argument("signal model: branch parameter sets must be pairwise distinct");
            }
        }
    }
}

FaultEvent sample_event(std::uint64_t global_seed, std::uint64_t event_id,
                        LineClass line_class, GeneratorId generator_id) {
    FaultEvent ev;
    ev.event_id = event_id;
    ev.line_class = line_class;
    ev.generator_id = generator_id;
    ev.seed = mix_seed(global_seed, event_id);
    Rng rng(ev.seed);
    ev.impedance_ohm = rng.uniform(kMinImpedanceOhm, kMaxImpedanceOhm);
    ev.duration_s = rng.uniform(kMinDurationCycles, kMaxDurationCycles) / kNominalFrequencyHz;
    return ev;
}

namespace {

// Noise and the optional start jitter come from a stream derived from the
// event seed, so they never alias the impedance/duration draws.
Rng event_noise_stream(const FaultEvent& event) { return Rng(mix_seed(event.seed, 1)); }

double draw_fault_start(Rng& rng, const SignalModelParams& params) {
    if (!params.randomize_fault_start) return params.prefault_s;
    return params.prefault_s * rng.uniform(0.5, 1.0);
}

}  // namespace

double fault_start_s(const FaultEvent& event, const SignalModelParams& params) {
    Rng rng = event_noise_stream(event);
    return draw_fault_start(rng, params);
}

TimeSeries synthesize(const FaultEvent& event, const SignalModelParams& params) {
    validate(params);
    if (!std::isfinite(event.impedance_ohm) || !std::isfinite(event.duration_s) ||
        event.impedance_ohm < 0.0 || !(event.duration_s > 0.0)) {
        throw std::invalid_argument("synthesize: event has invalid impedance or duration");
    }

    Rng rng = event_noise_stream(event);
    const double t_fault = draw_fault_start(rng, params);
    const double t_clear = t_fault + event.duration_s;
    if (params.window_s <= t_clear) {
        throw std::invalid_argument("synthesize: fault does not clear inside the window (window_s=" +
                                    std::to_string(params.window_s) +
                                    ", clears at " + std::to_string(t_clear) + ")");
    }

    const BranchParams& b = params.branch(event.line_class, event.generator_id);
    const double z = event.impedance_ohm + b.dip_offset_ohm;
    const double dip = b.dip_gain / z;
    const double amp = b.osc_amp_gain / z;
    const double omega = 2.0 * std::numbers::pi * b.osc_freq_hz;
    const double omega_d = omega * std::sqrt(1.0 - b.damping_ratio * b.damping_ratio);
    const double decay = b.damping_ratio * omega;

    TimeSeries out;
    out.dt_s = 1.0 / params.sample_rate_hz;
    out.t0_s = 0.0;
    out.samples.resize(params.sample_count());
    for (std::size_t i = 0; i < out.samples.size(); ++i) {
        const double t = out.time_at(i);
        double v = 1.0;
        if (t >= t_clear) {
            const double tau = t - t_clear;
            v = 1.0 - amp * std::exp(-decay * tau) * std::cos(omega_d * tau + b.phase_rad);
        } else if (t >= t_fault) {
            v = 1.0 - dip;
        }
        out.samples[i] = v;
    }
    if (params.noise_std > 0.0) {
        for (double& v : out.samples) v += params.noise_std * rng.normal();
    }
    return out;
}

}  // namespace rpvae::datagen

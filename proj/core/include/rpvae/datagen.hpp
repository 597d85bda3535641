#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>

#include "rpvae/timeseries.hpp"

namespace rpvae::datagen {

enum class LineClass { LineA, LineB };
enum class GeneratorId { Gen1, Gen4 };

std::string_view to_string(LineClass line) noexcept;
std::string_view to_string(GeneratorId gen) noexcept;
LineClass parse_line_class(std::string_view text);
GeneratorId parse_generator_id(std::string_view text);

inline constexpr double kNominalFrequencyHz = 60.0;
inline constexpr double kMinImpedanceOhm = 0.0;
inline constexpr double kMaxImpedanceOhm = 1000.0;
inline constexpr double kMinDurationCycles = 10.0;
inline constexpr double kMaxDurationCycles = 20.0;

struct FaultEvent {
    std::uint64_t event_id = 0;
    LineClass line_class = LineClass::LineA;
    GeneratorId generator_id = GeneratorId::Gen1;
    double impedance_ohm = 0.0;
    double duration_s = 0.0;
    std::uint64_t seed = 0;
};

/// Response shape seen at one generator bus for faults on one line.
struct BranchParams {
    double dip_gain = 0.0;       // k_g, pu*ohm
    double dip_offset_ohm = 0.0; // Z0
    double osc_freq_hz = 1.0;    // omega_c / 2pi
    double damping_ratio = 0.1;  // zeta_c, in (0, 1)
    double osc_amp_gain = 0.0;   // a_g, pu*ohm
    double phase_rad = 0.0;      // phi_c

    friend bool operator==(const BranchParams&, const BranchParams&) = default;
};

struct SignalModelParams {
    /// Indexed by branch_index(line, gen).
    std::array<BranchParams, 4> branches{};
    double f_nom_hz = kNominalFrequencyHz;
    double sample_rate_hz = 60.0;
    double window_s = 205.0 / 60.0;
    double prefault_s = 1.0;
    double noise_std = 0.002;
    bool randomize_fault_start = false;

    const BranchParams& branch(LineClass line, GeneratorId gen) const;
    BranchParams& branch(LineClass line, GeneratorId gen);
    std::size_t sample_count() const;
};

constexpr std::size_t branch_index(LineClass line, GeneratorId gen) noexcept {
    return static_cast<std::size_t>(line) * 2 + static_cast<std::size_t>(gen);
}

/// Defaults: 0.8 Hz / zeta 0.08 for line A, 1.3 Hz / zeta 0.15 for line B,
/// zero-impedance dips of 0.4 pu (Gen1) and 0.25 pu (Gen4), Z0 = 200 ohm.
SignalModelParams default_signal_params();

/// Throws std::invalid_argument on non-finite values or violated invariants.
void validate(const SignalModelParams& params);

/// Draws impedance ~ U(0, 1000) ohm and duration ~ U(10, 20) cycles from a
/// stream seeded by mix_seed(global_seed, event_id). Independent of call order.
FaultEvent sample_event(std::uint64_t global_seed, std::uint64_t event_id,
                        LineClass line_class, GeneratorId generator_id);

/// Fault-on start time for this event under params (fixed unless randomized).
double fault_start_s(const FaultEvent& event, const SignalModelParams& params);

/// Piecewise flat / fault-on dip / damped post-clearing oscillation plus
/// Gaussian measurement noise drawn from the event's own stream.
TimeSeries synthesize(const FaultEvent& event, const SignalModelParams& params);

}  // namespace rpvae::datagen

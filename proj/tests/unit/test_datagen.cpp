#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "rpvae/datagen.hpp"

namespace rpvae::datagen {
namespace {

SignalModelParams quiet_params() {
    auto p = default_signal_params();
    p.noise_std = 0.0;
    return p;
}

FaultEvent event_with(double z, double duration, LineClass line = LineClass::LineA,
                      GeneratorId gen = GeneratorId::Gen1) {
    FaultEvent e = sample_event(11, 0, line, gen);
    e.impedance_ohm = z;
    e.duration_s = duration;
    return e;
}

TEST(SampleEvent, SameSeedAndIdGiveSameEvent) {
    const auto a = sample_event(42, 7, LineClass::LineB, GeneratorId::Gen4);
    const auto b = sample_event(42, 7, LineClass::LineB, GeneratorId::Gen4);
    EXPECT_EQ(a.impedance_ohm, b.impedance_ohm);
    EXPECT_EQ(a.duration_s, b.duration_s);
    EXPECT_EQ(a.seed, b.seed);
    EXPECT_EQ(a.event_id, 7u);
}

TEST(SampleEvent, ImpedanceMeanMatchesUniformMean) {
    double sum = 0.0;
    for (std::uint64_t id = 0; id < 10000; ++id) {
        const auto e = sample_event(2019, id, LineClass::LineA, GeneratorId::Gen1);
        ASSERT_GE(e.impedance_ohm, kMinImpedanceOhm);
        ASSERT_LE(e.impedance_ohm, kMaxImpedanceOhm);
        sum += e.impedance_ohm;
    }
    EXPECT_NEAR(sum / 10000.0, 500.0, 30.0);
}

TEST(SampleEvent, DurationsSpanTenToTwentyCycles) {
    for (std::uint64_t id = 0; id < 10000; ++id) {
        const auto e = sample_event(5, id, LineClass::LineB, GeneratorId::Gen1);
        ASSERT_GE(e.duration_s, 0.1667 - 1e-4);
        ASSERT_LE(e.duration_s, 0.3334);
    }
}

TEST(SampleEvent, DrawsDoNotDependOnCallOrder) {
    const auto late = sample_event(9, 500, LineClass::LineA, GeneratorId::Gen1);
    for (std::uint64_t id = 0; id < 10; ++id) sample_event(9, id, LineClass::LineA, GeneratorId::Gen1);
    const auto again = sample_event(9, 500, LineClass::LineA, GeneratorId::Gen1);
    EXPECT_EQ(late.impedance_ohm, again.impedance_ohm);
}

TEST(Synthesize, PrefaultSegmentIsExactlyOne) {
    const auto p = quiet_params();
    const auto ts = synthesize(event_with(300.0, 0.2), p);
    ASSERT_EQ(ts.size(), p.sample_count());
    for (std::size_t i = 0; i < ts.size() && ts.time_at(i) < p.prefault_s; ++i) {
        EXPECT_EQ(ts.samples[i], 1.0) << "sample " << i;
    }
}

TEST(Synthesize, HugeImpedanceFaultIsInvisible) {
    for (auto line : {LineClass::LineA, LineClass::LineB}) {
        for (auto gen : {GeneratorId::Gen1, GeneratorId::Gen4}) {
            const auto ts = synthesize(event_with(1e9, 0.25, line, gen), quiet_params());
            for (double v : ts.samples) ASSERT_LT(std::abs(v - 1.0), 1e-6);
        }
    }
}

TEST(Synthesize, FaultOnValueFollowsDipFormula) {
    const auto p = quiet_params();
    const auto& br = p.branch(LineClass::LineA, GeneratorId::Gen1);
    const double expected = 1.0 - br.dip_gain / (100.0 + br.dip_offset_ohm);
    const auto ev = event_with(100.0, 0.3);
    const auto ts = synthesize(ev, p);
    const double t_on = fault_start_s(ev, p);
    std::size_t checked = 0;
    for (std::size_t i = 0; i < ts.size(); ++i) {
        const double t = ts.time_at(i);
        if (t >= t_on && t < t_on + ev.duration_s) {
            EXPECT_DOUBLE_EQ(ts.samples[i], expected);
            ++checked;
        }
    }
    EXPECT_GT(checked, 10u);
}

TEST(Synthesize, QuietSignalsStayWithinBounds) {
    const auto p = quiet_params();
    for (std::uint64_t id = 0; id < 200; ++id) {
        for (auto line : {LineClass::LineA, LineClass::LineB}) {
            for (auto gen : {GeneratorId::Gen1, GeneratorId::Gen4}) {
                const auto ts = synthesize(sample_event(3, id, line, gen), p);
                for (double v : ts.samples) {
                    ASSERT_GE(v, 0.0);
                    ASSERT_LE(v, 1.2);
                }
            }
        }
    }
}

TEST(Synthesize, LinesAreDistinguishableAtEqualImpedance) {
    const auto p = quiet_params();
    const double threshold = 10.0 * default_signal_params().noise_std;
    for (std::uint64_t id = 0; id < 100; ++id) {
        for (auto gen : {GeneratorId::Gen1, GeneratorId::Gen4}) {
            auto a = sample_event(77, id, LineClass::LineA, gen);
            auto b = a;
            b.line_class = LineClass::LineB;
            const auto sa = synthesize(a, p);
            const auto sb = synthesize(b, p);
            double max_diff = 0.0;
            for (std::size_t i = 0; i < sa.size(); ++i) max_diff = std::max(max_diff, std::abs(sa.samples[i] - sb.samples[i]));
            EXPECT_GT(max_diff, threshold) << "event " << id << " Z=" << a.impedance_ohm;
        }
    }
}

TEST(Synthesize, NoisyOutputIsReproducible) {
    const auto p = default_signal_params();
    const auto ev = sample_event(8, 3, LineClass::LineB, GeneratorId::Gen4);
    EXPECT_EQ(synthesize(ev, p).samples, synthesize(ev, p).samples);
}

TEST(Synthesize, RandomizedStartStaysInsidePrefault) {
    auto p = quiet_params();
    p.randomize_fault_start = true;
    for (std::uint64_t id = 0; id < 100; ++id) {
        const double t = fault_start_s(sample_event(1, id, LineClass::LineA, GeneratorId::Gen1), p);
        EXPECT_GE(t, 0.5 * p.prefault_s);
        EXPECT_LE(t, p.prefault_s);
    }
}

TEST(Synthesize, RejectsWindowShorterThanFault) {
    auto p = quiet_params();
    p.window_s = 1.1;
    EXPECT_THROW(synthesize(event_with(10.0, 0.3), p), std::invalid_argument);
}

TEST(Validate, RejectsBadParameters) {
    auto p = default_signal_params();
    p.branch(LineClass::LineA, GeneratorId::Gen1).damping_ratio = 1.5;
    EXPECT_THROW(validate(p), std::invalid_argument);

    p = default_signal_params();
    p.sample_rate_hz = std::nan("");
    EXPECT_THROW(validate(p), std::invalid_argument);

    p = default_signal_params();
    p.branch(LineClass::LineB, GeneratorId::Gen1) = p.branch(LineClass::LineA, GeneratorId::Gen1);
    EXPECT_THROW(validate(p), std::invalid_argument);

    EXPECT_NO_THROW(validate(default_signal_params()));
}

TEST(Names, RoundTrip) {
    EXPECT_EQ(parse_line_class(to_string(LineClass::LineB)), LineClass::LineB);
    EXPECT_EQ(parse_generator_id(to_string(GeneratorId::Gen4)), GeneratorId::Gen4);
    EXPECT_THROW(parse_generator_id("Gen2"), std::invalid_argument);
}

}  // namespace
}  // namespace rpvae::datagen

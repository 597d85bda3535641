#include <benchmark/benchmark.h>

#include <cmath>

#include "rpvae/datagen.hpp"
#include "rpvae/nn/ops.hpp"
#include "rpvae/nn/train.hpp"
#include "rpvae/nn/vae.hpp"
#include "rpvae/recurrence.hpp"
#include "rpvae/rng.hpp"
#include "rpvae/tsproc.hpp"

namespace {

using namespace rpvae;

TimeSeries noisy_series(std::size_t n) {
    Rng rng(1);
    TimeSeries ts;
    ts.samples.resize(n);
    for (std::size_t i = 0; i < n; ++i) ts.samples[i] = std::sin(0.05 * static_cast<double>(i)) + 0.1 * rng.normal();
    return ts;
}

void BM_Synthesize(benchmark::State& state) {
    auto params = datagen::default_signal_params();
    const auto ev = datagen::sample_event(1, 0, datagen::LineClass::LineA, datagen::GeneratorId::Gen1);
    for (auto _ : state) benchmark::DoNotOptimize(datagen::synthesize(ev, params));
}
BENCHMARK(BM_Synthesize);

void BM_Paa(benchmark::State& state) {
    const auto ts = noisy_series(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(tsproc::paa(ts, {5}));
}
BENCHMARK(BM_Paa)->Arg(205)->Arg(605)->Arg(10000);

void BM_RecurrenceMatrix(benchmark::State& state) {
    const auto ts = noisy_series(static_cast<std::size_t>(state.range(0)) + 1);
    const auto traj = recurrence::embed_phase_space(ts, {2, 1});
    for (auto _ : state) benchmark::DoNotOptimize(recurrence::recurrence_matrix(traj));
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_RecurrenceMatrix)->Arg(40)->Arg(120)->Arg(400)->Complexity(benchmark::oNSquared);

void BM_Conv2dForwardBackward(benchmark::State& state) {
    const auto side = static_cast<std::size_t>(state.range(0));
    Rng rng(2);
    nn::Tensor x({100, 1, side, side}), k({8, 1, 3, 3}), b({8});
    for (double& v : x.data()) v = rng.uniform(0, 1);
    for (double& v : k.data()) v = rng.uniform(-1, 1);
    for (auto _ : state) {
        nn::Tape tape;
        nn::Var kv = tape.variable(k);
        tape.backward(nn::sum(nn::conv2d(tape.constant(x), kv, tape.variable(b), 2)));
        benchmark::DoNotOptimize(kv.grad());
    }
}
BENCHMARK(BM_Conv2dForwardBackward)->Arg(40)->Arg(120)->Unit(benchmark::kMillisecond);

void BM_TrainEpoch(benchmark::State& state) {
    nn::VaeConfig cfg;
    Rng rng(3);
    std::vector<recurrence::GrayscaleImage> imgs(400, recurrence::GrayscaleImage(40, 40));
    for (auto& img : imgs) {
        for (double& p : img.pixels) p = rng.uniform(0, 1);
    }
    nn::TrainConfig tc;
    tc.epochs = 1;
    tc.batch_size = 100;
    nn::VaeModel model(cfg, 4);
    for (auto _ : state) benchmark::DoNotOptimize(nn::train(model, imgs, tc));
}
BENCHMARK(BM_TrainEpoch)->Unit(benchmark::kMillisecond);

void BM_Project(benchmark::State& state) {
    nn::VaeModel model(nn::VaeConfig{}, 5);
    Rng rng(6);
    std::vector<recurrence::GrayscaleImage> imgs(500, recurrence::GrayscaleImage(40, 40));
    for (auto& img : imgs) {
        for (double& p : img.pixels) p = rng.uniform(0, 1);
    }
    for (auto _ : state) benchmark::DoNotOptimize(nn::project(model, imgs, 7));
}
BENCHMARK(BM_Project)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();

#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "rpvae/nn/optim.hpp"
#include "rpvae/nn/vae.hpp"

namespace rpvae::nn {

struct TrainConfig {
    std::size_t epochs = 500;
    std::size_t batch_size = 100;
    std::uint64_t seed = 0;
    OptimizerConfig optimizer{};
    /// Epoch counts after which on_snapshot fires; 0 means before any update.
    std::vector<std::size_t> snapshot_epochs;
};

/// Sample-weighted means over one epoch's mini-batches.
struct EpochLoss {
    std::size_t epoch = 0;  // 1-based
    double total = 0.0;
    double recon = 0.0;
    double kl = 0.0;
};

using SnapshotFn = std::function<void(std::size_t epoch, const VaeModel& model)>;

/// Shuffled mini-batch optimization of the weighted reconstruction + KL loss.
/// Shuffles and eps draws come from cfg.seed only, so a rerun with the same
/// inputs reproduces every parameter bit for bit. Throws std::runtime_error
/// naming the epoch and batch if the loss or a gradient goes non-finite.
std::vector<EpochLoss> train(VaeModel& model, std::span<const GrayscaleImage> images,
                             const TrainConfig& cfg, const SnapshotFn& on_snapshot = {});

}  // namespace rpvae::nn

#pragma once

#include <filesystem>

#include "rpvae/nn/vae.hpp"

namespace rpvae::nn {

/// Binary checkpoint, little-endian:
///   "RPVAE1" | u32 format version | u32 encoder kind | 10 x u64 architecture
///   sizes | f64 recon_weight | f64 kl_weight | u32 tensor count |
///   per tensor: u32 rank, rank x u64 extents, f64 values.
/// Tensors appear in VaeModel::parameters() order.
void save_checkpoint(const VaeModel& model, const std::filesystem::path& path);
VaeModel load_checkpoint(const std::filesystem::path& path);

}  // namespace rpvae::nn

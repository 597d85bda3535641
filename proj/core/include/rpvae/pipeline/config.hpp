#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "rpvae/classifier.hpp"
#include "rpvae/datagen.hpp"
#include "rpvae/nn/train.hpp"
#include "rpvae/nn/vae.hpp"
#include "rpvae/recurrence.hpp"
#include "rpvae/tsproc.hpp"

namespace rpvae::pipeline {

enum class GeneratorSelection { Gen1, Gen4, Both };
enum class SvmFeatures { Mu, Z };

struct SvmOptions {
    double C = 1.0;
    std::size_t epochs = 10000;
    SvmFeatures features = SvmFeatures::Mu;
    bool standardize = true;
};

/// Every knob of a run. Parsed from a `key = value` file (see README for
/// the schema); unknown keys are rejected. Call resolve() after edits.
struct RunConfig {
    std::uint64_t global_seed = 2019;
    GeneratorSelection generator = GeneratorSelection::Gen1;
    std::size_t n_events_per_line = 250;
    double train_fraction = 0.8;

    tsproc::PaaConfig paa{};
    bool normalize_signal = true;
    recurrence::EmbeddingConfig embedding{};
    std::size_t image_size = 40;
    /// Unset means derived from image_size, embedding and PAA factor.
    std::optional<double> window_s;

    datagen::SignalModelParams signal = datagen::default_signal_params();
    nn::VaeConfig vae{};
    nn::TrainConfig train{};
    SvmOptions svm{};

    bool dump_pgm = false;
    bool dump_rp_csv = false;
    std::filesystem::path output_dir = "run";

    /// Derives window length and model image size, then validates everything.
    void resolve();

    std::uint64_t init_seed() const;
    std::uint64_t train_seed() const;
    std::uint64_t project_seed() const;
    std::uint64_t svm_seed() const;
    std::uint64_t split_seed() const;

    std::size_t raw_samples_per_event() const;
    std::size_t total_events() const { return 2 * n_events_per_line; }
    std::vector<datagen::GeneratorId> generators() const;
};

/// Applies one `key = value` assignment. Throws std::invalid_argument naming
/// the key on unknown keys or malformed values.
void apply_setting(RunConfig& cfg, std::string_view key, std::string_view value);

/// Parses the config file text (`#` starts a comment), applying each line in order.
void apply_config_text(RunConfig& cfg, std::string_view text, std::string_view origin = "<config>");
RunConfig load_config(const std::filesystem::path& path);

/// Every setting except output_dir, one `key = value` per line in a fixed
/// order. Reading it back reproduces the same configuration.
std::string canonical_config(const RunConfig& cfg);

/// 64-bit FNV-1a of canonical_config(), as 16 lowercase hex digits.
std::string config_hash(const RunConfig& cfg);

}  // namespace rpvae::pipeline

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rpvae/classifier.hpp"
#include "rpvae/datagen.hpp"
#include "rpvae/nn/train.hpp"
#include "rpvae/pipeline/config.hpp"
#include "rpvae/pipeline/dataset.hpp"

namespace rpvae::pipeline {

namespace fs = std::filesystem;

// File names inside a run directory.
inline constexpr const char* kManifestFile = "manifest.json";
inline constexpr const char* kSignalDir = "signals";
inline constexpr const char* kImageStoreFile = "images.bin";
inline constexpr const char* kSplitFile = "split.csv";
inline constexpr const char* kImageDir = "images";
inline constexpr const char* kMatrixDir = "rp_csv";
inline constexpr const char* kModelFile = "model.bin";
inline constexpr const char* kLossFile = "loss.csv";
inline constexpr const char* kLatentFile = "latent.csv";
inline constexpr const char* kSvmFile = "svm.json";
inline constexpr const char* kReportFile = "report.json";
inline constexpr const char* kMetricsFile = "metrics.json";
inline constexpr const char* kResolvedConfigFile = "resolved.cfg";

std::string signal_file_name(std::uint64_t event_id);
std::string snapshot_file_name(std::size_t epoch);

struct ManifestEntry {
    datagen::FaultEvent event;
    std::string signal_file;  // relative to the run directory
};

void write_manifest(std::span<const ManifestEntry> entries, const fs::path& path);
std::vector<ManifestEntry> read_manifest(const fs::path& path);

/// Header `t_s,v_pu`, one sample per line, 17 significant digits.
void write_signal_csv(const TimeSeries& series, const fs::path& path);
TimeSeries read_signal_csv(const fs::path& path);

/// Full-precision image store: "RPIMG1", u64 count, u64 height, u64 width,
/// then per image a u64 event id followed by height*width f64 pixels.
void write_image_store(std::span<const recurrence::GrayscaleImage> images,
                       std::span<const datagen::FaultEvent> meta, const fs::path& path);
std::vector<std::pair<std::uint64_t, recurrence::GrayscaleImage>> read_image_store(const fs::path& path);

/// Header `event_id,label,split`.
void write_split_csv(const LabeledDataset& dataset, const fs::path& path);
struct SplitRow {
    std::uint64_t event_id;
    datagen::LineClass label;
    Split split;
};
std::vector<SplitRow> read_split_csv(const fs::path& path);

/// Header `epoch,total,recon,kl`.
void write_loss_csv(std::span<const nn::EpochLoss> history, const fs::path& path);
std::vector<nn::EpochLoss> read_loss_csv(const fs::path& path);

struct LatentRow {
    std::uint64_t event_id = 0;
    datagen::LineClass label = datagen::LineClass::LineA;
    Split split = Split::Train;
    std::vector<double> mu;
    std::vector<double> z;
    double impedance_ohm = 0.0;
    double duration_s = 0.0;
};

std::vector<LatentRow> make_latent_rows(const LabeledDataset& dataset, std::span<const nn::LatentPoint> points);

/// Header `event_id,label,split,mu1..muD,z1..zD,impedance_ohm,duration_s`,
/// locale-independent 17-significant-digit reals.
void write_latent_csv(std::span<const LatentRow> rows, std::size_t latent_dim, const fs::path& path);
std::vector<LatentRow> read_latent_csv(const fs::path& path);

/// Fitted classifier plus the feature standardization it expects.
struct SvmArtifact {
    classifier::LinearSvm model;
    classifier::Standardizer scaler;
    SvmFeatures features = SvmFeatures::Mu;
};

/// JSON {w, b, C, feature_mean, feature_std, features}.
void write_svm_json(const SvmArtifact& svm, const fs::path& path);
SvmArtifact read_svm_json(const fs::path& path);

struct Metrics {
    classifier::EvalReport train;
    classifier::EvalReport test;
    std::optional<nn::EpochLoss> final_loss;
    std::string config_hash;
};

/// {train_accuracy, test_accuracy, confusion (test set), final_loss{total,recon,kl}, config_hash}.
void write_metrics_json(const Metrics& metrics, const fs::path& path);
/// Both evaluation reports with set sizes.
void write_report_json(const Metrics& metrics, datagen::GeneratorId gen, const fs::path& path);

void write_text_file(const fs::path& path, const std::string& text);
std::string read_text_file(const fs::path& path);

}  // namespace rpvae::pipeline

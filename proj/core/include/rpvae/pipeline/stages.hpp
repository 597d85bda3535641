#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "rpvae/nn/train.hpp"
#include "rpvae/nn/vae.hpp"
#include "rpvae/pipeline/artifacts.hpp"
#include "rpvae/pipeline/config.hpp"
#include "rpvae/pipeline/dataset.hpp"

namespace rpvae::pipeline {

/// Stage failure carrying the stage name; what() is "<stage>: <cause>".
class StageError : public std::runtime_error {
public:
    StageError(std::string stage, const std::string& cause)
        : std::runtime_error(stage + ": " + cause), stage_(std::move(stage)) {}
    const std::string& stage() const noexcept { return stage_; }

private:
    std::string stage_;
};

struct GeneratedData {
    std::vector<datagen::FaultEvent> events;
    std::vector<TimeSeries> signals;
};

struct TrainOutcome {
    nn::VaeModel model;
    std::vector<nn::EpochLoss> history;
    std::vector<std::pair<std::size_t, std::vector<LatentRow>>> snapshots;
};

struct EvalOutcome {
    SvmArtifact svm;
    Metrics metrics;
};

GeneratedData generate_stage(const RunConfig& cfg, datagen::GeneratorId gen);
void save_generated(const GeneratedData& data, const fs::path& dir);
GeneratedData load_generated(const fs::path& dir);

LabeledDataset embed_stage(const RunConfig& cfg, const GeneratedData& data);
/// images.bin and split.csv; PGM and raw-matrix dumps when the config asks.
void save_embedded(const RunConfig& cfg, const LabeledDataset& dataset, const GeneratedData& data, const fs::path& dir);
LabeledDataset load_embedded(const fs::path& dir);

/// Trains on the training split only; snapshots project every event.
TrainOutcome train_stage(const RunConfig& cfg, const LabeledDataset& dataset);
void save_trained(const RunConfig& cfg, const TrainOutcome& outcome, const fs::path& dir);

std::vector<LatentRow> project_stage(const RunConfig& cfg, const nn::VaeModel& model, const LabeledDataset& dataset);

/// Fits on training rows; standardization statistics come from training rows only.
SvmArtifact classify_stage(const RunConfig& cfg, std::span<const LatentRow> rows);

Metrics eval_stage(const RunConfig& cfg, const SvmArtifact& svm, std::span<const LatentRow> rows,
                   std::span<const nn::EpochLoss> history);

/// Feature vectors and labels of rows in one split, as the SVM consumes them.
std::pair<std::vector<classifier::Point>, std::vector<int>> svm_inputs(std::span<const LatentRow> rows, Split which,
                                                                        SvmFeatures features);

/// Directory holding one generator's artifacts under cfg.output_dir.
fs::path generator_dir(const RunConfig& cfg, datagen::GeneratorId gen);

/// Creates `dir`; if it exists and is non-empty, throws unless `force`,
/// in which case its contents are removed first.
void prepare_output_dir(const fs::path& dir, bool force);

// Subcommand bodies: each reads the previous stage's files from the run
// directory and writes its own, for every selected generator.
void run_gen(const RunConfig& cfg, bool force);
void run_embed(const RunConfig& cfg);
void run_train(const RunConfig& cfg);
void run_project(const RunConfig& cfg);
void run_classify(const RunConfig& cfg);
void run_eval(const RunConfig& cfg);

/// All stages in memory, writing every artifact along the way.
std::vector<Metrics> run_pipeline(const RunConfig& cfg, bool force);

}  // namespace rpvae::pipeline

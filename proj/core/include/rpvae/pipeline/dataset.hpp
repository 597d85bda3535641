#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "rpvae/datagen.hpp"
#include "rpvae/pipeline/config.hpp"
#include "rpvae/recurrence.hpp"

namespace rpvae::pipeline {

enum class Split { Train, Test };

std::string_view to_string(Split split) noexcept;
Split parse_split(std::string_view text);

/// Parallel arrays indexed by dataset position (ascending event id).
struct LabeledDataset {
    std::vector<recurrence::GrayscaleImage> images;
    std::vector<datagen::LineClass> labels;
    std::vector<datagen::FaultEvent> meta;
    std::vector<Split> split;

    std::size_t size() const noexcept { return meta.size(); }
    std::vector<std::size_t> indices(Split which) const;
};

/// Events 0..n-1 fault line A, n..2n-1 line B, all observed at `gen`.
std::vector<datagen::FaultEvent> generate_events(const RunConfig& cfg, datagen::GeneratorId gen);

/// Synthesizes every event's signal; parallel, order independent.
std::vector<TimeSeries> synthesize_all(const RunConfig& cfg, std::span<const datagen::FaultEvent> events);

/// PAA, optional min-max normalization, delay embedding, recurrence image.
recurrence::GrayscaleImage embed_signal(const RunConfig& cfg, const TimeSeries& series);
recurrence::RecurrenceMatrix signal_matrix(const RunConfig& cfg, const TimeSeries& series);

/// Per-class deterministic split: within each class, events are ordered by
/// mix_seed(seed, event_id) and the first round(n_class * train_fraction)
/// go to training. Independent of array order. Needs >= 10 events and both classes.
void split_dataset(LabeledDataset& dataset, double train_fraction, std::uint64_t seed);

/// +1 for line B, -1 for line A.
int svm_label(datagen::LineClass line) noexcept;

}  // namespace rpvae::pipeline

#include "rpvae/pipeline/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "rpvae/rng.hpp"
#include "rpvae/tsproc.hpp"

namespace rpvae::pipeline {

using datagen::LineClass;

std::string_view to_string(Split split) noexcept { return split == Split::Train ? "train" : "test"; }

Split parse_split(std::string_view text) {
    if (text == "train") return Split::Train;
    if (text == "test") return Split::Test;
    throw std::invalid_argument("unknown split '" + std::string(text) + "'");
}

std::vector<std::size_t> LabeledDataset::indices(Split which) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < split.size(); ++i) {
        if (split[i] == which) out.push_back(i);
    }
    return out;
}

std::vector<datagen::FaultEvent> generate_events(const RunConfig& cfg, datagen::GeneratorId gen) {
    const std::size_t n = cfg.n_events_per_line;
    std::vector<datagen::FaultEvent> events;
    events.reserve(2 * n);
    for (std::size_t id = 0; id < 2 * n; ++id) {
        const LineClass line = id < n ? LineClass::LineA : LineClass::LineB;
        events.push_back(datagen::sample_event(cfg.global_seed, id, line, gen));
    }
    return events;
}

std::vector<TimeSeries> synthesize_all(const RunConfig& cfg, std::span<const datagen::FaultEvent> events) {
    std::vector<TimeSeries> out(events.size());
    const auto count = static_cast<std::ptrdiff_t>(events.size());
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < count; ++i) {
        out[static_cast<std::size_t>(i)] = datagen::synthesize(events[static_cast<std::size_t>(i)], cfg.signal);
    }
    return out;
}

recurrence::RecurrenceMatrix signal_matrix(const RunConfig& cfg, const TimeSeries& series) {
    TimeSeries reduced = tsproc::paa(series, cfg.paa);
    if (cfg.normalize_signal) reduced = tsproc::minmax_normalize(reduced);
    return recurrence::recurrence_matrix(recurrence::embed_phase_space(reduced, cfg.embedding));
}

recurrence::GrayscaleImage embed_signal(const RunConfig& cfg, const TimeSeries& series) {
    auto image = recurrence::to_image(signal_matrix(cfg, series));
    if (image.height != cfg.image_size) {
        throw std::invalid_argument("embedding produced a " + std::to_string(image.height) + "x" +
                                    std::to_string(image.width) + " image, expected " +
                                    std::to_string(cfg.image_size) + "x" + std::to_string(cfg.image_size));
    }
    return image;
}

int svm_label(LineClass line) noexcept { return line == LineClass::LineB ? 1 : -1; }

void split_dataset(LabeledDataset& dataset, double train_fraction, std::uint64_t seed) {
    const std::size_t n = dataset.size();
    if (n < 10) throw std::invalid_argument("split_dataset: need at least 10 events, got " + std::to_string(n));
    if (dataset.labels.size() != n) throw std::invalid_argument("split_dataset: labels and metadata differ in length");
    if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
        throw std::invalid_argument("split_dataset: train_fraction must lie in (0, 1)");
    }
    dataset.split.assign(n, Split::Test);
    for (LineClass line : {LineClass::LineA, LineClass::LineB}) {
        std::vector<std::pair<std::uint64_t, std::uint64_t>> keyed;  // (rank key, event id)
        for (std::size_t i = 0; i < n; ++i) {
            if (dataset.labels[i] != line) continue;
            keyed.emplace_back(mix_seed(seed, dataset.meta[i].event_id), dataset.meta[i].event_id);
        }
        if (keyed.empty()) {
            throw std::invalid_argument("split_dataset: class " + std::string(datagen::to_string(line)) +
                                        " is absent");
        }
        std::sort(keyed.begin(), keyed.end());
        const auto n_train =
            static_cast<std::size_t>(std::llround(static_cast<double>(keyed.size()) * train_fraction));
        std::vector<std::uint64_t> train_ids;
        for (std::size_t k = 0; k < n_train; ++k) train_ids.push_back(keyed[k].second);
        std::sort(train_ids.begin(), train_ids.end());
        for (std::size_t i = 0; i < n; ++i) {
            if (dataset.labels[i] == line &&
                std::binary_search(train_ids.begin(), train_ids.end(), dataset.meta[i].event_id)) {
                dataset.split[i] = Split::Train;
            }
        }
    }
}

}  // namespace rpvae::pipeline

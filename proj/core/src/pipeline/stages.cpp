#include "rpvae/pipeline/stages.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>

#include "rpvae/nn/checkpoint.hpp"

namespace rpvae::pipeline {

namespace {

template <typename Fn>
auto in_stage(const char* stage, Fn&& fn) -> decltype(fn()) {
    try {
        return fn();
    } catch (const StageError&) {
        throw;
    } catch (const std::exception& e) {
        throw StageError(stage, e.what());
    }
}

void require_dir(const fs::path& dir) {
    if (!fs::is_directory(dir)) {
        throw std::runtime_error("run directory " + dir.string() + " does not exist; run the earlier stages first");
    }
}

}  // namespace

fs::path generator_dir(const RunConfig& cfg, datagen::GeneratorId gen) {
    if (cfg.generator == GeneratorSelection::Both) return cfg.output_dir / std::string(datagen::to_string(gen));
    return cfg.output_dir;
}

void prepare_output_dir(const fs::path& dir, bool force) {
    if (fs::exists(dir)) {
        if (!fs::is_directory(dir)) throw std::runtime_error(dir.string() + " exists and is not a directory");
        if (!fs::is_empty(dir)) {
            if (!force) {
                throw std::runtime_error("output directory " + dir.string() +
                                         " is not empty; pass --force to overwrite it");
            }
            fs::remove_all(dir);
        }
    }
    fs::create_directories(dir);
}

GeneratedData generate_stage(const RunConfig& cfg, datagen::GeneratorId gen) {
    GeneratedData data;
    data.events = generate_events(cfg, gen);
    data.signals = synthesize_all(cfg, data.events);
    return data;
}

void save_generated(const GeneratedData& data, const fs::path& dir) {
    fs::create_directories(dir / kSignalDir);
    std::vector<ManifestEntry> entries;
    entries.reserve(data.events.size());
    for (std::size_t i = 0; i < data.events.size(); ++i) {
        ManifestEntry e{data.events[i], signal_file_name(data.events[i].event_id)};
        write_signal_csv(data.signals[i], dir / e.signal_file);
        entries.push_back(std::move(e));
    }
    write_manifest(entries, dir / kManifestFile);
}

GeneratedData load_generated(const fs::path& dir) {
    require_dir(dir);
    GeneratedData data;
    for (const ManifestEntry& e : read_manifest(dir / kManifestFile)) {
        data.events.push_back(e.event);
        data.signals.push_back(read_signal_csv(dir / e.signal_file));
    }
    return data;
}

LabeledDataset embed_stage(const RunConfig& cfg, const GeneratedData& data) {
    LabeledDataset ds;
    ds.meta = data.events;
    ds.images.resize(data.signals.size());
    const auto count = static_cast<std::ptrdiff_t>(data.signals.size());
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < count; ++i) {
        ds.images[static_cast<std::size_t>(i)] = embed_signal(cfg, data.signals[static_cast<std::size_t>(i)]);
    }
    for (const auto& ev : ds.meta) ds.labels.push_back(ev.line_class);
    split_dataset(ds, cfg.train_fraction, cfg.split_seed());
    return ds;
}

void save_embedded(const RunConfig& cfg, const LabeledDataset& ds, const GeneratedData& data, const fs::path& dir) {
    write_image_store(ds.images, ds.meta, dir / kImageStoreFile);
    write_split_csv(ds, dir / kSplitFile);
    if (cfg.dump_pgm) {
        fs::create_directories(dir / kImageDir);
        for (std::size_t i = 0; i < ds.size(); ++i) {
            char name[32];
            std::snprintf(name, sizeof name, "event_%05llu.pgm", static_cast<unsigned long long>(ds.meta[i].event_id));
            recurrence::write_pgm(ds.images[i], dir / kImageDir / name);
        }
    }
    if (cfg.dump_rp_csv) {
        fs::create_directories(dir / kMatrixDir);
        for (std::size_t i = 0; i < ds.size(); ++i) {
            char name[32];
            std::snprintf(name, sizeof name, "event_%05llu.csv", static_cast<unsigned long long>(ds.meta[i].event_id));
            recurrence::write_matrix_csv(signal_matrix(cfg, data.signals[i]), dir / kMatrixDir / name);
        }
    }
}

LabeledDataset load_embedded(const fs::path& dir) {
    require_dir(dir);
    const auto manifest = read_manifest(dir / kManifestFile);
    auto store = read_image_store(dir / kImageStoreFile);
    const auto splits = read_split_csv(dir / kSplitFile);
    if (store.size() != manifest.size() || splits.size() != manifest.size()) {
        throw std::runtime_error(dir.string() + ": manifest, image store and split file disagree in length");
    }
    LabeledDataset ds;
    for (std::size_t i = 0; i < manifest.size(); ++i) {
        const auto id = manifest[i].event.event_id;
        if (store[i].first != id || splits[i].event_id != id) {
            throw std::runtime_error(dir.string() + ": event order differs between artifacts at index " +
                                     std::to_string(i));
        }
        ds.meta.push_back(manifest[i].event);
        ds.labels.push_back(manifest[i].event.line_class);
        ds.split.push_back(splits[i].split);
        ds.images.push_back(std::move(store[i].second));
    }
    return ds;
}

TrainOutcome train_stage(const RunConfig& cfg, const LabeledDataset& ds) {
    std::vector<recurrence::GrayscaleImage> train_images;
    for (std::size_t i : ds.indices(Split::Train)) train_images.push_back(ds.images[i]);

    TrainOutcome out{nn::VaeModel(cfg.vae, cfg.init_seed()), {}, {}};
    out.history = nn::train(out.model, train_images, cfg.train, [&](std::size_t epoch, const nn::VaeModel& model) {
        out.snapshots.emplace_back(epoch, project_stage(cfg, model, ds));
    });
    return out;
}

void save_trained(const RunConfig& cfg, const TrainOutcome& outcome, const fs::path& dir) {
    nn::save_checkpoint(outcome.model, dir / kModelFile);
    write_loss_csv(outcome.history, dir / kLossFile);
    for (const auto& [epoch, rows] : outcome.snapshots) {
        write_latent_csv(rows, cfg.vae.latent_dim, dir / snapshot_file_name(epoch));
    }
}

std::vector<LatentRow> project_stage(const RunConfig& cfg, const nn::VaeModel& model, const LabeledDataset& ds) {
    return make_latent_rows(ds, nn::project(model, ds.images, cfg.project_seed()));
}

std::pair<std::vector<classifier::Point>, std::vector<int>> svm_inputs(std::span<const LatentRow> rows, Split which,
                                                                        SvmFeatures features) {
    std::pair<std::vector<classifier::Point>, std::vector<int>> out;
    for (const LatentRow& r : rows) {
        if (r.split != which) continue;
        out.first.push_back(features == SvmFeatures::Mu ? r.mu : r.z);
        out.second.push_back(svm_label(r.label));
    }
    return out;
}

SvmArtifact classify_stage(const RunConfig& cfg, std::span<const LatentRow> rows) {
    auto [points, labels] = svm_inputs(rows, Split::Train, cfg.svm.features);
    if (points.empty()) throw std::invalid_argument("no training rows in latent table");
    SvmArtifact svm;
    svm.features = cfg.svm.features;
    svm.scaler = cfg.svm.standardize ? classifier::Standardizer::fit(points)
                                     : classifier::Standardizer::identity(points.front().size());
    const auto scaled = svm.scaler.apply(points);
    svm.model = classifier::fit_svm(scaled, labels, {cfg.svm.C, cfg.svm.epochs, cfg.svm_seed()});
    return svm;
}

Metrics eval_stage(const RunConfig& cfg, const SvmArtifact& svm, std::span<const LatentRow> rows,
                   std::span<const nn::EpochLoss> history) {
    Metrics m;
    const auto [train_pts, train_labels] = svm_inputs(rows, Split::Train, svm.features);
    const auto [test_pts, test_labels] = svm_inputs(rows, Split::Test, svm.features);
    m.train = classifier::evaluate(svm.model, svm.scaler.apply(train_pts), train_labels);
    m.test = classifier::evaluate(svm.model, svm.scaler.apply(test_pts), test_labels);
    if (!history.empty()) m.final_loss = history.back();
    m.config_hash = config_hash(cfg);
    return m;
}

void run_gen(const RunConfig& cfg, bool force) {
    in_stage("gen", [&] {
        prepare_output_dir(cfg.output_dir, force);
        write_text_file(cfg.output_dir / kResolvedConfigFile, canonical_config(cfg));
        for (auto gen : cfg.generators()) {
            const fs::path dir = generator_dir(cfg, gen);
            fs::create_directories(dir);
            save_generated(generate_stage(cfg, gen), dir);
        }
    });
}

void run_embed(const RunConfig& cfg) {
    in_stage("embed", [&] {
        for (auto gen : cfg.generators()) {
            const fs::path dir = generator_dir(cfg, gen);
            const GeneratedData data = load_generated(dir);
            save_embedded(cfg, embed_stage(cfg, data), data, dir);
        }
    });
}

void run_train(const RunConfig& cfg) {
    in_stage("train", [&] {
        for (auto gen : cfg.generators()) {
            const fs::path dir = generator_dir(cfg, gen);
            save_trained(cfg, train_stage(cfg, load_embedded(dir)), dir);
        }
    });
}

void run_project(const RunConfig& cfg) {
    in_stage("project", [&] {
        for (auto gen : cfg.generators()) {
            const fs::path dir = generator_dir(cfg, gen);
            const auto model = nn::load_checkpoint(dir / kModelFile);
            const auto rows = project_stage(cfg, model, load_embedded(dir));
            write_latent_csv(rows, model.config().latent_dim, dir / kLatentFile);
        }
    });
}

void run_classify(const RunConfig& cfg) {
    in_stage("classify", [&] {
        for (auto gen : cfg.generators()) {
            const fs::path dir = generator_dir(cfg, gen);
            require_dir(dir);
            write_svm_json(classify_stage(cfg, read_latent_csv(dir / kLatentFile)), dir / kSvmFile);
        }
    });
}

void run_eval(const RunConfig& cfg) {
    in_stage("eval", [&] {
        for (auto gen : cfg.generators()) {
            const fs::path dir = generator_dir(cfg, gen);
            require_dir(dir);
            const Metrics m = eval_stage(cfg, read_svm_json(dir / kSvmFile), read_latent_csv(dir / kLatentFile),
                                         read_loss_csv(dir / kLossFile));
            write_report_json(m, gen, dir / kReportFile);
            write_metrics_json(m, dir / kMetricsFile);
        }
    });
}

std::vector<Metrics> run_pipeline(const RunConfig& cfg, bool force) {
    in_stage("run", [&] {
        prepare_output_dir(cfg.output_dir, force);
        write_text_file(cfg.output_dir / kResolvedConfigFile, canonical_config(cfg));
    });
    std::vector<Metrics> all;
    for (auto gen : cfg.generators()) {
        const fs::path dir = generator_dir(cfg, gen);
        fs::create_directories(dir);
        const GeneratedData data = in_stage("gen", [&] {
            auto d = generate_stage(cfg, gen);
            save_generated(d, dir);
            return d;
        });
        const LabeledDataset ds = in_stage("embed", [&] {
            auto d = embed_stage(cfg, data);
            save_embedded(cfg, d, data, dir);
            return d;
        });
        const TrainOutcome trained = in_stage("train", [&] {
            auto t = train_stage(cfg, ds);
            save_trained(cfg, t, dir);
            return t;
        });
        const auto rows = in_stage("project", [&] {
            auto r = project_stage(cfg, trained.model, ds);
            write_latent_csv(r, cfg.vae.latent_dim, dir / kLatentFile);
            return r;
        });
        const SvmArtifact svm = in_stage("classify", [&] {
            auto s = classify_stage(cfg, rows);
            write_svm_json(s, dir / kSvmFile);
            return s;
        });
        all.push_back(in_stage("eval", [&] {
            auto m = eval_stage(cfg, svm, rows, trained.history);
            write_report_json(m, gen, dir / kReportFile);
            write_metrics_json(m, dir / kMetricsFile);
            return m;
        }));
    }
    return all;
}

}  // namespace rpvae::pipeline

#include "rpvae/pipeline/artifacts.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "detail/binary_io.hpp"
#include "text_format.hpp"

namespace rpvae::pipeline {

namespace {

using json = nlohmann::ordered_json;
constexpr std::string_view kImageMagic = "RPIMG1";

std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> out;
    while (true) {
        const auto comma = line.find(',');
        out.push_back(line.substr(0, comma));
        if (comma == std::string_view::npos) break;
        line.remove_prefix(comma + 1);
    }
    return out;
}

std::uint64_t parse_id(std::string_view text, const fs::path& origin) {
    std::uint64_t v = 0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || ptr != text.data() + text.size()) {
        throw std::runtime_error("bad integer '" + std::string(text) + "' in " + origin.string());
    }
    return v;
}

// Yields data lines after checking the header matches exactly.
std::vector<std::string> read_csv_lines(const fs::path& path, const std::string& header) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::string line;
    if (!std::getline(in, line) || line != header) {
        throw std::runtime_error(path.string() + ": expected header '" + header + "'");
    }
    std::vector<std::string> lines;
    while (std::getline(in, line)) {
        if (!line.empty()) lines.push_back(line);
    }
    return lines;
}

std::ofstream open_out(const fs::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
    return out;
}

void finish(std::ofstream& out, const fs::path& path) {
    out.flush();
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

json confusion_json(const classifier::Confusion& c) {
    return json::array({json::array({c[0][0], c[0][1]}), json::array({c[1][0], c[1][1]})});
}

json report_json(const classifier::EvalReport& r) {
    return json{{"accuracy", r.accuracy}, {"confusion", confusion_json(r.confusion)}, {"count", r.count}};
}

void write_json(const json& j, const fs::path& path) {
    auto out = open_out(path);
    out << j.dump(2) << '\n';
    finish(out, path);
}

json read_json(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw std::runtime_error(path.string() + ": " + e.what());
    }
}

}  // namespace

std::string signal_file_name(std::uint64_t event_id) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%s/event_%05llu.csv", kSignalDir, static_cast<unsigned long long>(event_id));
    return buf;
}

std::string snapshot_file_name(std::size_t epoch) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "latent_epoch_%04zu.csv", epoch);
    return buf;
}

void write_manifest(std::span<const ManifestEntry> entries, const fs::path& path) {
    json arr = json::array();
    for (const ManifestEntry& e : entries) {
        arr.push_back(json{{"event_id", e.event.event_id},
                           {"line_class", std::string(datagen::to_string(e.event.line_class))},
                           {"generator_id", std::string(datagen::to_string(e.event.generator_id))},
                           {"impedance_ohm", e.event.impedance_ohm},
                           {"duration_s", e.event.duration_s},
                           {"seed", e.event.seed},
                           {"signal_file", e.signal_file}});
    }
    write_json(arr, path);
}

std::vector<ManifestEntry> read_manifest(const fs::path& path) {
    const json arr = read_json(path);
    if (!arr.is_array()) throw std::runtime_error(path.string() + ": manifest must be a JSON array");
    std::vector<ManifestEntry> out;
    try {
        for (const json& j : arr) {
            ManifestEntry e;
            e.event.event_id = j.at("event_id").get<std::uint64_t>();
            e.event.line_class = datagen::parse_line_class(j.at("line_class").get<std::string>());
            e.event.generator_id = datagen::parse_generator_id(j.at("generator_id").get<std::string>());
            e.event.impedance_ohm = j.at("impedance_ohm").get<double>();
            e.event.duration_s = j.at("duration_s").get<double>();
            e.event.seed = j.at("seed").get<std::uint64_t>();
            e.signal_file = j.at("signal_file").get<std::string>();
            out.push_back(std::move(e));
        }
    } catch (const json::exception& e) {
        throw std::runtime_error(path.string() + ": " + e.what());
    }
    return out;
}

void write_signal_csv(const TimeSeries& series, const fs::path& path) {
    auto out = open_out(path);
    out << "t_s,v_pu\n";
    for (std::size_t i = 0; i < series.size(); ++i) {
        out << format_double(series.time_at(i)) << ',' << format_double(series.samples[i]) << '\n';
    }
    finish(out, path);
}

TimeSeries read_signal_csv(const fs::path& path) {
    const auto lines = read_csv_lines(path, "t_s,v_pu");
    if (lines.size() < 2) throw std::runtime_error(path.string() + ": fewer than 2 samples");
    TimeSeries ts;
    std::vector<double> times;
    for (const std::string& line : lines) {
        const auto f = split_fields(line);
        if (f.size() != 2) throw std::runtime_error(path.string() + ": expected 2 columns");
        times.push_back(parse_double_exact(f[0], path.string()));
        ts.samples.push_back(parse_double_exact(f[1], path.string()));
    }
    ts.t0_s = times.front();
    ts.dt_s = (times.back() - times.front()) / static_cast<double>(times.size() - 1);
    return ts;
}

void write_image_store(std::span<const recurrence::GrayscaleImage> images, std::span<const datagen::FaultEvent> meta,
                       const fs::path& path) {
    if (images.size() != meta.size()) throw std::invalid_argument("write_image_store: images and metadata differ");
    detail::ByteWriter w;
    w.raw(kImageMagic);
    const std::size_t h = images.empty() ? 0 : images.front().height;
    const std::size_t wd = images.empty() ? 0 : images.front().width;
    w.u64(images.size());
    w.u64(h);
    w.u64(wd);
    for (std::size_t i = 0; i < images.size(); ++i) {
        if (images[i].height != h || images[i].width != wd) {
            throw std::invalid_argument("write_image_store: images differ in size");
        }
        w.u64(meta[i].event_id);
        for (double v : images[i].pixels) w.f64(v);
    }
    w.save(path);
}

std::vector<std::pair<std::uint64_t, recurrence::GrayscaleImage>> read_image_store(const fs::path& path) {
    auto r = detail::ByteReader::load(path);
    if (r.raw(kImageMagic.size()) != kImageMagic) r.fail("bad image store magic");
    const auto count = r.u64();
    const auto h = static_cast<std::size_t>(r.u64());
    const auto w = static_cast<std::size_t>(r.u64());
    std::vector<std::pair<std::uint64_t, recurrence::GrayscaleImage>> out;
    out.reserve(static_cast<std::size_t>(count));
    for (std::uint64_t i = 0; i < count; ++i) {
        const auto id = r.u64();
        recurrence::GrayscaleImage img(h, w);
        for (double& v : img.pixels) v = r.f64();
        out.emplace_back(id, std::move(img));
    }
    if (!r.at_end()) r.fail("trailing bytes");
    return out;
}

void write_split_csv(const LabeledDataset& dataset, const fs::path& path) {
    auto out = open_out(path);
    out << "event_id,label,split\n";
    for (std::size_t i = 0; i < dataset.size(); ++i) {
        out << dataset.meta[i].event_id << ',' << datagen::to_string(dataset.labels[i]) << ','
            << to_string(dataset.split[i]) << '\n';
    }
    finish(out, path);
}

std::vector<SplitRow> read_split_csv(const fs::path& path) {
    std::vector<SplitRow> rows;
    for (const std::string& line : read_csv_lines(path, "event_id,label,split")) {
        const auto f = split_fields(line);
        if (f.size() != 3) throw std::runtime_error(path.string() + ": expected 3 columns");
        rows.push_back({parse_id(f[0], path), datagen::parse_line_class(f[1]), parse_split(f[2])});
    }
    return rows;
}

void write_loss_csv(std::span<const nn::EpochLoss> history, const fs::path& path) {
    auto out = open_out(path);
    out << "epoch,total,recon,kl\n";
    for (const nn::EpochLoss& e : history) {
        out << e.epoch << ',' << format_double(e.total) << ',' << format_double(e.recon) << ','
            << format_double(e.kl) << '\n';
    }
    finish(out, path);
}

std::vector<nn::EpochLoss> read_loss_csv(const fs::path& path) {
    std::vector<nn::EpochLoss> out;
    for (const std::string& line : read_csv_lines(path, "epoch,total,recon,kl")) {
        const auto f = split_fields(line);
        if (f.size() != 4) throw std::runtime_error(path.string() + ": expected 4 columns");
        out.push_back({static_cast<std::size_t>(parse_id(f[0], path)), parse_double_exact(f[1], path.string()),
                       parse_double_exact(f[2], path.string()), parse_double_exact(f[3], path.string())});
    }
    return out;
}

std::vector<LatentRow> make_latent_rows(const LabeledDataset& dataset, std::span<const nn::LatentPoint> points) {
    if (points.size() != dataset.size()) {
        throw std::invalid_argument("make_latent_rows: " + std::to_string(points.size()) + " points for " +
                                    std::to_string(dataset.size()) + " events");
    }
    std::vector<LatentRow> rows;
    rows.reserve(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) {
        rows.push_back({dataset.meta[i].event_id, dataset.labels[i], dataset.split[i], points[i].mu, points[i].z,
                        dataset.meta[i].impedance_ohm, dataset.meta[i].duration_s});
    }
    return rows;
}

namespace {

std::string latent_header(std::size_t dim) {
    std::string h = "event_id,label,split";
    for (std::size_t d = 1; d <= dim; ++d) h += ",mu" + std::to_string(d);
    for (std::size_t d = 1; d <= dim; ++d) h += ",z" + std::to_string(d);
    return h + ",impedance_ohm,duration_s";
}

}  // namespace

void write_latent_csv(std::span<const LatentRow> rows, std::size_t latent_dim, const fs::path& path) {
    auto out = open_out(path);
    out << latent_header(latent_dim) << '\n';
    for (const LatentRow& r : rows) {
        if (r.mu.size() != latent_dim || r.z.size() != latent_dim) {
            throw std::invalid_argument("write_latent_csv: row latent dimension differs from header");
        }
        out << r.event_id << ',' << datagen::to_string(r.label) << ',' << to_string(r.split);
        for (double v : r.mu) out << ',' << format_double(v);
        for (double v : r.z) out << ',' << format_double(v);
        out << ',' << format_double(r.impedance_ohm) << ',' << format_double(r.duration_s) << '\n';
    }
    finish(out, path);
}

std::vector<LatentRow> read_latent_csv(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::string header;
    std::getline(in, header);
    const auto cols = split_fields(header);
    if (cols.size() < 7 || (cols.size() - 5) % 2 != 0) throw std::runtime_error(path.string() + ": bad latent header");
    const std::size_t dim = (cols.size() - 5) / 2;
    if (header != latent_header(dim)) throw std::runtime_error(path.string() + ": bad latent header");
    in.close();

    std::vector<LatentRow> rows;
    for (const std::string& line : read_csv_lines(path, header)) {
        const auto f = split_fields(line);
        if (f.size() != cols.size()) throw std::runtime_error(path.string() + ": ragged latent row");
        LatentRow r;
        r.event_id = parse_id(f[0], path);
        r.label = datagen::parse_line_class(f[1]);
        r.split = parse_split(f[2]);
        for (std::size_t d = 0; d < dim; ++d) r.mu.push_back(parse_double_exact(f[3 + d], path.string()));
        for (std::size_t d = 0; d < dim; ++d) r.z.push_back(parse_double_exact(f[3 + dim + d], path.string()));
        r.impedance_ohm = parse_double_exact(f[3 + 2 * dim], path.string());
        r.duration_s = parse_double_exact(f[4 + 2 * dim], path.string());
        rows.push_back(std::move(r));
    }
    return rows;
}

void write_svm_json(const SvmArtifact& svm, const fs::path& path) {
    write_json(json{{"w", svm.model.w},
                    {"b", svm.model.b},
                    {"C", svm.model.C},
                    {"feature_mean", svm.scaler.mean},
                    {"feature_std", svm.scaler.std},
                    {"features", svm.features == SvmFeatures::Mu ? "mu" : "z"}},
               path);
}

SvmArtifact read_svm_json(const fs::path& path) {
    const json j = read_json(path);
    SvmArtifact svm;
    try {
        svm.model.w = j.at("w").get<std::vector<double>>();
        svm.model.b = j.at("b").get<double>();
        svm.model.C = j.at("C").get<double>();
        svm.scaler.mean = j.at("feature_mean").get<std::vector<double>>();
        svm.scaler.std = j.at("feature_std").get<std::vector<double>>();
        const auto features = j.value("features", std::string("mu"));
        if (features != "mu" && features != "z") throw std::runtime_error("unknown features '" + features + "'");
        svm.features = features == "mu" ? SvmFeatures::Mu : SvmFeatures::Z;
    } catch (const json::exception& e) {
        throw std::runtime_error(path.string() + ": " + e.what());
    }
    if (svm.scaler.mean.size() != svm.model.w.size() || svm.scaler.std.size() != svm.model.w.size()) {
        throw std::runtime_error(path.string() + ": feature statistics do not match w");
    }
    return svm;
}

void write_metrics_json(const Metrics& m, const fs::path& path) {
    json j;
    j["train_accuracy"] = m.train.accuracy;
    j["test_accuracy"] = m.test.accuracy;
    j["confusion"] = confusion_json(m.test.confusion);
    if (m.final_loss) {
        j["final_loss"] = json{{"total", m.final_loss->total}, {"recon", m.final_loss->recon}, {"kl", m.final_loss->kl}};
    } else {
        j["final_loss"] = nullptr;
    }
    j["config_hash"] = m.config_hash;
    write_json(j, path);
}

void write_report_json(const Metrics& m, datagen::GeneratorId gen, const fs::path& path) {
    write_json(json{{"generator", std::string(datagen::to_string(gen))},
                    {"n_train", m.train.count},
                    {"n_test", m.test.count},
                    {"train", report_json(m.train)},
                    {"test", report_json(m.test)},
                    {"config_hash", m.config_hash}},
               path);
}

void write_text_file(const fs::path& path, const std::string& text) {
    auto out = open_out(path);
    out << text;
    finish(out, path);
}

std::string read_text_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace rpvae::pipeline

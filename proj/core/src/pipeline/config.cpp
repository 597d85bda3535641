#include "rpvae/pipeline/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>
#include <stdexcept>

#include "rpvae/rng.hpp"
#include "text_format.hpp"

namespace rpvae::pipeline {

namespace {

using datagen::GeneratorId;
using datagen::LineClass;

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

[[noreturn]] void bad_value(std::string_view key, std::string_view value, std::string_view expected) {
    throw std::invalid_argument("config key '" + std::string(key) + "': cannot parse '" + std::string(value) +
                                "' as " + std::string(expected));
}

std::uint64_t parse_u64(std::string_view key, std::string_view v) {
    std::uint64_t out = 0;
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || ptr != v.data() + v.size()) bad_value(key, v, "unsigned integer");
    return out;
}

std::size_t parse_size(std::string_view key, std::string_view v) {
    return static_cast<std::size_t>(parse_u64(key, v));
}

double parse_double(std::string_view key, std::string_view v) {
    double out = 0.0;
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || ptr != v.data() + v.size() || !std::isfinite(out)) bad_value(key, v, "finite real");
    return out;
}

bool parse_bool(std::string_view key, std::string_view v) {
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    bad_value(key, v, "boolean");
}

std::vector<std::size_t> parse_size_list(std::string_view key, std::string_view v) {
    std::vector<std::size_t> out;
    while (!v.empty()) {
        const auto comma = v.find(',');
        const auto item = trim(v.substr(0, comma));
        if (item.empty()) bad_value(key, v, "comma-separated unsigned integers");
        out.push_back(parse_size(key, item));
        if (comma == std::string_view::npos) break;
        v.remove_prefix(comma + 1);
    }
    return out;
}

std::string list_string(const std::vector<std::size_t>& values) {
    std::string s;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i) s += ',';
        s += std::to_string(values[i]);
    }
    return s;
}

std::string bool_string(bool b) { return b ? "true" : "false"; }

struct Setting {
    std::string key;
    std::function<void(RunConfig&, std::string_view)> set;
    std::function<std::string(const RunConfig&)> get;
};

// Line-scoped values live on both generator branches of a line; generator-scoped
// values on both line branches of a generator.
template <typename Field>
Setting line_setting(std::string key, LineClass line, Field field) {
    return {key,
            [key, line, field](RunConfig& c, std::string_view v) {
                const double x = parse_double(key, v);
                for (auto g : {GeneratorId::Gen1, GeneratorId::Gen4}) c.signal.branch(line, g).*field = x;
            },
            [line, field](const RunConfig& c) { return format_double(c.signal.branch(line, GeneratorId::Gen1).*field); }};
}

template <typename Field>
Setting gen_setting(std::string key, GeneratorId gen, Field field) {
    return {key,
            [key, gen, field](RunConfig& c, std::string_view v) {
                const double x = parse_double(key, v);
                for (auto l : {LineClass::LineA, LineClass::LineB}) c.signal.branch(l, gen).*field = x;
            },
            [gen, field](const RunConfig& c) { return format_double(c.signal.branch(LineClass::LineA, gen).*field); }};
}

#define RPVAE_SIZE_SETTING(name, member)                                                        \
    Setting {                                                                                   \
        name, [](RunConfig& c, std::string_view v) { c.member = parse_size(name, v); },        \
            [](const RunConfig& c) { return std::to_string(c.member); }                         \
    }
#define RPVAE_DOUBLE_SETTING(name, member)                                                      \
    Setting {                                                                                   \
        name, [](RunConfig& c, std::string_view v) { c.member = parse_double(name, v); },      \
            [](const RunConfig& c) { return format_double(c.member); }                          \
    }
#define RPVAE_BOOL_SETTING(name, member)                                                        \
    Setting {                                                                                   \
        name, [](RunConfig& c, std::string_view v) { c.member = parse_bool(name, v); },        \
            [](const RunConfig& c) { return bool_string(c.member); }                            \
    }

const std::vector<Setting>& settings() {
    static const std::vector<Setting> table = [] {
        using datagen::BranchParams;
        std::vector<Setting> t;
        t.push_back({"global_seed", [](RunConfig& c, std::string_view v) { c.global_seed = parse_u64("global_seed", v); },
                     [](const RunConfig& c) { return std::to_string(c.global_seed); }});
        t.push_back({"generator",
                     [](RunConfig& c, std::string_view v) {
                         if (v == "Gen1") c.generator = GeneratorSelection::Gen1;
                         else if (v == "Gen4") c.generator = GeneratorSelection::Gen4;
                         else if (v == "both") c.generator = GeneratorSelection::Both;
                         else bad_value("generator", v, "Gen1, Gen4 or both");
                     },
                     [](const RunConfig& c) {
                         switch (c.generator) {
                             case GeneratorSelection::Gen1: return std::string("Gen1");
                             case GeneratorSelection::Gen4: return std::string("Gen4");
                             case GeneratorSelection::Both: break;
                         }
                         return std::string("both");
                     }});
        t.push_back(RPVAE_SIZE_SETTING("n_events_per_line", n_events_per_line));
        t.push_back(RPVAE_DOUBLE_SETTING("train_fraction", train_fraction));
        t.push_back(RPVAE_SIZE_SETTING("paa_factor", paa.factor));
        t.push_back(RPVAE_BOOL_SETTING("normalize_signal", normalize_signal));
        t.push_back(RPVAE_SIZE_SETTING("embedding_dim", embedding.dim));
        t.push_back(RPVAE_SIZE_SETTING("embedding_delay", embedding.delay));
        t.push_back(RPVAE_SIZE_SETTING("image_size", image_size));
        t.push_back({"window_s",
                     [](RunConfig& c, std::string_view v) {
                         if (v == "auto") c.window_s.reset();
                         else c.window_s = parse_double("window_s", v);
                     },
                     [](const RunConfig& c) { return c.window_s ? format_double(*c.window_s) : std::string("auto"); }});
        t.push_back(RPVAE_DOUBLE_SETTING("sample_rate_hz", signal.sample_rate_hz));
        t.push_back(RPVAE_DOUBLE_SETTING("prefault_s", signal.prefault_s));
        t.push_back(RPVAE_DOUBLE_SETTING("noise_std", signal.noise_std));
        t.push_back(RPVAE_BOOL_SETTING("randomize_fault_start", signal.randomize_fault_start));
        t.push_back({"dip_offset_ohm",
                     [](RunConfig& c, std::string_view v) {
                         const double x = parse_double("dip_offset_ohm", v);
                         for (auto& b : c.signal.branches) b.dip_offset_ohm = x;
                     },
                     [](const RunConfig& c) { return format_double(c.signal.branches[0].dip_offset_ohm); }});
        t.push_back(gen_setting("gen1.dip_gain", GeneratorId::Gen1, &BranchParams::dip_gain));
        t.push_back(gen_setting("gen1.osc_amp_gain", GeneratorId::Gen1, &BranchParams::osc_amp_gain));
        t.push_back(gen_setting("gen4.dip_gain", GeneratorId::Gen4, &BranchParams::dip_gain));
        t.push_back(gen_setting("gen4.osc_amp_gain", GeneratorId::Gen4, &BranchParams::osc_amp_gain));
        t.push_back(line_setting("lineA.osc_freq_hz", LineClass::LineA, &BranchParams::osc_freq_hz));
        t.push_back(line_setting("lineA.damping_ratio", LineClass::LineA, &BranchParams::damping_ratio));
        t.push_back(line_setting("lineA.phase_rad", LineClass::LineA, &BranchParams::phase_rad));
        t.push_back(line_setting("lineB.osc_freq_hz", LineClass::LineB, &BranchParams::osc_freq_hz));
        t.push_back(line_setting("lineB.damping_ratio", LineClass::LineB, &BranchParams::damping_ratio));
        t.push_back(line_setting("lineB.phase_rad", LineClass::LineB, &BranchParams::phase_rad));
        t.push_back({"encoder",
                     [](RunConfig& c, std::string_view v) { c.vae.encoder = nn::parse_encoder_kind(v); },
                     [](const RunConfig& c) { return std::string(nn::to_string(c.vae.encoder)); }});
        t.push_back(RPVAE_SIZE_SETTING("latent_dim", vae.latent_dim));
        t.push_back(RPVAE_SIZE_SETTING("conv1_channels", vae.conv1_channels));
        t.push_back(RPVAE_SIZE_SETTING("conv2_channels", vae.conv2_channels));
        t.push_back(RPVAE_SIZE_SETTING("kernel_size", vae.kernel_size));
        t.push_back(RPVAE_SIZE_SETTING("stride", vae.stride));
        t.push_back(RPVAE_SIZE_SETTING("dense_hidden1", vae.dense_hidden1));
        t.push_back(RPVAE_SIZE_SETTING("dense_hidden2", vae.dense_hidden2));
        t.push_back(RPVAE_SIZE_SETTING("decoder_hidden", vae.decoder_hidden));
        t.push_back(RPVAE_DOUBLE_SETTING("recon_weight", vae.recon_weight));
        t.push_back(RPVAE_DOUBLE_SETTING("kl_weight", vae.kl_weight));
        t.push_back(RPVAE_SIZE_SETTING("epochs", train.epochs));
        t.push_back(RPVAE_SIZE_SETTING("batch_size", train.batch_size));
        t.push_back({"optimizer",
                     [](RunConfig& c, std::string_view v) { c.train.optimizer.kind = nn::parse_optimizer_kind(v); },
                     [](const RunConfig& c) { return std::string(nn::to_string(c.train.optimizer.kind)); }});
        t.push_back(RPVAE_DOUBLE_SETTING("learning_rate", train.optimizer.learning_rate));
        t.push_back(RPVAE_DOUBLE_SETTING("adam_beta1", train.optimizer.beta1));
        t.push_back(RPVAE_DOUBLE_SETTING("adam_beta2", train.optimizer.beta2));
        t.push_back(RPVAE_DOUBLE_SETTING("adam_epsilon", train.optimizer.epsilon));
        t.push_back({"snapshot_epochs",
                     [](RunConfig& c, std::string_view v) { c.train.snapshot_epochs = parse_size_list("snapshot_epochs", v); },
                     [](const RunConfig& c) { return list_string(c.train.snapshot_epochs); }});
        t.push_back(RPVAE_DOUBLE_SETTING("svm_c", svm.C));
        t.push_back(RPVAE_SIZE_SETTING("svm_epochs", svm.epochs));
        t.push_back({"svm_features",
                     [](RunConfig& c, std::string_view v) {
                         if (v == "mu") c.svm.features = SvmFeatures::Mu;
                         else if (v == "z") c.svm.features = SvmFeatures::Z;
                         else bad_value("svm_features", v, "mu or z");
                     },
                     [](const RunConfig& c) { return std::string(c.svm.features == SvmFeatures::Mu ? "mu" : "z"); }});
        t.push_back(RPVAE_BOOL_SETTING("svm_standardize", svm.standardize));
        t.push_back(RPVAE_BOOL_SETTING("dump_pgm", dump_pgm));
        t.push_back(RPVAE_BOOL_SETTING("dump_rp_csv", dump_rp_csv));
        return t;
    }();
    return table;
}

#undef RPVAE_SIZE_SETTING
#undef RPVAE_DOUBLE_SETTING
#undef RPVAE_BOOL_SETTING

}  // namespace

void apply_setting(RunConfig& cfg, std::string_view key, std::string_view value) {
    key = trim(key);
    value = trim(value);
    if (key == "output_dir") {
        cfg.output_dir = std::filesystem::path(std::string(value));
        return;
    }
    const auto& table = settings();
    const auto it = std::find_if(table.begin(), table.end(), [&](const Setting& s) { return s.key == key; });
    if (it == table.end()) throw std::invalid_argument("unknown config key '" + std::string(key) + "'");
    it->set(cfg, value);
}

void apply_config_text(RunConfig& cfg, std::string_view text, std::string_view origin) {
    std::size_t line_no = 0;
    while (!text.empty()) {
        ++line_no;
        const auto eol = text.find('\n');
        std::string_view line = text.substr(0, eol);
        text = eol == std::string_view::npos ? std::string_view{} : text.substr(eol + 1);
        if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) {
            throw std::invalid_argument(std::string(origin) + ":" + std::to_string(line_no) +
                                        ": expected 'key = value'");
        }
        try {
            apply_setting(cfg, line.substr(0, eq), line.substr(eq + 1));
        } catch (const std::invalid_argument& e) {
            throw std::invalid_argument(std::string(origin) + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }
}

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    RunConfig cfg;
    apply_config_text(cfg, ss.str(), path.string());
    return cfg;
}

std::string canonical_config(const RunConfig& cfg) {
    std::string out;
    for (const Setting& s : settings()) out += s.key + " = " + s.get(cfg) + "\n";
    return out;
}

std::string config_hash(const RunConfig& cfg) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : canonical_config(cfg)) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::uint64_t RunConfig::init_seed() const { return mix_seed(global_seed, 0x1001); }
std::uint64_t RunConfig::train_seed() const { return mix_seed(global_seed, 0x1002); }
std::uint64_t RunConfig::project_seed() const { return mix_seed(global_seed, 0x1003); }
std::uint64_t RunConfig::svm_seed() const { return mix_seed(global_seed, 0x1004); }
std::uint64_t RunConfig::split_seed() const { return mix_seed(global_seed, 0x1005); }

std::vector<datagen::GeneratorId> RunConfig::generators() const {
    switch (generator) {
        case GeneratorSelection::Gen1: return {GeneratorId::Gen1};
        case GeneratorSelection::Gen4: return {GeneratorId::Gen4};
        case GeneratorSelection::Both: break;
    }
    return {GeneratorId::Gen1, GeneratorId::Gen4};
}

std::size_t RunConfig::raw_samples_per_event() const {
    return (image_size + (embedding.dim - 1) * embedding.delay) * paa.factor;
}

void RunConfig::resolve() {
    if (n_events_per_line < 5) throw std::invalid_argument("config: n_events_per_line must be >= 5");
    if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
        throw std::invalid_argument("config: train_fraction must lie in (0, 1)");
    }
    if (paa.factor < 1) throw std::invalid_argument("config: paa_factor must be >= 1");
    if (embedding.dim < 1 || embedding.delay < 1) {
        throw std::invalid_argument("config: embedding_dim and embedding_delay must be >= 1");
    }
    if (image_size < 2) throw std::invalid_argument("config: image_size must be >= 2");
    if (!(signal.sample_rate_hz > 0.0)) throw std::invalid_argument("config: sample_rate_hz must be > 0");

    const std::size_t span = (embedding.dim - 1) * embedding.delay;
    if (window_s) {
        signal.window_s = *window_s;
        const std::size_t raw = signal.sample_count();
        const std::size_t reduced = raw / paa.factor;
        const std::size_t states = reduced > span ? reduced - span : 0;
        if (states != image_size) {
            throw std::invalid_argument("config: window_s=" + format_double(*window_s) + " yields " +
                                        std::to_string(states) + " recurrence states but image_size is " +
                                        std::to_string(image_size));
        }
    } else {
        signal.window_s = static_cast<double>(raw_samples_per_event()) / signal.sample_rate_hz;
        if (signal.sample_count() != raw_samples_per_event()) {
            throw std::logic_error("config: derived window does not round-trip to the sample count");
        }
    }
    datagen::validate(signal);
    const double latest_clear = signal.prefault_s + datagen::kMaxDurationCycles / datagen::kNominalFrequencyHz;
    if (signal.window_s <= latest_clear) {
        throw std::invalid_argument("config: window of " + format_double(signal.window_s) +
                                    " s cannot contain a fault clearing as late as " + format_double(latest_clear) +
                                    " s; raise image_size or sample_rate_hz, or lower prefault_s");
    }

    vae.image_height = image_size;
    vae.image_width = image_size;
    nn::validate(vae);

    train.seed = train_seed();
    nn::validate(train.optimizer);
    if (train.epochs == 0 && !train.snapshot_epochs.empty() &&
        *std::max_element(train.snapshot_epochs.begin(), train.snapshot_epochs.end()) > 0) {
        throw std::invalid_argument("config: snapshot epochs exceed epochs");
    }
    for (std::size_t e : train.snapshot_epochs) {
        if (e > train.epochs) {
            throw std::invalid_argument("config: snapshot epoch " + std::to_string(e) + " exceeds epochs " +
                                        std::to_string(train.epochs));
        }
    }
    const auto per_class_train =
        static_cast<std::size_t>(std::llround(static_cast<double>(n_events_per_line) * train_fraction));
    if (per_class_train == 0 || per_class_train == n_events_per_line) {
        throw std::invalid_argument("config: train_fraction leaves a split empty");
    }
    if (train.batch_size == 0 || train.batch_size > 2 * per_class_train) {
        throw std::invalid_argument("config: batch_size must be in [1, training set size " +
                                    std::to_string(2 * per_class_train) + "]");
    }
    if (!(svm.C > 0.0)) throw std::invalid_argument("config: svm_c must be > 0");
    if (svm.epochs == 0) throw std::invalid_argument("config: svm_epochs must be >= 1");
}

}  // namespace rpvae::pipeline

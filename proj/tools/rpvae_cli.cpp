// rpvae: command line front end for the fault-location pipeline.
//
//   rpvae run --config configs/reference.cfg --out runs/ref
//   rpvae gen --config c.cfg --out d && rpvae embed --config c.cfg --out d && ...

#include <CLI11.hpp>

#include <cstdio>
#include <exception>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "rpvae/pipeline/config.hpp"
#include "rpvae/pipeline/stages.hpp"

namespace {

using namespace rpvae;

struct CommonOptions {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
    std::optional<std::size_t> paa_factor;
    std::optional<std::string> generator;
    std::vector<std::string> overrides;
    bool force = false;
};

void add_common(CLI::App& cmd, CommonOptions& opts) {
    cmd.add_option("-c,--config", opts.config_path, "Run configuration file (key = value)")
        ->required()
        ->check(CLI::ExistingFile);
    cmd.add_option("--seed", opts.seed, "Override global_seed");
    cmd.add_option("-o,--out", opts.out, "Override output_dir");
    cmd.add_option("--paa-factor", opts.paa_factor, "Override paa_factor");
    cmd.add_option("--generator", opts.generator, "Override generator (Gen1, Gen4 or both)");
    cmd.add_option("--set", opts.overrides, "Extra key=value override; repeatable");
    cmd.add_flag("-f,--force", opts.force, "Replace a non-empty output directory (gen, run)");
}

pipeline::RunConfig build_config(const CommonOptions& opts) {
    pipeline::RunConfig cfg = pipeline::load_config(opts.config_path);
    for (const std::string& kv : opts.overrides) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) throw std::invalid_argument("--set expects key=value, got '" + kv + "'");
        pipeline::apply_setting(cfg, kv.substr(0, eq), kv.substr(eq + 1));
    }
    if (opts.seed) cfg.global_seed = *opts.seed;
    if (opts.out) cfg.output_dir = *opts.out;
    if (opts.paa_factor) pipeline::apply_setting(cfg, "paa_factor", std::to_string(*opts.paa_factor));
    if (opts.generator) pipeline::apply_setting(cfg, "generator", *opts.generator);
    cfg.resolve();
    return cfg;
}

void print_metrics(const pipeline::RunConfig& cfg, const std::vector<pipeline::Metrics>& all) {
    const auto gens = cfg.generators();
    for (std::size_t i = 0; i < all.size(); ++i) {
        const auto& m = all[i];
        std::printf("%s: train_accuracy=%.4f test_accuracy=%.4f", std::string(datagen::to_string(gens[i])).c_str(),
                    m.train.accuracy, m.test.accuracy);
        if (m.final_loss) std::printf(" final_loss=%.6g", m.final_loss->total);
        std::printf(" config_hash=%s\n", m.config_hash.c_str());
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Recurrence-plot VAE fault-location pipeline"};
    app.require_subcommand(1);

    CommonOptions opts;
    std::function<void(const pipeline::RunConfig&)> action;

    auto add = [&](const char* name, const char* help, std::function<void(const pipeline::RunConfig&)> fn) {
        CLI::App* cmd = app.add_subcommand(name, help);
        add_common(*cmd, opts);
        cmd->callback([&action, fn] { action = fn; });
    };
    add("gen", "Synthesize fault events and their voltage signals",
        [&](const auto& cfg) { pipeline::run_gen(cfg, opts.force); });
    add("embed", "Turn signals into recurrence-plot images and assign the split",
        [](const auto& cfg) { pipeline::run_embed(cfg); });
    add("train", "Train the VAE on the training split",
        [](const auto& cfg) { pipeline::run_train(cfg); });
    add("project", "Project every event into latent space",
        [](const auto& cfg) { pipeline::run_project(cfg); });
    add("classify", "Fit the linear SVM on training latents",
        [](const auto& cfg) { pipeline::run_classify(cfg); });
    add("eval", "Score the SVM and write metrics.json", [](const auto& cfg) { pipeline::run_eval(cfg); });
    add("run", "Full pipeline", [&](const auto& cfg) { print_metrics(cfg, pipeline::run_pipeline(cfg, opts.force)); });

    CLI11_PARSE(app, argc, argv);

    try {
        action(build_config(opts));
    } catch (const std::exception& e) {
        std::fprintf(stderr, "rpvae: %s\n", e.what());
        return 1;
    }
    return 0;
}

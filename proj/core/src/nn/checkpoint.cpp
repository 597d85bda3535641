#include "rpvae/nn/checkpoint.hpp"

#include <cstdint>
#include <stdexcept>
#include <string>

#include "detail/binary_io.hpp"

namespace rpvae::nn {

namespace {

constexpr std::string_view kMagic = "RPVAE1";
constexpr std::uint32_t kFormatVersion = 1;

}  // namespace

void save_checkpoint(const VaeModel& model, const std::filesystem::path& path) {
    const VaeConfig& c = model.config();
    detail::ByteWriter w;
    w.raw(kMagic);
    w.u32(kFormatVersion);
    w.u32(c.encoder == EncoderKind::Conv ? 0u : 1u);
    for (std::size_t v : {c.image_height, c.image_width, c.latent_dim, c.conv1_channels, c.conv2_channels,
                          c.kernel_size, c.stride, c.dense_hidden1, c.dense_hidden2, c.decoder_hidden}) {
        w.u64(v);
    }
    w.f64(c.recon_weight);
    w.f64(c.kl_weight);
    w.u32(static_cast<std::uint32_t>(model.parameters().size()));
    for (const Parameter& p : model.parameters()) {
        w.u32(static_cast<std::uint32_t>(p.value.rank()));
        for (std::size_t d : p.value.shape()) w.u64(d);
        for (double v : p.value.data()) w.f64(v);
    }
    w.save(path);
}

VaeModel load_checkpoint(const std::filesystem::path& path) {
    auto r = detail::ByteReader::load(path);

    if (r.raw(kMagic.size()) != kMagic) r.fail("bad magic");
    if (const auto version = r.u32(); version != kFormatVersion) {
        r.fail("unsupported format version " + std::to_string(version));
    }
    VaeConfig c;
    const auto kind = r.u32();
    if (kind > 1) r.fail("unknown encoder kind");
    c.encoder = kind == 0 ? EncoderKind::Conv : EncoderKind::Dense;
    for (std::size_t* field : {&c.image_height, &c.image_width, &c.latent_dim, &c.conv1_channels,
                               &c.conv2_channels, &c.kernel_size, &c.stride, &c.dense_hidden1,
                               &c.dense_hidden2, &c.decoder_hidden}) {
        *field = static_cast<std::size_t>(r.u64());
    }
    c.recon_weight = r.f64();
    c.kl_weight = r.f64();

    VaeModel model(c, 0);
    auto& params = model.parameters();
    if (r.u32() != params.size()) r.fail("tensor count does not match architecture");
    for (Parameter& p : params) {
        const auto rank = r.u32();
        Shape shape(rank);
        for (auto& d : shape) d = static_cast<std::size_t>(r.u64());
        if (shape != p.value.shape()) {
            r.fail("tensor " + p.name + " has shape " + shape_string(shape) + ", expected " +
                   shape_string(p.value.shape()));
        }
        for (double& v : p.value.data()) v = r.f64();
    }
    if (!r.at_end()) r.fail("trailing bytes after last tensor");
    return model;
}

}  // namespace rpvae::nn

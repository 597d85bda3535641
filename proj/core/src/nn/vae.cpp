#include "rpvae/nn/vae.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "rpvae/nn/ops.hpp"

namespace rpvae::nn {

namespace {

constexpr std::size_t kProjectChunk = 256;

void require_finite(const Tensor& t, const char* what) {
    if (!t.all_finite()) throw std::runtime_error(std::string(what) + " produced non-finite values");
}

}  // namespace

std::string_view to_string(EncoderKind kind) noexcept {
    return kind == EncoderKind::Conv ? "conv" : "dense";
}

EncoderKind parse_encoder_kind(std::string_view text) {
    if (text == "conv") return EncoderKind::Conv;
    if (text == "dense") return EncoderKind::Dense;
    throw std::invalid_argument("unknown encoder kind '" + std::string(text) + "'");
}

void validate(const VaeConfig& cfg) {
    if (cfg.image_height == 0 || cfg.image_width == 0) throw std::invalid_argument("vae: empty image size");
    if (cfg.latent_dim == 0) throw std::invalid_argument("vae: latent_dim must be >= 1");
    if (cfg.decoder_hidden == 0) throw std::invalid_argument("vae: decoder_hidden must be >= 1");
    if (cfg.encoder == EncoderKind::Conv) {
        if (cfg.conv1_channels == 0 || cfg.conv2_channels == 0 || cfg.kernel_size == 0 || cfg.stride == 0) {
            throw std::invalid_argument("vae: conv encoder sizes must be positive");
        }
        const std::size_t h1 = conv_output_extent(cfg.image_height, cfg.kernel_size, cfg.stride);
        const std::size_t w1 = conv_output_extent(cfg.image_width, cfg.kernel_size, cfg.stride);
        conv_output_extent(h1, cfg.kernel_size, cfg.stride);
        conv_output_extent(w1, cfg.kernel_size, cfg.stride);
    } else if (cfg.dense_hidden1 == 0 || cfg.dense_hidden2 == 0) {
        throw std::invalid_argument("vae: dense encoder sizes must be positive");
    }
    if (!(cfg.recon_weight > 0.0) || !std::isfinite(cfg.recon_weight)) {
        throw std::invalid_argument("vae: recon_weight must be finite and > 0");
    }
    if (!(cfg.kl_weight >= 0.0) || !std::isfinite(cfg.kl_weight)) {
        throw std::invalid_argument("vae: kl_weight must be finite and >= 0");
    }
    if (!(cfg.kl_weight < cfg.recon_weight * static_cast<double>(cfg.pixel_count()))) {
        throw std::invalid_argument("vae: kl_weight must stay below recon_weight * pixel count");
    }
}

VaeModel::VaeModel(VaeConfig cfg, std::uint64_t init_seed) : cfg_(cfg) {
    validate(cfg_);
    Rng rng(init_seed);
    const std::size_t k = cfg_.kernel_size;
    const std::size_t latent = cfg_.latent_dim;
    if (cfg_.encoder == EncoderKind::Conv) {
        const std::size_t h1 = conv_output_extent(cfg_.image_height, k, cfg_.stride);
        const std::size_t w1 = conv_output_extent(cfg_.image_width, k, cfg_.stride);
        const std::size_t h2 = conv_output_extent(h1, k, cfg_.stride);
        const std::size_t w2 = conv_output_extent(w1, k, cfg_.stride);
        features_ = cfg_.conv2_channels * h2 * w2;
        add_param("enc.conv1.kernel", {cfg_.conv1_channels, 1, k, k}, k * k, &rng);
        add_param("enc.conv1.bias", {cfg_.conv1_channels}, 0, nullptr);
        add_param("enc.conv2.kernel", {cfg_.conv2_channels, cfg_.conv1_channels, k, k},
                  cfg_.conv1_channels * k * k, &rng);
        add_param("enc.conv2.bias", {cfg_.conv2_channels}, 0, nullptr);
    } else {
        features_ = cfg_.dense_hidden2;
        add_param("enc.dense1.weight", {cfg_.dense_hidden1, cfg_.pixel_count()}, cfg_.pixel_count(), &rng);
        add_param("enc.dense1.bias", {cfg_.dense_hidden1}, 0, nullptr);
        add_param("enc.dense2.weight", {cfg_.dense_hidden2, cfg_.dense_hidden1}, cfg_.dense_hidden1, &rng);
        add_param("enc.dense2.bias", {cfg_.dense_hidden2}, 0, nullptr);
    }
    add_param("enc.mu.weight", {latent, features_}, features_, &rng);
    add_param("enc.mu.bias", {latent}, 0, nullptr);
    add_param("enc.logvar.weight", {latent, features_}, features_, &rng);
    add_param("enc.logvar.bias", {latent}, 0, nullptr);
    decoder_begin_ = params_.size();
    add_param("dec.hidden.weight", {cfg_.decoder_hidden, latent}, latent, &rng);
    add_param("dec.hidden.bias", {cfg_.decoder_hidden}, 0, nullptr);
    add_param("dec.out.weight", {cfg_.pixel_count(), cfg_.decoder_hidden}, cfg_.decoder_hidden, &rng);
    add_param("dec.out.bias", {cfg_.pixel_count()}, 0, nullptr);
}

void VaeModel::add_param(std::string name, Shape shape, std::size_t fan_in, Rng* rng) {
    Tensor value(std::move(shape));
    if (rng) {
        const double limit = std::sqrt(6.0 / static_cast<double>(fan_in));
        for (double& v : value.data()) v = rng->uniform(-limit, limit);
    }
    params_.emplace_back(std::move(name), std::move(value));
}

std::size_t VaeModel::parameter_count() const noexcept {
    std::size_t n = 0;
    for (const Parameter& p : params_) n += p.value.size();
    return n;
}

std::vector<Var> VaeModel::bind(Tape& tape) {
    std::vector<Var> out;
    out.reserve(params_.size());
    for (Parameter& p : params_) out.push_back(tape.parameter(p));
    return out;
}

std::vector<Var> VaeModel::bind(Tape& tape) const {
    std::vector<Var> out;
    out.reserve(params_.size());
    for (const Parameter& p : params_) out.push_back(tape.constant(p.value));
    return out;
}

EncodedBatch VaeModel::encode(std::span<const Var> p, Var images) const {
    if (p.size() != params_.size()) throw std::invalid_argument("encode: wrong number of bound parameters");
    if (images.shape().size() != 2 || images.shape()[1] != cfg_.pixel_count()) {
        throw std::invalid_argument("encode: expected [N, " + std::to_string(cfg_.pixel_count()) +
                                    "] input, got " + shape_string(images.shape()));
    }
    const std::size_t n = images.shape()[0];
    Var features;
    if (cfg_.encoder == EncoderKind::Conv) {
        Var x = reshape(images, {n, 1, cfg_.image_height, cfg_.image_width});
        Var h1 = relu(conv2d(x, p[0], p[1], cfg_.stride));
        Var h2 = relu(conv2d(h1, p[2], p[3], cfg_.stride));
        features = reshape(h2, {n, features_});
    } else {
        Var h1 = relu(dense(images, p[0], p[1]));
        features = relu(dense(h1, p[2], p[3]));
    }
    return {dense(features, p[4], p[5]), dense(features, p[6], p[7])};
}

Var VaeModel::decode(std::span<const Var> p, Var z) const {
    if (p.size() != params_.size()) throw std::invalid_argument("decode: wrong number of bound parameters");
    if (z.shape().size() != 2 || z.shape()[1] != cfg_.latent_dim) {
        throw std::invalid_argument("decode: expected [N, " + std::to_string(cfg_.latent_dim) +
                                    "] latent input, got " + shape_string(z.shape()));
    }
    const std::size_t d = decoder_begin_;
    Var h = relu(dense(z, p[d], p[d + 1]));
    return sigmoid(dense(h, p[d + 2], p[d + 3]));
}

void VaeModel::zero_grad() {
    for (Parameter& p : params_) p.zero_grad();
}

Tensor stack_images(const VaeConfig& cfg, std::span<const GrayscaleImage> images,
                    std::span<const std::size_t> order) {
    const std::size_t n = order.empty() ? images.size() : order.size();
    if (n == 0) throw std::invalid_argument("stack_images: empty batch");
    const std::size_t px = cfg.pixel_count();
    Tensor out({n, px});
    for (std::size_t r = 0; r < n; ++r) {
        const GrayscaleImage& img = images[order.empty() ? r : order[r]];
        if (img.height != cfg.image_height || img.width != cfg.image_width || img.pixels.size() != px) {
            throw std::invalid_argument("image of size " + std::to_string(img.height) + "x" +
                                        std::to_string(img.width) + " does not match model input " +
                                        std::to_string(cfg.image_height) + "x" + std::to_string(cfg.image_width));
        }
        std::copy(img.pixels.begin(), img.pixels.end(), out.data().begin() + static_cast<std::ptrdiff_t>(r * px));
    }
    return out;
}

std::pair<std::vector<double>, std::vector<double>> forward_encoder(const VaeModel& model,
                                                                    const GrayscaleImage& image) {
    Tape tape;
    const auto bound = model.bind(tape);
    Var x = tape.constant(stack_images(model.config(), std::span(&image, 1)));
    const EncodedBatch enc = model.encode(bound, x);
    require_finite(enc.mu.value(), "encoder mu head");
    require_finite(enc.logvar.value(), "encoder logvar head");
    const auto mu = enc.mu.value().data();
    const auto lv = enc.logvar.value().data();
    return {std::vector<double>(mu.begin(), mu.end()), std::vector<double>(lv.begin(), lv.end())};
}

std::vector<double> reparameterize(std::span<const double> mu, std::span<const double> logvar,
                                   std::span<const double> eps) {
    if (mu.size() != logvar.size() || mu.size() != eps.size()) {
        throw std::invalid_argument("reparameterize: mu, logvar and eps must have equal length");
    }
    std::vector<double> z(mu.size());
    for (std::size_t i = 0; i < z.size(); ++i) z[i] = mu[i] + std::exp(0.5 * logvar[i]) * eps[i];
    return z;
}

std::vector<double> reparameterize(std::span<const double> mu, std::span<const double> logvar, Rng& rng,
                                   std::vector<double>* eps_out) {
    std::vector<double> eps(mu.size());
    for (double& e : eps) e = rng.normal();
    auto z = reparameterize(mu, logvar, eps);
    if (eps_out) *eps_out = std::move(eps);
    return z;
}

GrayscaleImage forward_decoder(const VaeModel& model, std::span<const double> z) {
    const VaeConfig& cfg = model.config();
    if (z.size() != cfg.latent_dim) {
        throw std::invalid_argument("forward_decoder: expected " + std::to_string(cfg.latent_dim) +
                                    " latent values, got " + std::to_string(z.size()));
    }
    Tape tape;
    const auto bound = model.bind(tape);
    Var zv = tape.constant(Tensor({1, cfg.latent_dim}, std::vector<double>(z.begin(), z.end())));
    Var out = model.decode(bound, zv);
    require_finite(out.value(), "decoder");
    GrayscaleImage img(cfg.image_height, cfg.image_width);
    const auto px = out.value().data();
    std::copy(px.begin(), px.end(), img.pixels.begin());
    return img;
}

VaeLoss vae_loss(const GrayscaleImage& x, const GrayscaleImage& x_hat, std::span<const double> mu,
                 std::span<const double> logvar, double recon_weight, double kl_weight) {
    if (x.height != x_hat.height || x.width != x_hat.width || x.pixels.size() != x_hat.pixels.size() ||
        x.pixels.empty()) {
        throw std::invalid_argument("vae_loss: image shapes differ");
    }
    if (mu.size() != logvar.size()) throw std::invalid_argument("vae_loss: mu/logvar length mismatch");
    VaeLoss loss;
    double acc = 0.0;
    for (std::size_t i = 0; i < x.pixels.size(); ++i) {
        const double d = x.pixels[i] - x_hat.pixels[i];
        acc += d * d;
    }
    loss.recon = acc / static_cast<double>(x.pixels.size());
    double kl = 0.0;
    for (std::size_t d = 0; d < mu.size(); ++d) kl += 1.0 + logvar[d] - mu[d] * mu[d] - std::exp(logvar[d]);
    loss.kl = -0.5 * kl;
    loss.total = recon_weight * loss.recon + kl_weight * loss.kl;
    return loss;
}

std::vector<LatentPoint> project(const VaeModel& model, std::span<const GrayscaleImage> images,
                                 std::uint64_t seed) {
    const std::size_t latent = model.config().latent_dim;
    std::vector<LatentPoint> points;
    points.reserve(images.size());
    for (std::size_t begin = 0; begin < images.size(); begin += kProjectChunk) {
        const std::size_t count = std::min(kProjectChunk, images.size() - begin);
        Tape tape;
        const auto bound = model.bind(tape);
        Var x = tape.constant(stack_images(model.config(), images.subspan(begin, count)));
        const EncodedBatch enc = model.encode(bound, x);
        require_finite(enc.mu.value(), "encoder mu head");
        require_finite(enc.logvar.value(), "encoder logvar head");
        const auto mu = enc.mu.value().data();
        const auto lv = enc.logvar.value().data();
        for (std::size_t r = 0; r < count; ++r) {
            LatentPoint pt;
            pt.mu.assign(mu.begin() + static_cast<std::ptrdiff_t>(r * latent),
                         mu.begin() + static_cast<std::ptrdiff_t>((r + 1) * latent));
            pt.logvar.assign(lv.begin() + static_cast<std::ptrdiff_t>(r * latent),
                             lv.begin() + static_cast<std::ptrdiff_t>((r + 1) * latent));
            Rng rng(mix_seed(seed, begin + r));
            pt.z = reparameterize(pt.mu, pt.logvar, rng);
            points.push_back(std::move(pt));
        }
    }
    return points;
}

}  // namespace rpvae::nn

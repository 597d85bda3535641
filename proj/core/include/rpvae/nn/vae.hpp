#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "rpvae/nn/tape.hpp"
#include "rpvae/recurrence.hpp"
#include "rpvae/rng.hpp"

namespace rpvae::nn {

using recurrence::GrayscaleImage;

enum class EncoderKind { Conv, Dense };

std::string_view to_string(EncoderKind kind) noexcept;
EncoderKind parse_encoder_kind(std::string_view text);

struct VaeConfig {
    EncoderKind encoder = EncoderKind::Conv;
    std::size_t image_height = 40;
    std::size_t image_width = 40;
    std::size_t latent_dim = 2;
    // Conv encoder: two valid 3x3 stride-2 convolutions with ReLU.
    std::size_t conv1_channels = 8;
    std::size_t conv2_channels = 16;
    std::size_t kernel_size = 3;
    std::size_t stride = 2;
    // Dense encoder variant: two fully connected hidden layers.
    std::size_t dense_hidden1 = 64;
    std::size_t dense_hidden2 = 32;
    std::size_t decoder_hidden = 128;
    double recon_weight = 1.0;
    double kl_weight = 1e-3;

    std::size_t pixel_count() const noexcept { return image_height * image_width; }
};

/// Throws std::invalid_argument if sizes are degenerate, the conv stack does
/// not fit the image, or the loss weights leave the reduced-KL regime.
void validate(const VaeConfig& cfg);

/// Encoder outputs for a batch, each [N, latent_dim].
struct EncodedBatch {
    Var mu;
    Var logvar;
};

/// Encoder/decoder parameters. Parameters are stored in declaration order,
/// encoder first, which is also the checkpoint order.
class VaeModel {
public:
    /// He-style uniform fan-in initialization for weights, zero biases.
    VaeModel(VaeConfig cfg, std::uint64_t init_seed);

    const VaeConfig& config() const noexcept { return cfg_; }
    std::vector<Parameter>& parameters() noexcept { return params_; }
    const std::vector<Parameter>& parameters() const noexcept { return params_; }
    std::size_t parameter_count() const noexcept;
    /// Flattened feature count entering the latent heads.
    std::size_t encoder_features() const noexcept { return features_; }

    /// Binds parameters as trainable leaves; backward() accumulates into them.
    std::vector<Var> bind(Tape& tape);
    /// Binds parameters as constants; nothing recorded can reach the model.
    std::vector<Var> bind(Tape& tape) const;

    /// images: [N, H*W] -> (mu, logvar).
    EncodedBatch encode(std::span<const Var> bound, Var images) const;
    /// z: [N, latent_dim] -> reconstruction [N, H*W] in (0, 1).
    Var decode(std::span<const Var> bound, Var z) const;

    void zero_grad();

private:
    void add_param(std::string name, Shape shape, std::size_t fan_in, Rng* rng);

    VaeConfig cfg_;
    std::vector<Parameter> params_;
    std::size_t features_ = 0;
    std::size_t decoder_begin_ = 0;
};

struct LatentPoint {
    std::vector<double> mu;
    std::vector<double> logvar;
    std::vector<double> z;
};

struct VaeLoss {
    double total = 0.0;
    double recon = 0.0;
    double kl = 0.0;
};

/// Latent Gaussian parameters for a single image.
std::pair<std::vector<double>, std::vector<double>> forward_encoder(const VaeModel& model,
                                                                    const GrayscaleImage& image);

/// z = mu + exp(logvar/2) * eps.
std::vector<double> reparameterize(std::span<const double> mu, std::span<const double> logvar,
                                   std::span<const double> eps);
/// Draws eps ~ N(0, I) from rng; the drawn eps is written to eps_out when given.
std::vector<double> reparameterize(std::span<const double> mu, std::span<const double> logvar,
                                   Rng& rng, std::vector<double>* eps_out = nullptr);

GrayscaleImage forward_decoder(const VaeModel& model, std::span<const double> z);

/// recon = mean pixel squared error, kl = closed-form KL to N(0, I),
/// total = recon_weight * recon + kl_weight * kl.
VaeLoss vae_loss(const GrayscaleImage& x, const GrayscaleImage& x_hat, std::span<const double> mu,
                 std::span<const double> logvar, double recon_weight, double kl_weight);

/// Encodes every image without touching the model. z uses eps drawn from a
/// stream seeded by mix_seed(seed, index), so results do not depend on batching.
std::vector<LatentPoint> project(const VaeModel& model, std::span<const GrayscaleImage> images,
                                 std::uint64_t seed);

/// Packs images into a [N, H*W] tensor, checking each matches the model input.
Tensor stack_images(const VaeConfig& cfg, std::span<const GrayscaleImage> images,
                    std::span<const std::size_t> order = {});

}  // namespace rpvae::nn

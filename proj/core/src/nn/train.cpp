#include "rpvae/nn/train.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "rpvae/nn/ops.hpp"

namespace rpvae::nn {

namespace {

bool gradients_finite(const VaeModel& model) {
    for (const Parameter& p : model.parameters()) {
        if (!p.grad.all_finite()) return false;
    }
    return true;
}

}  // namespace

std::vector<EpochLoss> train(VaeModel& model, std::span<const GrayscaleImage> images, const TrainConfig& cfg,
                             const SnapshotFn& on_snapshot) {
    if (images.empty()) throw std::invalid_argument("train: empty dataset");
    if (cfg.batch_size == 0 || cfg.batch_size > images.size()) {
        throw std::invalid_argument("train: batch_size must be in [1, " + std::to_string(images.size()) + "]");
    }
    for (std::size_t e : cfg.snapshot_epochs) {
        if (e > cfg.epochs) {
            throw std::invalid_argument("train: snapshot epoch " + std::to_string(e) + " exceeds epochs " +
                                        std::to_string(cfg.epochs));
        }
    }
    // Validates every image against the model up front.
    (void)stack_images(model.config(), images);

    auto optimizer = make_optimizer(cfg.optimizer);
    const VaeConfig& vc = model.config();
    const auto wants_snapshot = [&](std::size_t epoch) {
        return on_snapshot && std::find(cfg.snapshot_epochs.begin(), cfg.snapshot_epochs.end(), epoch) !=
                                  cfg.snapshot_epochs.end();
    };

    if (wants_snapshot(0)) on_snapshot(0, model);

    Rng rng(cfg.seed);
    std::vector<std::size_t> order(images.size());
    std::vector<EpochLoss> history;
    history.reserve(cfg.epochs);

    for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::shuffle(order.begin(), order.end(), rng.engine());

        EpochLoss acc{epoch, 0.0, 0.0, 0.0};
        std::size_t batch_index = 0;
        for (std::size_t begin = 0; begin < order.size(); begin += cfg.batch_size, ++batch_index) {
            const std::size_t count = std::min(cfg.batch_size, order.size() - begin);
            const std::span<const std::size_t> idx(order.data() + begin, count);

            Tensor eps({count, vc.latent_dim});
            for (double& e : eps.data()) e = rng.normal();

            model.zero_grad();
            Tape tape;
            const auto bound = model.bind(tape);
            Var x = tape.constant(stack_images(vc, images, idx));
            const EncodedBatch enc = model.encode(bound, x);
            Var z = reparameterize(enc.mu, enc.logvar, eps);
            Var x_hat = model.decode(bound, z);
            Var recon = mse(x_hat, x);
            Var kl = gaussian_kl(enc.mu, enc.logvar);
            Var total = add(scale(recon, vc.recon_weight), scale(kl, vc.kl_weight));

            const double total_v = total.value().item();
            if (!std::isfinite(total_v)) {
                throw std::runtime_error("train: non-finite loss at epoch " + std::to_string(epoch) +
                                         ", batch " + std::to_string(batch_index));
            }
            tape.backward(total);
            if (!gradients_finite(model)) {
                throw std::runtime_error("train: non-finite gradient at epoch " + std::to_string(epoch) +
                                         ", batch " + std::to_string(batch_index));
            }
            optimizer->step(model.parameters());

            const double w = static_cast<double>(count);
            acc.total += w * total_v;
            acc.recon += w * recon.value().item();
            acc.kl += w * kl.value().item();
        }
        const double inv = 1.0 / static_cast<double>(order.size());
        acc.total *= inv;
        acc.recon *= inv;
        acc.kl *= inv;
        history.push_back(acc);

        if (wants_snapshot(epoch)) on_snapshot(epoch, model);
    }
    return history;
}

}  // namespace rpvae::nn

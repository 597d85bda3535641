#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include <unistd.h>

#include "generators.hpp"
#include "oracles.hpp"
#include "rpvae/nn/checkpoint.hpp"
#include "rpvae/nn/train.hpp"
#include "rpvae/nn/vae.hpp"

namespace rpvae::nn {
namespace {

namespace fs = std::filesystem;

VaeConfig small_config(EncoderKind kind = EncoderKind::Conv) {
    VaeConfig c;
    c.encoder = kind;
    c.image_height = c.image_width = 9;
    c.conv1_channels = 2;
    c.conv2_channels = 3;
    c.dense_hidden1 = 6;
    c.dense_hidden2 = 5;
    c.decoder_hidden = 7;
    return c;
}

std::vector<GrayscaleImage> random_images(std::uint64_t seed, std::size_t n, std::size_t side) {
    Rng rng(seed);
    std::vector<GrayscaleImage> out;
    for (std::size_t i = 0; i < n; ++i) out.push_back(testing::random_image(rng, side, side));
    return out;
}

// Zero-initialized biases put dead-patch activations exactly on the ReLU
// kink, where finite differences are meaningless; nudge them off it.
void jitter_biases(VaeModel& m, std::uint64_t seed) {
    Rng rng(seed);
    for (auto& p : m.parameters()) {
        if (p.value.rank() != 1) continue;
        for (double& v : p.value.data()) v = rng.uniform(-0.1, 0.1);
    }
}

void zero_all(VaeModel& m) {
    for (auto& p : m.parameters()) {
        for (double& v : p.value.data()) v = 0.0;
    }
}

TEST(VaeModel, ConvShapesForFortyPixelImages) {
    VaeModel m(VaeConfig{}, 1);
    EXPECT_EQ(m.encoder_features(), 9u * 9u * 16u);
    EXPECT_EQ(m.parameters().front().name, "enc.conv1.kernel");
    EXPECT_EQ(m.parameters().back().name, "dec.out.bias");
}

TEST(VaeModel, ValidateRejectsBadConfigs) {
    auto c = small_config();
    c.latent_dim = 0;
    EXPECT_THROW(validate(c), std::invalid_argument);
    c = small_config();
    c.image_height = c.image_width = 4;  // conv stack no longer fits
    EXPECT_THROW(validate(c), std::invalid_argument);
    c = small_config();
    c.kl_weight = 1e6;
    EXPECT_THROW(validate(c), std::invalid_argument);
    EXPECT_NO_THROW(validate(small_config(EncoderKind::Dense)));
}

TEST(VaeModel, ZeroNetworkGivesPriorAndHalfGrey) {
    for (auto kind : {EncoderKind::Conv, EncoderKind::Dense}) {
        VaeModel m(small_config(kind), 3);
        zero_all(m);
        const auto img = random_images(4, 1, 9).front();
        const auto [mu, logvar] = forward_encoder(m, img);
        for (double v : mu) EXPECT_EQ(v, 0.0);
        for (double v : logvar) EXPECT_EQ(v, 0.0);
        for (double p : forward_decoder(m, std::vector<double>{0.3, -2.0}).pixels) EXPECT_EQ(p, 0.5);
    }
}

TEST(VaeModel, ForwardIsDeterministicFiniteAndBounded) {
    VaeModel m(small_config(), 5);
    const auto imgs = random_images(6, 5, 9);
    for (const auto& img : imgs) {
        const auto a = forward_encoder(m, img);
        const auto b = forward_encoder(m, img);
        EXPECT_EQ(a, b);
        ASSERT_EQ(a.first.size(), 2u);
        for (double v : a.first) EXPECT_TRUE(std::isfinite(v));
        const auto x1 = forward_decoder(m, a.first);
        const auto x2 = forward_decoder(m, a.first);
        EXPECT_EQ(x1.pixels, x2.pixels);
        for (double p : x1.pixels) {
            EXPECT_GT(p, 0.0);
            EXPECT_LT(p, 1.0);
        }
    }
}

TEST(VaeModel, RejectsMismatchedImage) {
    VaeModel m(small_config(), 5);
    EXPECT_THROW(forward_encoder(m, GrayscaleImage(8, 9)), std::invalid_argument);
}

TEST(Reparameterize, SampleMeanConvergesToMu) {
    const std::vector<double> mu{0.7, -1.3}, logvar{0.4, -1.0};
    Rng rng(7);
    std::vector<double> acc(2, 0.0);
    constexpr int n = 10000;
    for (int i = 0; i < n; ++i) {
        const auto z = reparameterize(mu, logvar, rng);
        acc[0] += z[0];
        acc[1] += z[1];
    }
    for (std::size_t d = 0; d < 2; ++d) {
        const double sigma = std::exp(0.5 * logvar[d]);
        EXPECT_LE(std::abs(acc[d] / n - mu[d]), 4.0 * sigma / std::sqrt(double(n)));
    }
}

TEST(Reparameterize, FixedNoiseCases) {
    const std::vector<double> mu{0.25, -4.0};
    EXPECT_EQ(reparameterize(mu, std::vector<double>{3.0, -2.0}, std::vector<double>{0.0, 0.0}), mu);
    EXPECT_EQ(reparameterize(mu, std::vector<double>{0.0, 0.0}, std::vector<double>{1.0, 1.0}),
              (std::vector<double>{1.25, -3.0}));
}

TEST(VaeLoss, PerfectReconstructionAtPriorIsZero) {
    const auto img = random_images(8, 1, 4).front();
    const auto l = vae_loss(img, img, std::vector<double>{0.0, 0.0}, std::vector<double>{0.0, 0.0}, 1.0, 1e-3);
    EXPECT_EQ(l.total, 0.0);
    EXPECT_EQ(vae_loss(img, img, std::vector<double>{1.0, 0.0}, std::vector<double>{0.0, 0.0}, 1.0, 1.0).kl, 0.5);
}

class ModelGradientAudit : public ::testing::TestWithParam<std::uint64_t> {};

TEST_P(ModelGradientAudit, FullLossMatchesFiniteDifferences) {
    const std::uint64_t seed = GetParam();
    for (auto kind : {EncoderKind::Conv, EncoderKind::Dense}) {
        auto cfg = small_config(kind);
        cfg.kl_weight = 0.05;
        VaeModel model(cfg, seed);
        jitter_biases(model, seed + 300);
        const auto imgs = random_images(seed + 100, 3, 9);
        const Tensor x = stack_images(cfg, imgs);
        Rng rng(seed + 200);
        const Tensor eps = testing::random_tensor(rng, {3, cfg.latent_dim});
        const auto r = testing::check_parameter_gradients(model, [&](Tape& t, std::span<const Var> bound) {
            Var xv = t.constant(x);
            const auto enc = model.encode(bound, xv);
            Var recon = mse(model.decode(bound, reparameterize(enc.mu, enc.logvar, eps)), xv);
            return add(scale(recon, cfg.recon_weight), scale(gaussian_kl(enc.mu, enc.logvar), cfg.kl_weight));
        });
        EXPECT_LT(r.max_rel_error, 1e-4) << to_string(kind) << " seed " << seed;
        EXPECT_EQ(r.checked, model.parameter_count());
    }
}

INSTANTIATE_TEST_SUITE_P(TwentySeeds, ModelGradientAudit, ::testing::Range<std::uint64_t>(1, 21));

TEST(Train, ZeroEpochsLeavesParametersUnchanged) {
    VaeModel m(small_config(), 9);
    const auto before = m.parameters();
    TrainConfig tc;
    tc.epochs = 0;
    tc.batch_size = 5;
    EXPECT_TRUE(train(m, random_images(1, 10, 9), tc).empty());
    for (std::size_t i = 0; i < before.size(); ++i) {
        EXPECT_EQ(std::vector<double>(before[i].value.data().begin(), before[i].value.data().end()),
                  std::vector<double>(m.parameters()[i].value.data().begin(), m.parameters()[i].value.data().end()));
    }
}

TEST(Train, SameSeedReproducesHistoryAndWeights) {
    const auto imgs = random_images(2, 37, 9);
    TrainConfig tc;
    tc.epochs = 6;
    tc.batch_size = 10;
    tc.seed = 99;
    VaeModel a(small_config(), 4), b(small_config(), 4);
    const auto ha = train(a, imgs, tc);
    const auto hb = train(b, imgs, tc);
    ASSERT_EQ(ha.size(), 6u);
    for (std::size_t e = 0; e < ha.size(); ++e) {
        EXPECT_EQ(ha[e].epoch, e + 1);
        EXPECT_EQ(ha[e].total, hb[e].total);
        EXPECT_EQ(ha[e].recon, hb[e].recon);
        EXPECT_EQ(ha[e].kl, hb[e].kl);
    }
    for (std::size_t i = 0; i < a.parameters().size(); ++i) {
        const auto& pa = a.parameters()[i].value;
        const auto& pb = b.parameters()[i].value;
        for (std::size_t k = 0; k < pa.size(); ++k) ASSERT_EQ(pa[k], pb[k]);
    }
}

TEST(Train, LossDecreasesOnSmallProblem) {
    const auto imgs = random_images(3, 40, 9);
    TrainConfig tc;
    tc.epochs = 60;
    tc.batch_size = 8;
    tc.optimizer.learning_rate = 3e-3;
    VaeModel m(small_config(), 6);
    const auto h = train(m, imgs, tc);
    EXPECT_LT(h.back().total, h.front().total);
}

TEST(Train, SnapshotsFireAtRequestedEpochs) {
    TrainConfig tc;
    tc.epochs = 4;
    tc.batch_size = 5;
    tc.snapshot_epochs = {0, 2, 4};
    std::vector<std::size_t> seen;
    VaeModel m(small_config(), 6);
    train(m, random_images(3, 10, 9), tc, [&](std::size_t e, const VaeModel&) { seen.push_back(e); });
    EXPECT_EQ(seen, (std::vector<std::size_t>{0, 2, 4}));
}

TEST(Train, DivergenceIsReported) {
    TrainConfig tc;
    tc.epochs = 50;
    tc.batch_size = 5;
    tc.optimizer.kind = OptimizerKind::Sgd;
    tc.optimizer.learning_rate = 1e200;
    VaeModel m(small_config(), 6);
    try {
        train(m, random_images(3, 10, 9), tc);
        FAIL() << "expected divergence";
    } catch (const std::runtime_error& e) {
        EXPECT_NE(std::string(e.what()).find("epoch"), std::string::npos) << e.what();
    }
}

TEST(Project, IsPureAndBatchIndependent) {
    VaeModel m(small_config(), 12);
    const auto imgs = random_images(5, 300, 9);
    const auto before = m.parameters().front().value;
    const auto a = project(m, imgs, 17);
    const auto b = project(m, imgs, 17);
    ASSERT_EQ(a.size(), imgs.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        EXPECT_EQ(a[i].mu, b[i].mu);
        EXPECT_EQ(a[i].z, b[i].z);
        EXPECT_EQ(a[i].mu.size(), 2u);
    }
    // Projecting a subset gives the same mu, and the same z for the same index.
    const auto head = project(m, std::span(imgs).first(3), 17);
    for (std::size_t i = 0; i < 3; ++i) {
        EXPECT_EQ(head[i].mu, a[i].mu);
        EXPECT_EQ(head[i].z, a[i].z);
    }
    for (std::size_t k = 0; k < before.size(); ++k) EXPECT_EQ(m.parameters().front().value[k], before[k]);
    // Identical images give identical mu.
    const std::vector<GrayscaleImage> twins{imgs[0], imgs[0]};
    const auto t = project(m, twins, 1);
    EXPECT_EQ(t[0].mu, t[1].mu);
}

fs::path temp_file(const std::string& name) {
    return fs::temp_directory_path() / ("rpvae_test_" + std::to_string(::getpid()) + "_" + name);
}

TEST(Checkpoint, RoundTripIsExact) {
    for (auto kind : {EncoderKind::Conv, EncoderKind::Dense}) {
        VaeModel m(small_config(kind), 21);
        const auto path = temp_file("ckpt.bin");
        save_checkpoint(m, path);
        const VaeModel back = load_checkpoint(path);
        fs::remove(path);
        EXPECT_EQ(back.config().encoder, kind);
        ASSERT_EQ(back.parameters().size(), m.parameters().size());
        for (std::size_t i = 0; i < m.parameters().size(); ++i) {
            const auto& p = m.parameters()[i];
            const auto& q = back.parameters()[i];
            EXPECT_EQ(p.name, q.name);
            EXPECT_EQ(p.value.shape(), q.value.shape());
            for (std::size_t k = 0; k < p.value.size(); ++k) ASSERT_EQ(p.value[k], q.value[k]);
        }
        const auto img = random_images(1, 1, 9).front();
        EXPECT_EQ(forward_encoder(m, img), forward_encoder(back, img));
    }
}

TEST(Checkpoint, StartsWithMagicAndRejectsCorruption) {
    VaeModel m(small_config(), 22);
    const auto path = temp_file("magic.bin");
    save_checkpoint(m, path);
    std::string bytes;
    {
        std::ifstream in(path, std::ios::binary);
        bytes.assign(std::istreambuf_iterator<char>(in), {});
    }
    EXPECT_EQ(bytes.substr(0, 6), "RPVAE1");

    auto write = [&](const std::string& b) {
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        out << b;
    };
    write("XPVAE1" + bytes.substr(6));
    EXPECT_THROW(load_checkpoint(path), std::runtime_error);
    write(bytes.substr(0, bytes.size() - 3));
    EXPECT_THROW(load_checkpoint(path), std::runtime_error);
    write(bytes + "x");
    EXPECT_THROW(load_checkpoint(path), std::runtime_error);
    fs::remove(path);
}

}  // namespace
}  // namespace rpvae::nn

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "generators.hpp"
#include "oracles.hpp"
#include "rpvae/nn/ops.hpp"
#include "rpvae/nn/tape.hpp"

namespace rpvae::nn {
namespace {

using testing::check_input_gradients;

// Contracts an arbitrary output with fixed random weights so every output
// coordinate gets a distinct upstream gradient.
Var weighted_sum(Tape& tape, Var out, std::uint64_t seed) {
    Rng rng(seed);
    return sum(mul(out, tape.constant(testing::random_tensor(rng, out.shape()))));
}

constexpr double kTol = 1e-4;

TEST(Tape, SumGradientIsOnes) {
    Tape tape;
    Var w = tape.variable(Tensor({3, 2}, {1, 2, 3, 4, 5, 6}));
    tape.backward(sum(w));
    const Tensor g = w.grad();
    for (double v : g.data()) EXPECT_EQ(v, 1.0);
}

TEST(Tape, HalfSquaredNormGradientIsInput) {
    Tape tape;
    const Tensor t({4}, {0.5, -2.0, 3.0, 0.0});
    Var w = tape.variable(t);
    tape.backward(scale(sum(mul(w, w)), 0.5));
    for (std::size_t i = 0; i < t.size(); ++i) EXPECT_EQ(w.grad()[i], t[i]);
}

TEST(Tape, ReusedNodeAccumulates) {
    Tape tape;
    Var x = tape.variable(Tensor({1}, {3.0}));
    tape.backward(add(mul(x, x), x));  // d/dx (x^2 + x) = 7
    EXPECT_EQ(x.grad()[0], 7.0);
}

TEST(Tape, ParameterGradientsAccumulateAcrossTapes) {
    Parameter p("p", Tensor({2}, {1.0, 2.0}));
    for (int i = 0; i < 2; ++i) {
        Tape tape;
        tape.backward(sum(tape.parameter(p)));
    }
    EXPECT_EQ(p.grad[0], 2.0);
    p.zero_grad();
    EXPECT_EQ(p.grad[1], 0.0);
}

TEST(Tape, ConstantsGetNoGradient) {
    Tape tape;
    Var c = tape.constant(Tensor({2}, {1.0, 2.0}));
    Var v = tape.variable(Tensor({2}, {3.0, 4.0}));
    tape.backward(sum(mul(c, v)));
    EXPECT_FALSE(tape.has_grad(c.id()));
    EXPECT_EQ(v.grad()[1], 2.0);
}

TEST(Tape, RejectsMisuse) {
    Tape tape;
    Var v = tape.variable(Tensor({2}, {1.0, 2.0}));
    EXPECT_THROW(add(v, tape.variable(Tensor({3}))), std::invalid_argument);
    EXPECT_THROW(tape.backward(v), std::invalid_argument);
    Var s = sum(v);
    tape.backward(s);
    EXPECT_THROW(tape.backward(s), std::logic_error);
    EXPECT_THROW(sum(v), std::logic_error);
}

TEST(Ops, ForwardValuesByHand) {
    Tape tape;
    Var x = tape.constant(Tensor({1, 2}, {1.0, -2.0}));
    Var w = tape.constant(Tensor({3, 2}, {1, 0, 0, 1, 1, 1}));
    Var b = tape.constant(Tensor({3}, {0.5, 0.0, -1.0}));
    const Tensor y = dense(x, w, b).value();
    EXPECT_EQ(y.shape(), (Shape{1, 3}));
    EXPECT_EQ(y[0], 1.5);
    EXPECT_EQ(y[1], -2.0);
    EXPECT_EQ(y[2], -2.0);

    EXPECT_EQ(relu(x).value()[1], 0.0);
    EXPECT_EQ(sigmoid(tape.constant(Tensor::scalar(0.0))).value()[0], 0.5);
    EXPECT_EQ(mean(x).value()[0], -0.5);
}

TEST(Ops, Conv2dByHand) {
    Tape tape;
    // 1 image, 1 channel, 3x3 input; one 2x2 kernel of ones, stride 1.
    Var x = tape.constant(Tensor({1, 1, 3, 3}, {1, 2, 3, 4, 5, 6, 7, 8, 9}));
    Var k = tape.constant(Tensor({1, 1, 2, 2}, 1.0));
    Var b = tape.constant(Tensor({1}, {0.5}));
    const Tensor y = conv2d(x, k, b, 1).value();
    EXPECT_EQ(y.shape(), (Shape{1, 1, 2, 2}));
    EXPECT_EQ(y[0], 12.5);
    EXPECT_EQ(y[3], 28.5);
    EXPECT_EQ(conv_output_extent(40, 3, 2), 19u);
    EXPECT_EQ(conv_output_extent(19, 3, 2), 9u);
}

TEST(Ops, SigmoidStaysInOpenInterval) {
    Tape tape;
    const Tensor y = sigmoid(tape.constant(Tensor({4}, {-700.0, -30.0, 30.0, 700.0}))).value();
    EXPECT_TRUE(y.all_finite());
    EXPECT_GE(y[0], 0.0);
    EXPECT_GT(y[1], 0.0);
    EXPECT_LT(y[2], 1.0);
    EXPECT_LE(y[3], 1.0);
}

TEST(Ops, ReparameterizeCases) {
    Tape tape;
    Var mu = tape.constant(Tensor({1, 2}, {0.3, -1.2}));
    Var lv0 = tape.constant(Tensor({1, 2}, 0.0));
    const Tensor z0 = reparameterize(mu, tape.constant(Tensor({1, 2}, {0.7, -3.0})), Tensor({1, 2}, 0.0)).value();
    EXPECT_EQ(z0[0], 0.3);
    EXPECT_EQ(z0[1], -1.2);
    const Tensor z1 = reparameterize(mu, lv0, Tensor({1, 2}, 1.0)).value();
    EXPECT_EQ(z1[0], 1.3);
    EXPECT_EQ(z1[1], -1.2 + 1.0);
}

TEST(Ops, KlByHand) {
    Tape tape;
    EXPECT_DOUBLE_EQ(gaussian_kl(tape.constant(Tensor({1, 2}, {1.0, 0.0})), tape.constant(Tensor({1, 2}, 0.0))).value()[0],
                     0.5);
    EXPECT_EQ(gaussian_kl(tape.constant(Tensor({3, 2}, 0.0)), tape.constant(Tensor({3, 2}, 0.0))).value()[0], 0.0);
}

TEST(OpsProperty, KlIsNonNegative) {
    Rng rng(20);
    for (int trial = 0; trial < 500; ++trial) {
        Tape tape;
        const double kl = gaussian_kl(tape.constant(testing::random_tensor(rng, {3, 2}, -5.0, 5.0)),
                                      tape.constant(testing::random_tensor(rng, {3, 2}, -8.0, 8.0)))
                              .value()[0];
        EXPECT_GE(kl, 0.0);
    }
}

TEST(OpsProperty, KlMatchesMonteCarlo) {
    Rng pick(21);
    for (int pair = 0; pair < 10; ++pair) {
        const double mu = pick.uniform(-2.0, 2.0);
        const double lv = pick.uniform(-2.0, 1.5);
        Tape tape;
        const double closed = gaussian_kl(tape.constant(Tensor({1, 1}, {mu})), tape.constant(Tensor({1, 1}, {lv})))
                                  .value()[0];
        // E_q[log q(z) - log p(z)] with z ~ q = N(mu, e^lv).
        Rng rng(1000 + static_cast<std::uint64_t>(pair));
        const double sd = std::exp(0.5 * lv);
        constexpr int n = 1'000'000;
        double s = 0.0, s2 = 0.0;
        for (int i = 0; i < n; ++i) {
            const double eps = rng.normal();
            const double z = mu + sd * eps;
            const double term = (-0.5 * lv - 0.5 * eps * eps) - (-0.5 * z * z);
            s += term;
            s2 += term * term;
        }
        const double mc = s / n;
        const double se = std::sqrt((s2 / n - mc * mc) / n);
        EXPECT_LE(std::abs(closed - mc), 3.0 * se) << "mu=" << mu << " logvar=" << lv;
    }
}

class GradientAudit : public ::testing::TestWithParam<std::uint64_t> {};

TEST_P(GradientAudit, Elementwise) {
    const std::uint64_t seed = GetParam();
    Rng rng(seed);
    const Shape shape{3, 4};
    const auto a = testing::away_from_zero(rng, shape);
    const auto b = testing::away_from_zero(rng, shape);
    struct Case {
        const char* name;
        testing::LossBuilder build;
    };
    const std::vector<Case> cases{
        {"add", [&](Tape& t, auto v) { return weighted_sum(t, add(v[0], v[1]), seed); }},
        {"sub", [&](Tape& t, auto v) { return weighted_sum(t, sub(v[0], v[1]), seed); }},
        {"mul", [&](Tape& t, auto v) { return weighted_sum(t, mul(v[0], v[1]), seed); }},
        {"scale", [&](Tape& t, auto v) { return weighted_sum(t, scale(v[0], -1.7), seed); }},
        {"exp", [&](Tape& t, auto v) { return weighted_sum(t, exp(v[0]), seed); }},
        {"relu", [&](Tape& t, auto v) { return weighted_sum(t, relu(v[0]), seed); }},
        {"sigmoid", [&](Tape& t, auto v) { return weighted_sum(t, sigmoid(scale(v[0], 3.0)), seed); }},
        {"mean", [&](Tape&, auto v) { return mean(mul(v[0], v[1])); }},
        {"reshape", [&](Tape& t, auto v) { return weighted_sum(t, reshape(mul(v[0], v[1]), {2, 6}), seed); }},
        {"mse", [&](Tape&, auto v) { return mse(v[0], v[1]); }},
    };
    for (const auto& c : cases) {
        const auto r = check_input_gradients(c.build, {a, b});
        EXPECT_LT(r.max_rel_error, kTol) << c.name << " seed " << seed;
    }
}

TEST_P(GradientAudit, Dense) {
    const std::uint64_t seed = GetParam();
    Rng rng(seed);
    const auto r = check_input_gradients(
        [&](Tape& t, auto v) { return weighted_sum(t, dense(v[0], v[1], v[2]), seed); },
        {testing::random_tensor(rng, {4, 5}), testing::random_tensor(rng, {3, 5}), testing::random_tensor(rng, {3})});
    EXPECT_LT(r.max_rel_error, kTol);
}

TEST_P(GradientAudit, Conv2d) {
    const std::uint64_t seed = GetParam();
    Rng rng(seed);
    const std::size_t stride = 1 + seed % 2;
    const auto r = check_input_gradients(
        [&](Tape& t, auto v) { return weighted_sum(t, conv2d(v[0], v[1], v[2], stride), seed); },
        {testing::random_tensor(rng, {2, 2, 7, 6}), testing::random_tensor(rng, {3, 2, 3, 3}),
         testing::random_tensor(rng, {3})});
    EXPECT_LT(r.max_rel_error, kTol);
}

TEST_P(GradientAudit, ReparameterizeAndKl) {
    const std::uint64_t seed = GetParam();
    Rng rng(seed);
    const Tensor eps = testing::random_tensor(rng, {4, 2}, -2.0, 2.0);
    const auto r1 = check_input_gradients(
        [&](Tape& t, auto v) { return weighted_sum(t, reparameterize(v[0], v[1], eps), seed); },
        {testing::random_tensor(rng, {4, 2}), testing::random_tensor(rng, {4, 2}, -2.0, 1.0)});
    EXPECT_LT(r1.max_rel_error, kTol);
    const auto r2 = check_input_gradients([](Tape&, auto v) { return gaussian_kl(v[0], v[1]); },
                                          {testing::random_tensor(rng, {4, 2}), testing::random_tensor(rng, {4, 2}, -2.0, 1.0)});
    EXPECT_LT(r2.max_rel_error, kTol);
}

INSTANTIATE_TEST_SUITE_P(TwentySeeds, GradientAudit, ::testing::Range<std::uint64_t>(1, 21));

}  // namespace
}  // namespace rpvae::nn

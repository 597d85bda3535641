#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "rpvae/classifier.hpp"
#include "rpvae/rng.hpp"

namespace rpvae::classifier {
namespace {

struct Toy {
    std::vector<Point> points;
    std::vector<int> labels;
};

// Two Gaussian blobs; `overlap` controls how often they interleave.
Toy blobs(std::uint64_t seed, std::size_t n, double spread) {
    Rng rng(seed);
    Toy t;
    for (std::size_t i = 0; i < n; ++i) {
        const int y = (i % 2 == 0) ? -1 : 1;
        t.points.push_back({y * 1.0 + spread * rng.normal(), 0.5 * y + spread * rng.normal()});
        t.labels.push_back(y);
    }
    return t;
}

TEST(FitSvm, SeparatesTwoPoints) {
    const std::vector<Point> pts{{-1.0, 0.0}, {1.0, 0.0}};
    const std::vector<int> y{-1, 1};
    const auto m = fit_svm(pts, y, {1.0, 2000, 3});
    EXPECT_EQ(predict(m, pts[0]), -1);
    EXPECT_EQ(predict(m, pts[1]), 1);
}

TEST(FitSvm, RejectsBadInput) {
    const std::vector<Point> pts{{0.0, 0.0}, {1.0, 1.0}};
    EXPECT_THROW(fit_svm(pts, std::vector<int>{1, 1}, {}), std::invalid_argument);
    EXPECT_THROW(fit_svm(pts, std::vector<int>{1, 0}, {}), std::invalid_argument);
    EXPECT_THROW(fit_svm(pts, std::vector<int>{-1, 1}, {0.0, 10, 0}), std::invalid_argument);
}

TEST(FitSvm, SameSeedSameModel) {
    const auto t = blobs(4, 50, 0.8);
    const auto a = fit_svm(t.points, t.labels, {1.0, 200, 5});
    const auto b = fit_svm(t.points, t.labels, {1.0, 200, 5});
    EXPECT_EQ(a.w, b.w);
    EXPECT_EQ(a.b, b.b);
}

TEST(FitSvmProperty, ObjectiveNearGridOptimum) {
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        const auto t = blobs(seed, 10, seed % 2 ? 0.4 : 1.2);
        const double C = seed % 3 == 0 ? 0.3 : 1.0;
        const auto m = fit_svm(t.points, t.labels, {C, 10000, seed});
        const double fitted = svm_objective(m, t.points, t.labels);
        const double grid = testing::grid_svm_minimum(t.points, t.labels, C);
        EXPECT_LE(std::abs(fitted - grid), 0.01 * grid) << "seed " << seed << " fitted " << fitted << " grid " << grid;
    }
}

TEST(FitSvmProperty, BestObjectiveIsMonotone) {
    const auto t = blobs(6, 80, 1.0);
    FitTrace trace;
    fit_svm(t.points, t.labels, {1.0, 300, 1}, &trace);
    ASSERT_EQ(trace.best_objective.size(), 300u);
    for (std::size_t i = 1; i < trace.best_objective.size(); ++i) {
        EXPECT_LE(trace.best_objective[i], trace.best_objective[i - 1]);
        EXPECT_LE(trace.best_objective[i], trace.objective[i]);
    }
}

TEST(Predict, SignAndTieRule) {
    LinearSvm m{{1.0, 0.0}, 0.0, 1.0};
    EXPECT_EQ(predict(m, std::vector<double>{2.0, 3.0}), 1);
    EXPECT_EQ(predict(m, std::vector<double>{0.0, 0.0}), 1);
    EXPECT_EQ(predict(m, std::vector<double>{-0.5, 9.0}), -1);
}

TEST(PredictProperty, PositiveScalingKeepsSigns) {
    Rng rng(8);
    for (int trial = 0; trial < 100; ++trial) {
        LinearSvm m{{rng.uniform(-3, 3), rng.uniform(-3, 3)}, rng.uniform(-3, 3), 1.0};
        const double c = std::pow(10.0, rng.uniform(-3, 3));
        LinearSvm s{{c * m.w[0], c * m.w[1]}, c * m.b, 1.0};
        for (int k = 0; k < 50; ++k) {
            const std::vector<double> x{rng.uniform(-5, 5), rng.uniform(-5, 5)};
            EXPECT_EQ(predict(m, x), predict(s, x));
        }
    }
}

TEST(Evaluate, PerfectAndFlipped) {
    const auto t = blobs(9, 60, 1.0);
    const auto m = fit_svm(t.points, t.labels, {1.0, 500, 2});
    const auto r = evaluate(m, t.points, t.labels);
    std::vector<int> flipped(t.labels);
    for (int& y : flipped) y = -y;
    EXPECT_DOUBLE_EQ(evaluate(m, t.points, flipped).accuracy, 1.0 - r.accuracy);
    EXPECT_EQ(r.count, 60u);

    const std::vector<Point> sep{{-2.0, 0.0}, {-1.0, 1.0}, {1.0, 0.0}, {2.0, -1.0}};
    const std::vector<int> ys{-1, -1, 1, 1};
    const auto perfect = evaluate(fit_svm(sep, ys, {1.0, 1000, 1}), sep, ys);
    EXPECT_EQ(perfect.accuracy, 1.0);
    EXPECT_EQ(perfect.confusion[0][1], 0u);
    EXPECT_EQ(perfect.confusion[1][0], 0u);
    EXPECT_EQ(perfect.confusion[0][0], 2u);
}

TEST(Standardizer, UsesPopulationStatistics) {
    const std::vector<Point> pts{{1.0, 5.0}, {3.0, 5.0}};
    const auto s = Standardizer::fit(pts);
    EXPECT_EQ(s.mean, (std::vector<double>{2.0, 5.0}));
    EXPECT_EQ(s.std, (std::vector<double>{1.0, 1.0}));  // constant column falls back to 1
    EXPECT_EQ(s.apply(std::vector<double>{3.0, 6.0}), (Point{1.0, 1.0}));
    EXPECT_EQ(Standardizer::identity(2).apply(std::vector<double>{3.0, 6.0}), (Point{3.0, 6.0}));
}

}  // namespace
}  // namespace rpvae::classifier

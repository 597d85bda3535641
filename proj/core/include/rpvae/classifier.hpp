#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace rpvae::classifier {

using Point = std::vector<double>;

struct LinearSvm {
    std::vector<double> w;
    double b = 0.0;
    double C = 1.0;

    double decision_value(std::span<const double> x) const;
};

struct SvmFitConfig {
    double C = 1.0;
    std::size_t epochs = 10000;
    std::uint64_t seed = 0;
};

/// Per-pass record of the primal objective; best_objective is the running minimum.
struct FitTrace {
    std::vector<double> objective;
    std::vector<double> best_objective;
};

/// Minimizes 0.5*|w|^2 + C * sum(max(0, 1 - y (w.x + b))) by stochastic
/// subgradient steps of size 1/(lambda t), lambda = 1/(C n). Each pass visits
/// the points in an order shuffled from `seed`. Labels must be -1 or +1 and
/// both classes must be present.
LinearSvm fit_svm(std::span<const Point> points, std::span<const int> labels, const SvmFitConfig& cfg,
                  FitTrace* trace = nullptr);

/// sign(w.x + b); an exact zero resolves to +1.
int predict(const LinearSvm& model, std::span<const double> x);

double svm_objective(const LinearSvm& model, std::span<const Point> points, std::span<const int> labels);
double mean_hinge_loss(const LinearSvm& model, std::span<const Point> points, std::span<const int> labels);

/// Rows are true class, columns predicted; index 0 is label -1, index 1 is +1.
using Confusion = std::array<std::array<std::size_t, 2>, 2>;

struct EvalReport {
    double accuracy = 0.0;
    Confusion confusion{};
    std::size_t count = 0;
};

EvalReport evaluate(const LinearSvm& model, std::span<const Point> points, std::span<const int> labels);

/// Per-feature affine standardization fitted on training rows only.
struct Standardizer {
    std::vector<double> mean;
    std::vector<double> std;

    static Standardizer fit(std::span<const Point> points);
    /// Identity transform of the given dimension.
    static Standardizer identity(std::size_t dim);
    Point apply(std::span<const double> x) const;
    std::vector<Point> apply(std::span<const Point> points) const;
};

}  // namespace rpvae::classifier

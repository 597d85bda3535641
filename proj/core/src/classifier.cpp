#include "rpvae/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

#include "rpvae/rng.hpp"

namespace rpvae::classifier {

namespace {

void check_inputs(std::span<const Point> points, std::span<const int> labels, const char* op) {
    if (points.size() != labels.size()) {
        throw std::invalid_argument(std::string(op) + ": " + std::to_string(points.size()) + " points but " +
                                    std::to_string(labels.size()) + " labels");
    }
    if (points.empty()) throw std::invalid_argument(std::string(op) + ": no points");
    const std::size_t dim = points.front().size();
    for (std::size_t i = 0; i < points.size(); ++i) {
        if (points[i].size() != dim) throw std::invalid_argument(std::string(op) + ": ragged feature vectors");
        if (labels[i] != -1 && labels[i] != 1) {
            throw std::invalid_argument(std::string(op) + ": labels must be -1 or +1");
        }
    }
}

double dot(std::span<const double> a, std::span<const double> b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
    return acc;
}

std::size_t class_index(int label) { return label > 0 ? 1 : 0; }

}  // namespace

double LinearSvm::decision_value(std::span<const double> x) const {
    if (x.size() != w.size()) {
        throw std::invalid_argument("svm: feature dimension " + std::to_string(x.size()) + " != model dimension " +
                                    std::to_string(w.size()));
    }
    return dot(w, x) + b;
}

int predict(const LinearSvm& model, std::span<const double> x) {
    return model.decision_value(x) >= 0.0 ? 1 : -1;
}

double mean_hinge_loss(const LinearSvm& model, std::span<const Point> points, std::span<const int> labels) {
    check_inputs(points, labels, "mean_hinge_loss");
    double acc = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i) {
        acc += std::max(0.0, 1.0 - labels[i] * model.decision_value(points[i]));
    }
    return acc / static_cast<double>(points.size());
}

double svm_objective(const LinearSvm& model, std::span<const Point> points, std::span<const int> labels) {
    check_inputs(points, labels, "svm_objective");
    double hinge = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i) {
        hinge += std::max(0.0, 1.0 - labels[i] * model.decision_value(points[i]));
    }
    return 0.5 * dot(model.w, model.w) + model.C * hinge;
}

LinearSvm fit_svm(std::span<const Point> points, std::span<const int> labels, const SvmFitConfig& cfg,
                  FitTrace* trace) {
    check_inputs(points, labels, "fit_svm");
    if (!(cfg.C > 0.0) || !std::isfinite(cfg.C)) throw std::invalid_argument("fit_svm: C must be finite and > 0");
    const bool has_neg = std::find(labels.begin(), labels.end(), -1) != labels.end();
    const bool has_pos = std::find(labels.begin(), labels.end(), 1) != labels.end();
    if (!has_neg || !has_pos) throw std::invalid_argument("fit_svm: both classes must be present");

    const std::size_t n = points.size();
    const std::size_t dim = points.front().size();
    const double lambda = 1.0 / (cfg.C * static_cast<double>(n));

    LinearSvm model;
    model.C = cfg.C;
    model.w.assign(dim, 0.0);

    Rng rng(cfg.seed);
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    double best = std::numeric_limits<double>::infinity();
    std::size_t t = 0;
    for (std::size_t pass = 0; pass < cfg.epochs; ++pass) {
        std::shuffle(order.begin(), order.end(), rng.engine());
        for (std::size_t i : order) {
            ++t;
            const double eta = 1.0 / (lambda * static_cast<double>(t));
            const double margin = labels[i] * model.decision_value(points[i]);
            const double shrink = 1.0 - eta * lambda;
            for (double& wk : model.w) wk *= shrink;
            if (margin < 1.0) {
                const double step = eta * labels[i];
                for (std::size_t k = 0; k < dim; ++k) model.w[k] += step * points[i][k];
                model.b += step;
            }
        }
        if (trace) {
            const double obj = svm_objective(model, points, labels);
            best = std::min(best, obj);
            trace->objective.push_back(obj);
            trace->best_objective.push_back(best);
        }
    }
    return model;
}

EvalReport evaluate(const LinearSvm& model, std::span<const Point> points, std::span<const int> labels) {
    check_inputs(points, labels, "evaluate");
    EvalReport report;
    report.count = points.size();
    std::size_t correct = 0;
    for (std::size_t i = 0; i < points.size(); ++i) {
        const int pred = predict(model, points[i]);
        ++report.confusion[class_index(labels[i])][class_index(pred)];
        correct += pred == labels[i] ? 1 : 0;
    }
    report.accuracy = static_cast<double>(correct) / static_cast<double>(points.size());
    return report;
}

Standardizer Standardizer::fit(std::span<const Point> points) {
    if (points.empty()) throw std::invalid_argument("Standardizer::fit: no points");
    const std::size_t dim = points.front().size();
    Standardizer s;
    s.mean.assign(dim, 0.0);
    s.std.assign(dim, 0.0);
    for (const Point& p : points) {
        if (p.size() != dim) throw std::invalid_argument("Standardizer::fit: ragged feature vectors");
        for (std::size_t k = 0; k < dim; ++k) s.mean[k] += p[k];
    }
    const double inv = 1.0 / static_cast<double>(points.size());
    for (double& m : s.mean) m *= inv;
    for (const Point& p : points) {
        for (std::size_t k = 0; k < dim; ++k) s.std[k] += (p[k] - s.mean[k]) * (p[k] - s.mean[k]);
    }
    for (double& v : s.std) {
        v = std::sqrt(v * inv);
        if (!(v > 0.0)) v = 1.0;  // constant feature: center only
    }
    return s;
}

Standardizer Standardizer::identity(std::size_t dim) {
    return Standardizer{std::vector<double>(dim, 0.0), std::vector<double>(dim, 1.0)};
}

Point Standardizer::apply(std::span<const double> x) const {
    if (x.size() != mean.size()) throw std::invalid_argument("Standardizer::apply: dimension mismatch");
    Point out(x.size());
    for (std::size_t k = 0; k < x.size(); ++k) out[k] = (x[k] - mean[k]) / std[k];
    return out;
}

std::vector<Point> Standardizer::apply(std::span<const Point> points) const {
    std::vector<Point> out;
    out.reserve(points.size());
    for (const Point& p : points) out.push_back(apply(p));
    return out;
}

}  // namespace rpvae::classifier

#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <vector>

#include "rpvae/timeseries.hpp"

namespace rpvae::recurrence {

struct EmbeddingConfig {
    std::size_t dim = 2;    // phase-space dimension m
    std::size_t delay = 1;  // tau, in samples
};

/// K delay-embedded states of dimension m, stored row-major (K x m).
class PhaseTrajectory {
public:
    PhaseTrajectory(std::size_t count, std::size_t dim, std::vector<double> coords);

    std::size_t size() const noexcept { return count_; }
    std::size_t dim() const noexcept { return dim_; }
    std::span<const double> state(std::size_t i) const { return {coords_.data() + i * dim_, dim_}; }
    std::span<const double> coords() const noexcept { return coords_; }

private:
    std::size_t count_;
    std::size_t dim_;
    std::vector<double> coords_;
};

/// Symmetric K x K matrix of pairwise state distances, row-major.
class RecurrenceMatrix {
public:
    RecurrenceMatrix(std::size_t size, std::vector<double> values);

    std::size_t size() const noexcept { return size_; }
    double operator()(std::size_t i, std::size_t j) const { return values_[i * size_ + j]; }
    std::span<const double> values() const noexcept { return values_; }

private:
    std::size_t size_;
    std::vector<double> values_;
};

struct GrayscaleImage {
    std::size_t height = 0;
    std::size_t width = 0;
    std::vector<double> pixels;  // row-major, each in [0, 1]

    GrayscaleImage() = default;
    GrayscaleImage(std::size_t h, std::size_t w) : height(h), width(w), pixels(h * w, 0.0) {}

    double& at(std::size_t r, std::size_t c) { return pixels[r * width + c]; }
    double at(std::size_t r, std::size_t c) const { return pixels[r * width + c]; }
    std::size_t size() const noexcept { return pixels.size(); }
};

/// Number of states produced for a series of length n; 0 if it is too short.
std::size_t state_count(std::size_t n, const EmbeddingConfig& cfg) noexcept;

/// state_i[d] = samples[i + d*delay]. Requires n > (m-1)*delay + 1.
PhaseTrajectory embed_phase_space(const TimeSeries& series, const EmbeddingConfig& cfg);

/// Unthresholded recurrence plot: Euclidean distance between every pair of states.
RecurrenceMatrix recurrence_matrix(const PhaseTrajectory& traj);

/// Scales by the matrix maximum so the largest distance maps to 1.0.
/// An all-zero matrix maps to an all-zero image.
GrayscaleImage to_image(const RecurrenceMatrix& matrix);

/// Binary P5 PGM, maxval 255, pixel byte = round(255 * value).
void write_pgm(const GrayscaleImage& image, const std::filesystem::path& path);
GrayscaleImage read_pgm(const std::filesystem::path& path);

/// `row,col,value` triples, one per matrix entry.
void write_matrix_csv(const RecurrenceMatrix& matrix, const std::filesystem::path& path);

}  // namespace rpvae::recurrence

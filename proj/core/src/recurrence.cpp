#include "rpvae/recurrence.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <stdexcept>
#include <string>

namespace rpvae::recurrence {

PhaseTrajectory::PhaseTrajectory(std::size_t count, std::size_t dim, std::vector<double> coords)
    : count_(count), dim_(dim), coords_(std::move(coords)) {
    if (dim_ == 0 || coords_.size() != count_ * dim_) {
        throw std::invalid_argument("PhaseTrajectory: coordinate count does not match K x m");
    }
}

RecurrenceMatrix::RecurrenceMatrix(std::size_t size, std::vector<double> values)
    : size_(size), values_(std::move(values)) {
    if (values_.size() != size_ * size_) {
        throw std::invalid_argument("RecurrenceMatrix: value count does not match K x K");
    }
}

std::size_t state_count(std::size_t n, const EmbeddingConfig& cfg) noexcept {
    if (cfg.dim == 0 || cfg.delay == 0) return 0;
    const std::size_t span = (cfg.dim - 1) * cfg.delay;
    return n > span ? n - span : 0;
}

PhaseTrajectory embed_phase_space(const TimeSeries& series, const EmbeddingConfig& cfg) {
    if (cfg.dim < 1 || cfg.delay < 1) {
        throw std::invalid_argument("embed_phase_space: dim and delay must be >= 1");
    }
    const std::size_t n = series.size();
    const std::size_t count = state_count(n, cfg);
    if (count < 2) {
        throw std::invalid_argument("embed_phase_space: series of length " + std::to_string(n) +
                                    " is too short for m=" + std::to_string(cfg.dim) +
                                    ", tau=" + std::to_string(cfg.delay));
    }
    std::vector<double> coords(count * cfg.dim);
    for (std::size_t i = 0; i < count; ++i) {
        for (std::size_t d = 0; d < cfg.dim; ++d) {
            coords[i * cfg.dim + d] = series.samples[i + d * cfg.delay];
        }
    }
    return PhaseTrajectory(count, cfg.dim, std::move(coords));
}

RecurrenceMatrix recurrence_matrix(const PhaseTrajectory& traj) {
    const std::size_t k = traj.size();
    const std::size_t m = traj.dim();
    const double* s = traj.coords().data();
    std::vector<double> values(k * k, 0.0);
    // Upper triangle only; (a-b)^2 == (b-a)^2 exactly, so mirroring is lossless.
    for (std::size_t i = 0; i < k; ++i) {
        const double* si = s + i * m;
        for (std::size_t j = i + 1; j < k; ++j) {
            const double* sj = s + j * m;
            double acc = 0.0;
            for (std::size_t d = 0; d < m; ++d) {
                const double diff = si[d] - sj[d];
                acc += diff * diff;
            }
            const double dist = std::sqrt(acc);
            values[i * k + j] = dist;
            values[j * k + i] = dist;
        }
    }
    return RecurrenceMatrix(k, std::move(values));
}

GrayscaleImage to_image(const RecurrenceMatrix& matrix) {
    const std::size_t k = matrix.size();
    GrayscaleImage img(k, k);
    const auto values = matrix.values();
    const double peak = values.empty() ? 0.0 : *std::max_element(values.begin(), values.end());
    if (peak > 0.0) {
        std::transform(values.begin(), values.end(), img.pixels.begin(),
                       [peak](double v) { return v / peak; });
    }
    return img;
}

void write_pgm(const GrayscaleImage& image, const std::filesystem::path& path) {
    if (image.height == 0 || image.width == 0 || image.pixels.size() != image.height * image.width) {
        throw std::invalid_argument("write_pgm: malformed image for " + path.string());
    }
    std::string bytes;
    bytes.reserve(image.pixels.size());
    for (double v : image.pixels) {
        if (!(v >= 0.0 && v <= 1.0)) {
            throw std::invalid_argument("write_pgm: pixel outside [0,1] in " + path.string());
        }
        bytes.push_back(static_cast<char>(static_cast<unsigned char>(std::lround(255.0 * v))));
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("write_pgm: cannot open " + path.string());
    out << "P5\n" << image.width << ' ' << image.height << "\n255\n";
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw std::runtime_error("write_pgm: write failed for " + path.string());
}

namespace {

// Reads one whitespace-delimited header token, skipping '#' comments.
std::string pgm_token(std::istream& in) {
    std::string tok;
    char c;
    while (in.get(c)) {
        if (c == '#') {
            std::string ignored;
            std::getline(in, ignored);
            continue;
        }
        if (std::isspace(static_cast<unsigned char>(c))) {
            if (!tok.empty()) break;
            continue;
        }
        tok.push_back(c);
    }
    return tok;
}

std::size_t parse_size(const std::string& tok, const std::filesystem::path& path) {
    std::size_t value = 0;
    const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), value);
    if (ec != std::errc() || ptr != tok.data() + tok.size()) {
        throw std::runtime_error("read_pgm: bad header field '" + tok + "' in " + path.string());
    }
    return value;
}

}  // namespace

GrayscaleImage read_pgm(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("read_pgm: cannot open " + path.string());
    if (pgm_token(in) != "P5") throw std::runtime_error("read_pgm: not a P5 file: " + path.string());
    const std::size_t width = parse_size(pgm_token(in), path);
    const std::size_t height = parse_size(pgm_token(in), path);
    const std::size_t maxval = parse_size(pgm_token(in), path);
    if (width == 0 || height == 0 || maxval == 0 || maxval > 255) {
        throw std::runtime_error("read_pgm: unsupported geometry or maxval in " + path.string());
    }
    std::string bytes(width * height, '\0');
    in.read(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (in.gcount() != static_cast<std::streamsize>(bytes.size())) {
        throw std::runtime_error("read_pgm: truncated pixel data in " + path.string());
    }
    GrayscaleImage img(height, width);
    const double scale = 1.0 / static_cast<double>(maxval);
    for (std::size_t i = 0; i < bytes.size(); ++i) {
        img.pixels[i] = static_cast<double>(static_cast<unsigned char>(bytes[i])) * scale;
    }
    return img;
}

void write_matrix_csv(const RecurrenceMatrix& matrix, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_matrix_csv: cannot open " + path.string());
    out << "row,col,value\n";
    char buf[64];
    const std::size_t k = matrix.size();
    for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t j = 0; j < k; ++j) {
            const auto res = std::to_chars(buf, buf + sizeof buf, matrix(i, j), std::chars_format::general, 17);
            out << i << ',' << j << ',' << std::string_view(buf, static_cast<std::size_t>(res.ptr - buf)) << '\n';
        }
    }
    if (!out) throw std::runtime_error("write_matrix_csv: write failed for " + path.string());
}

}  // namespace rpvae::recurrence

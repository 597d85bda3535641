#pragma once

#include <bit>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <stdexcept>
#include <string>
#include <string_view>

namespace rpvae::detail {

/// Little-endian byte sink.
class ByteWriter {
public:
    void u32(std::uint32_t v) { put(v, 4); }
    void u64(std::uint64_t v) { put(v, 8); }
    void f64(double v) { put(std::bit_cast<std::uint64_t>(v), 8); }
    void raw(std::string_view s) { buf_.append(s); }
    const std::string& bytes() const { return buf_; }

    void save(const std::filesystem::path& path) const {
        std::ofstream out(path, std::ios::binary);
        if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
        out.write(buf_.data(), static_cast<std::streamsize>(buf_.size()));
        if (!out) throw std::runtime_error("write failed: " + path.string());
    }

private:
    void put(std::uint64_t v, int n) {
        for (int i = 0; i < n; ++i) buf_.push_back(static_cast<char>((v >> (8 * i)) & 0xffu));
    }
    std::string buf_;
};

/// Little-endian byte source with bounds checking; errors carry the origin path.
class ByteReader {
public:
    static ByteReader load(const std::filesystem::path& path) {
        std::ifstream in(path, std::ios::binary);
        if (!in) throw std::runtime_error("cannot open: " + path.string());
        return ByteReader(std::string(std::istreambuf_iterator<char>(in), {}), path.string());
    }

    ByteReader(std::string bytes, std::string origin) : buf_(std::move(bytes)), origin_(std::move(origin)) {}

    std::uint32_t u32() { return static_cast<std::uint32_t>(get(4)); }
    std::uint64_t u64() { return get(8); }
    double f64() { return std::bit_cast<double>(get(8)); }
    std::string_view raw(std::size_t n) {
        need(n);
        std::string_view s(buf_.data() + pos_, n);
        pos_ += n;
        return s;
    }
    bool at_end() const { return pos_ == buf_.size(); }
    [[noreturn]] void fail(const std::string& what) const { throw std::runtime_error(origin_ + ": " + what); }

private:
    void need(std::size_t n) const {
        if (buf_.size() - pos_ < n) fail("truncated file");
    }
    std::uint64_t get(int n) {
        need(static_cast<std::size_t>(n));
        std::uint64_t v = 0;
        for (int i = 0; i < n; ++i) {
            const auto byte = static_cast<unsigned char>(buf_[pos_ + static_cast<std::size_t>(i)]);
            v |= static_cast<std::uint64_t>(byte) << (8 * i);
        }
        pos_ += static_cast<std::size_t>(n);
        return v;
    }

    std::string buf_;
    std::string origin_;
    std::size_t pos_ = 0;
};

}  // namespace rpvae::detail

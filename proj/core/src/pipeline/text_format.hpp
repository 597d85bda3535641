#pragma once

#include <charconv>
#include <stdexcept>
#include <string>
#include <string_view>

namespace rpvae::pipeline {

/// 17 significant digits, which round-trips every double exactly.
inline std::string format_double(double v) {
    char buf[40];
    const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
    return std::string(buf, res.ptr);
}

inline double parse_double_exact(std::string_view text, std::string_view what) {
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || ptr != text.data() + text.size()) {
        throw std::runtime_error("cannot parse '" + std::string(text) + "' as a number in " + std::string(what));
    }
    return v;
}

}  // namespace rpvae::pipeline

#pragma once

#include <charconv>
#include <stdexcept>
#include <string>

namespace vpinn {

// shortest decimal form that round-trips to the same double
inline std::string format_shortest(double v) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

// fixed 17-significant-digit scientific form (also round-trips)
std::string format_g17(double v);

inline double parse_double(std::string_view s) {
    double v = 0.0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{}) {
        throw std::runtime_error("bad numeric literal: " + std::string(s));
    }
    return v;
}

}  // namespace vpinn

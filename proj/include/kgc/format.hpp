#pragma once

// Locale-independent shortest round-trip formatting of doubles.

#include <charconv>
#include <string>

namespace kgc {

inline void append_number(std::string& out, double value) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), value);
    out.append(buf, res.ptr);
}

inline std::string format_number(double value) {
    std::string s;
    append_number(s, value);
    return s;
}

}  // namespace kgc

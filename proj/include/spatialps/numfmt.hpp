#pragma once

#include <charconv>
#include <cstdio>
#include <string>
#include <system_error>

#include "spatialps/errors.hpp"

namespace spatialps {

// Shortest round-trip decimal form, locale-independent. All file output goes
// through these helpers so reruns are byte-identical across platforms.
inline std::string format_double(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

inline std::string format_double_fixed(double v, int precision) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::fixed, precision);
    return std::string(buf, res.ptr);
}

inline double parse_double(const std::string& s, const std::string& context) {
    double v = 0.0;
    const char* first = s.data();
    const char* last = s.data() + s.size();
    while (first != last && (*first == ' ' || *first == '\t')) ++first;
    auto res = std::from_chars(first, last, v);
    if (res.ec != std::errc{}) throw data_error("not a number: '" + s + "' (" + context + ")");
    for (const char* p = res.ptr; p != last; ++p)
        if (*p != ' ' && *p != '\t' && *p != '\r')
            throw data_error("trailing junk in number: '" + s + "' (" + context + ")");
    return v;
}

inline long parse_long(const std::string& s, const std::string& context) {
    long v = 0;
    const char* first = s.data();
    const char* last = s.data() + s.size();
    while (first != last && (*first == ' ' || *first == '\t')) ++first;
    auto res = std::from_chars(first, last, v);
    if (res.ec != std::errc{}) throw data_error("not an integer: '" + s + "' (" + context + ")");
    for (const char* p = res.ptr; p != last; ++p)
        if (*p != ' ' && *p != '\t' && *p != '\r')
            throw data_error("trailing junk in integer: '" + s + "' (" + context + ")");
    return v;
}

}  // namespace spatialps

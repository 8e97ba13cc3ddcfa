#pragma once

#include <bit>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "fekete/errors.hpp"

namespace fekete {

inline constexpr const char* library_version = "0.1.0";

/// Shortest decimal form with 17 significant digits (round-trips a double).
inline std::string float17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open for writing: " + path);
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw Error("short write: " + path);
}

namespace detail {

template <class T>
inline void append_le(std::string& buf, T v) {
    static_assert(sizeof(T) == 4 || sizeof(T) == 8);
    if constexpr (std::endian::native == std::endian::big) {
        if constexpr (sizeof(T) == 8) {
            auto u = std::bit_cast<std::uint64_t>(v);
            u = __builtin_bswap64(u);
            v = std::bit_cast<T>(u);
        } else {
            auto u = std::bit_cast<std::uint32_t>(v);
            u = __builtin_bswap32(u);
            v = std::bit_cast<T>(u);
        }
    }
    char raw[sizeof(T)];
    std::memcpy(raw, &v, sizeof(T));
    buf.append(raw, sizeof(T));
}

}  // namespace detail

/// Flat array of little-endian 64-bit floats.
inline void write_f64_le(const std::string& path, const std::vector<double>& values) {
    std::string buf;
    buf.reserve(values.size() * 8);
    for (double v : values) detail::append_le(buf, v);
    write_text_file(path, buf);
}

/// Flat array of little-endian signed 32-bit integers.
inline void write_i32_le(const std::string& path, const std::vector<std::int32_t>& values) {
    std::string buf;
    buf.reserve(values.size() * 4);
    for (std::int32_t v : values) detail::append_le(buf, v);
    write_text_file(path, buf);
}

}  // namespace fekete

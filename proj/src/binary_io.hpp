#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "idcnn/error.hpp"

// Little-endian primitives shared by the checkpoint and patch-cache formats.
namespace idcnn::detail {

inline void write_u32(std::ostream& out, std::uint32_t v) {
    const unsigned char bytes[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                                    static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
    out.write(reinterpret_cast<const char*>(bytes), 4);
}

inline void write_u64(std::ostream& out, std::uint64_t v) {
    write_u32(out, static_cast<std::uint32_t>(v));
    write_u32(out, static_cast<std::uint32_t>(v >> 32));
}

inline void write_f32(std::ostream& out, float v) { write_u32(out, std::bit_cast<std::uint32_t>(v)); }

inline void write_f64(std::ostream& out, double v) { write_u64(out, std::bit_cast<std::uint64_t>(v)); }

template <typename T>
void write_f32_array(std::ostream& out, const std::vector<T>& values) {
    for (const T v : values) write_f32(out, static_cast<float>(v));
}

inline void read_exact(std::istream& in, char* dst, std::size_t count, const char* what) {
    in.read(dst, static_cast<std::streamsize>(count));
    if (static_cast<std::size_t>(in.gcount()) != count) {
        throw DataError(std::string("truncated data while reading ") + what);
    }
}

inline std::uint32_t read_u32(std::istream& in, const char* what) {
    unsigned char b[4];
    read_exact(in, reinterpret_cast<char*>(b), 4, what);
    return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
           (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

inline std::uint64_t read_u64(std::istream& in, const char* what) {
    const std::uint64_t lo = read_u32(in, what);
    const std::uint64_t hi = read_u32(in, what);
    return lo | (hi << 32);
}

inline float read_f32(std::istream& in, const char* what) { return std::bit_cast<float>(read_u32(in, what)); }

inline double read_f64(std::istream& in, const char* what) { return std::bit_cast<double>(read_u64(in, what)); }

template <typename T>
std::vector<T> read_f32_array(std::istream& in, std::size_t count, const char* what) {
    std::vector<T> values(count);
    for (auto& v : values) v = static_cast<T>(read_f32(in, what));
    return values;
}

inline void write_tag(std::ostream& out, const char (&tag)[9]) { out.write(tag, 8); }

inline void expect_tag(std::istream& in, const char (&tag)[9], const char* what) {
    char buf[8];
    read_exact(in, buf, 8, what);
    if (std::memcmp(buf, tag, 8) != 0) throw DataError(std::string("bad magic in ") + what);
}

} // namespace idcnn::detail

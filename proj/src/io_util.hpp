#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <span>
#include <string>
#include <vector>

#include "error.hpp"

namespace tg {

// Little-endian binary IO. All on-disk formats are LE regardless of host.

inline void put_u32(std::ostream &out, uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                          static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
    out.write(reinterpret_cast<const char *>(b), 4);
}

inline void put_u64(std::ostream &out, uint64_t v) {
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
    out.write(reinterpret_cast<const char *>(b), 8);
}

inline void put_f32(std::ostream &out, float v) { put_u32(out, std::bit_cast<uint32_t>(v)); }
inline void put_f64(std::ostream &out, double v) { put_u64(out, std::bit_cast<uint64_t>(v)); }

inline bool get_u32(std::istream &in, uint32_t &v) {
    unsigned char b[4];
    if (!in.read(reinterpret_cast<char *>(b), 4)) return false;
    v = static_cast<uint32_t>(b[0]) | static_cast<uint32_t>(b[1]) << 8 |
        static_cast<uint32_t>(b[2]) << 16 | static_cast<uint32_t>(b[3]) << 24;
    return true;
}

inline bool get_u64(std::istream &in, uint64_t &v) {
    unsigned char b[8];
    if (!in.read(reinterpret_cast<char *>(b), 8)) return false;
    v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(b[i]) << (8 * i);
    return true;
}

inline bool get_f32(std::istream &in, float &v) {
    uint32_t bits;
    if (!get_u32(in, bits)) return false;
    v = std::bit_cast<float>(bits);
    return true;
}

inline bool get_f64(std::istream &in, double &v) {
    uint64_t bits;
    if (!get_u64(in, bits)) return false;
    v = std::bit_cast<double>(bits);
    return true;
}

inline void put_f32_array(std::ostream &out, std::span<const float> values) {
    if constexpr (std::endian::native == std::endian::little) {
        out.write(reinterpret_cast<const char *>(values.data()),
                  static_cast<std::streamsize>(values.size() * sizeof(float)));
    } else {
        for (float v : values) put_f32(out, v);
    }
}

inline bool get_f32_array(std::istream &in, std::span<float> values) {
    if constexpr (std::endian::native == std::endian::little) {
        return static_cast<bool>(in.read(reinterpret_cast<char *>(values.data()),
                                         static_cast<std::streamsize>(values.size() * sizeof(float))));
    } else {
        for (float &v : values)
            if (!get_f32(in, v)) return false;
        return true;
    }
}

inline std::ofstream open_output(const std::string &path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) fail(TG_ERR_IO, "cannot open for writing: " + path);
    return out;
}

inline std::ifstream open_input(const std::string &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(TG_ERR_IO, "cannot open for reading: " + path);
    return in;
}

// Reads the 4-byte magic and u32 version; reports bad magic and unsupported
// version distinctly.
inline void check_header(std::istream &in, const char magic[4], uint32_t expected_version,
                         const std::string &what) {
    char got[4] = {};
    if (!in.read(got, 4)) fail(TG_ERR_TRUNCATED, what + ": file shorter than magic");
    if (std::memcmp(got, magic, 4) != 0)
        fail(TG_ERR_BAD_MAGIC, what + ": expected magic '" + std::string(magic, 4) + "'");
    uint32_t version = 0;
    if (!get_u32(in, version)) fail(TG_ERR_TRUNCATED, what + ": file shorter than header");
    if (version != expected_version)
        fail(TG_ERR_BAD_VERSION, what + ": format version " + std::to_string(version) +
                                     " not supported (expected " +
                                     std::to_string(expected_version) + ")");
}

// Fails with trailing-data if the stream has bytes left past the declared payload.
inline void check_no_trailing(std::istream &in, const std::string &what) {
    char extra;
    if (in.read(&extra, 1)) fail(TG_ERR_TRAILING_DATA, what + ": trailing bytes after payload");
}

} // namespace tg

#pragma once

// Flat little-endian float64 files shared by result and scan outputs.

#include "evatrap/error.hpp"

#include <bit>
#include <cstring>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <span>
#include <vector>

namespace evatrap::binio {

inline std::uint64_t to_le(std::uint64_t v) {
    if constexpr (std::endian::native == std::endian::big) return __builtin_bswap64(v);
    return v;
}

inline std::vector<char> encode(std::span<const double> data) {
    std::vector<char> out(data.size() * 8);
    for (std::size_t i = 0; i < data.size(); ++i) {
        const std::uint64_t v = to_le(std::bit_cast<std::uint64_t>(data[i]));
        std::memcpy(&out[i * 8], &v, 8);
    }
    return out;
}

inline std::vector<double> decode(const char* bytes, std::size_t n) {
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        std::uint64_t v;
        std::memcpy(&v, bytes + i * 8, 8);
        out[i] = std::bit_cast<double>(to_le(v));
    }
    return out;
}

inline void write_doubles(const std::filesystem::path& path, std::span<const double> data) {
    const auto bytes = encode(data);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("short write to " + path.string());
}

inline std::vector<double> read_doubles(const std::filesystem::path& path, std::size_t expected) {
    std::ifstream in(path, std::ios::binary | std::ios::ate);
    if (!in) throw IoError("missing " + path.string());
    const auto size = static_cast<std::size_t>(in.tellg());
    if (size != expected * 8)
        throw IoError("shape mismatch: " + path.string() + " holds " + std::to_string(size) + " bytes, expected " +
                      std::to_string(expected * 8));
    in.seekg(0);
    std::vector<char> bytes(size);
    in.read(bytes.data(), static_cast<std::streamsize>(size));
    if (!in) throw IoError("short read from " + path.string());
    return decode(bytes.data(), expected);
}

}  // namespace evatrap::binio

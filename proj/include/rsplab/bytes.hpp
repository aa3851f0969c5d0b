#pragma once

#include <array>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace rsplab {

using Bytes = std::vector<std::uint8_t>;
using ByteSpan = std::span<const std::uint8_t>;

using Octet16 = std::array<std::uint8_t, 16>;
using Octet20 = std::array<std::uint8_t, 20>;
using Octet32 = std::array<std::uint8_t, 32>;
using Octet64 = std::array<std::uint8_t, 64>;
using Iccid = std::array<std::uint8_t, 10>;

struct HexError : std::runtime_error {
    explicit HexError(const std::string& what) : std::runtime_error(what) {}
};

struct Base64Error : std::runtime_error {
    explicit Base64Error(const std::string& what) : std::runtime_error(what) {}
};

/// Uppercase hex, no separators.
std::string to_hex(ByteSpan data);

/// Strict inverse of to_hex: even length, uppercase digits only.
Bytes from_hex(const std::string& hex);

std::string to_base64(ByteSpan data);

/// Strict RFC 4648 decoder: canonical padding, zero trailing bits, no whitespace.
Bytes from_base64(const std::string& text);

Bytes to_bytes(ByteSpan data);

template <std::size_t N>
std::array<std::uint8_t, N> to_array(ByteSpan data) {
    if (data.size() != N) {
        throw std::length_error("expected " + std::to_string(N) + " bytes, got " +
                                std::to_string(data.size()));
    }
    std::array<std::uint8_t, N> out{};
    std::copy(data.begin(), data.end(), out.begin());
    return out;
}

template <std::size_t N>
ByteSpan as_span(const std::array<std::uint8_t, N>& a) {
    return ByteSpan(a.data(), a.size());
}

inline ByteSpan as_span(const Bytes& b) { return ByteSpan(b.data(), b.size()); }

inline ByteSpan as_span(const std::string& s) {
    return ByteSpan(reinterpret_cast<const std::uint8_t*>(s.data()), s.size());
}

void append(Bytes& out, ByteSpan data);

}  // namespace rsplab

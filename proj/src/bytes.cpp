#include "rsplab/bytes.hpp"

namespace rsplab {

namespace {

constexpr char kHexDigits[] = "0123456789ABCDEF";
constexpr char kB64Digits[] =
    "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";

int b64_value(char c) {
    if (c >= 'A' && c <= 'Z') return c - 'A';
    if (c >= 'a' && c <= 'z') return c - 'a' + 26;
    if (c >= '0' && c <= '9') return c - '0' + 52;
    if (c == '+') return 62;
    if (c == '/') return 63;
    return -1;
}

}  // namespace

std::string to_hex(ByteSpan data) {
    std::string out;
    out.reserve(data.size() * 2);
    for (std::uint8_t b : data) {
        out.push_back(kHexDigits[b >> 4]);
        out.push_back(kHexDigits[b & 0x0F]);
    }
    return out;
}

Bytes from_hex(const std::string& hex) {
    if (hex.size() % 2 != 0) throw HexError("odd hex length");
    Bytes out;
    out.reserve(hex.size() / 2);
    auto nibble = [](char c) -> int {
        if (c >= '0' && c <= '9') return c - '0';
        if (c >= 'A' && c <= 'F') return c - 'A' + 10;
        return -1;
    };
    for (std::size_t i = 0; i < hex.size(); i += 2) {
        int hi = nibble(hex[i]);
        int lo = nibble(hex[i + 1]);
        if (hi < 0 || lo < 0) throw HexError("invalid hex digit");
        out.push_back(static_cast<std::uint8_t>((hi << 4) | lo));
    }
    return out;
}

std::string to_base64(ByteSpan data) {
    std::string out;
    out.reserve((data.size() + 2) / 3 * 4);
    std::size_t i = 0;
    while (i + 3 <= data.size()) {
        std::uint32_t v = (data[i] << 16) | (data[i + 1] << 8) | data[i + 2];
        out.push_back(kB64Digits[(v >> 18) & 0x3F]);
        out.push_back(kB64Digits[(v >> 12) & 0x3F]);
        out.push_back(kB64Digits[(v >> 6) & 0x3F]);
        out.push_back(kB64Digits[v & 0x3F]);
        i += 3;
    }
    std::size_t rest = data.size() - i;
    if (rest == 1) {
        std::uint32_t v = data[i] << 16;
        out.push_back(kB64Digits[(v >> 18) & 0x3F]);
        out.push_back(kB64Digits[(v >> 12) & 0x3F]);
        out.push_back('=');
        out.push_back('=');
    } else if (rest == 2) {
        std::uint32_t v = (data[i] << 16) | (data[i + 1] << 8);
        out.push_back(kB64Digits[(v >> 18) & 0x3F]);
        out.push_back(kB64Digits[(v >> 12) & 0x3F]);
        out.push_back(kB64Digits[(v >> 6) & 0x3F]);
        out.push_back('=');
    }
    return out;
}

Bytes from_base64(const std::string& text) {
    if (text.size() % 4 != 0) throw Base64Error("length not a multiple of 4");
    Bytes out;
    out.reserve(text.size() / 4 * 3);
    std::size_t pad = 0;
    if (!text.empty()) {
        if (text[text.size() - 1] == '=') pad++;
        if (text.size() >= 2 && text[text.size() - 2] == '=') pad++;
    }
    for (std::size_t i = 0; i < text.size(); i += 4) {
        bool last = i + 4 == text.size();
        int v[4];
        for (int k = 0; k < 4; k++) {
            char c = text[i + k];
            if (c == '=') {
                if (!last || k < 2 || (k == 2 && text[i + 3] != '='))
                    throw Base64Error("misplaced padding");
                v[k] = 0;
            } else {
                v[k] = b64_value(c);
                if (v[k] < 0) throw Base64Error("invalid character");
                if (last && pad > 0 && k >= static_cast<int>(4 - pad))
                    throw Base64Error("data after padding");
            }
        }
        std::uint32_t q = (v[0] << 18) | (v[1] << 12) | (v[2] << 6) | v[3];
        std::size_t n = last ? 3 - pad : 3;
        if (last && pad == 2 && (q & 0xFFFF) != 0) throw Base64Error("nonzero trailing bits");
        if (last && pad == 1 && (q & 0xFF) != 0) throw Base64Error("nonzero trailing bits");
        if (n >= 1) out.push_back(static_cast<std::uint8_t>((q >> 16) & 0xFF));
        if (n >= 2) out.push_back(static_cast<std::uint8_t>((q >> 8) & 0xFF));
        if (n >= 3) out.push_back(static_cast<std::uint8_t>(q & 0xFF));
    }
    return out;
}

Bytes to_bytes(ByteSpan data) { return Bytes(data.begin(), data.end()); }

void append(Bytes& out, ByteSpan data) { out.insert(out.end(), data.begin(), data.end()); }

}  // namespace rsplab

#include "rsplab/tlv.hpp"

namespace rsplab::tlv {

namespace {

struct Header {
    std::uint8_t tag;
    std::size_t length;
    std::size_t headerSize;
};

Header read_header(ByteSpan data, std::size_t pos) {
    if (pos >= data.size()) throw MalformedTlv("truncated: missing tag");
    Header h{};
    h.tag = data[pos];
    std::size_t i = pos + 1;
    if (i >= data.size()) throw MalformedTlv("truncated: missing length");
    std::uint8_t first = data[i++];
    if (first < 0x80) {
        h.length = first;
    } else {
        std::size_t n = first & 0x7F;
        if (n == 0 || n > 3) throw MalformedTlv("unsupported length form");
        if (i + n > data.size()) throw MalformedTlv("truncated: length bytes");
        std::size_t len = 0;
        for (std::size_t k = 0; k < n; k++) len = (len << 8) | data[i++];
        // Canonical: shortest form only.
        if (len < 0x80 || (n > 1 && len < (std::size_t{1} << (8 * (n - 1)))))
            throw MalformedTlv("non-minimal length");
        h.length = len;
    }
    h.headerSize = i - pos;
    if (pos + h.headerSize + h.length > data.size()) throw MalformedTlv("truncated: content");
    return h;
}

}  // namespace

Bytes encode_header(std::uint8_t tag, std::size_t length) {
    if (length > kMaxEncodeLength) throw LengthOverflow("content too large");
    Bytes out;
    out.push_back(tag);
    if (length < 0x80) {
        out.push_back(static_cast<std::uint8_t>(length));
    } else if (length <= 0xFF) {
        out.push_back(0x81);
        out.push_back(static_cast<std::uint8_t>(length));
    } else if (length <= 0xFFFF) {
        out.push_back(0x82);
        out.push_back(static_cast<std::uint8_t>(length >> 8));
        out.push_back(static_cast<std::uint8_t>(length));
    } else {
        out.push_back(0x83);
        out.push_back(static_cast<std::uint8_t>(length >> 16));
        out.push_back(static_cast<std::uint8_t>(length >> 8));
        out.push_back(static_cast<std::uint8_t>(length));
    }
    return out;
}

Bytes encode_uint(std::uint64_t value) {
    Bytes out;
    while (value > 0) {
        out.insert(out.begin(), static_cast<std::uint8_t>(value & 0xFF));
        value >>= 8;
    }
    return out;
}

std::uint64_t decode_uint(ByteSpan content) {
    if (content.size() > 8) throw MalformedTlv("integer too wide");
    if (!content.empty() && content[0] == 0) throw MalformedTlv("non-minimal integer");
    std::uint64_t v = 0;
    for (std::uint8_t b : content) v = (v << 8) | b;
    return v;
}

void Writer::field(std::uint8_t tag, ByteSpan content) {
    Bytes header = encode_header(tag, content.size());
    append(out_, header);
    append(out_, content);
}

void Writer::field_uint(std::uint8_t tag, std::uint64_t value) {
    Bytes content = encode_uint(value);
    field(tag, content);
}

void Writer::field_bool(std::uint8_t tag, bool value) {
    Bytes content{static_cast<std::uint8_t>(value ? 1 : 0)};
    field(tag, content);
}

void Writer::field_text(std::uint8_t tag, std::string_view text) {
    field(tag, ByteSpan(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

void Writer::raw(ByteSpan encoded) { append(out_, encoded); }

Bytes Writer::wrap(std::uint8_t tag, ByteSpan content) {
    Bytes out = encode_header(tag, content.size());
    append(out, content);
    return out;
}

Reader::Reader(ByteSpan data) : data_(data) {
    if (data.size() > kMaxDecodeInput) throw LengthOverflow("input above decode cap");
}

std::optional<std::uint8_t> Reader::peek() const {
    if (at_end()) return std::nullopt;
    if (pos_ >= data_.size()) throw MalformedTlv("truncated");
    return data_[pos_];
}

ByteSpan Reader::next(std::uint8_t tag) {
    Header h = read_header(data_, pos_);
    if (h.tag != tag) throw MalformedTlv("unexpected tag");
    ByteSpan content = data_.subspan(pos_ + h.headerSize, h.length);
    pos_ += h.headerSize + h.length;
    return content;
}

ByteSpan Reader::expect(std::uint8_t tag) {
    if (at_end()) throw MalformedTlv("missing mandatory field");
    return next(tag);
}

ByteSpan Reader::expect_raw(std::uint8_t tag) {
    if (at_end()) throw MalformedTlv("missing mandatory field");
    Header h = read_header(data_, pos_);
    if (h.tag != tag) throw MalformedTlv("unexpected tag");
    ByteSpan whole = data_.subspan(pos_, h.headerSize + h.length);
    pos_ += h.headerSize + h.length;
    return whole;
}

std::optional<ByteSpan> Reader::optional(std::uint8_t tag) {
    auto t = peek();
    if (!t || *t != tag) return std::nullopt;
    return next(tag);
}

std::vector<ByteSpan> Reader::repeated(std::uint8_t tag) {
    std::vector<ByteSpan> out;
    while (true) {
        auto t = peek();
        if (!t || *t != tag) break;
        out.push_back(next(tag));
    }
    return out;
}

std::uint64_t Reader::expect_uint(std::uint8_t tag) { return decode_uint(expect(tag)); }

bool Reader::expect_bool(std::uint8_t tag) {
    ByteSpan c = expect(tag);
    if (c.size() != 1 || c[0] > 1) throw MalformedTlv("invalid boolean");
    return c[0] == 1;
}

std::string Reader::expect_text(std::uint8_t tag) {
    ByteSpan c = expect(tag);
    return std::string(reinterpret_cast<const char*>(c.data()), c.size());
}

void Reader::finish() const {
    if (!at_end()) throw MalformedTlv("trailing bytes");
}

ByteSpan unwrap(std::uint8_t tag, ByteSpan data) {
    if (data.size() > kMaxDecodeInput) throw LengthOverflow("input above decode cap");
    Header h = read_header(data, 0);
    if (h.tag != tag) throw MalformedTlv("unexpected type tag");
    if (h.headerSize + h.length != data.size()) throw MalformedTlv("trailing bytes");
    return data.subspan(h.headerSize, h.length);
}

}  // namespace rsplab::tlv

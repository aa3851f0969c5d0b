#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "rsplab/bytes.hpp"

namespace rsplab::tlv {

/// Truncated input, trailing bytes, missing mandatory tag, non-canonical form.
struct MalformedTlv : std::runtime_error {
    explicit MalformedTlv(const std::string& what) : std::runtime_error(what) {}
};

/// Value too large to encode, or decode input above the 1 MiB cap.
struct LengthOverflow : std::runtime_error {
    explicit LengthOverflow(const std::string& what) : std::runtime_error(what) {}
};

constexpr std::size_t kMaxDecodeInput = 1u << 20;
constexpr std::size_t kMaxEncodeLength = 0xFFFFFF;

/// One byte tag, then a definite big-endian length: a single byte below
/// 0x80, otherwise 0x81/0x82/0x83 followed by that many length bytes in
/// minimal form.
Bytes encode_header(std::uint8_t tag, std::size_t length);

/// Minimal big-endian unsigned integer; zero encodes as empty content.
Bytes encode_uint(std::uint64_t value);
std::uint64_t decode_uint(ByteSpan content);

class Writer {
public:
    void field(std::uint8_t tag, ByteSpan content);
    void field_uint(std::uint8_t tag, std::uint64_t value);
    void field_bool(std::uint8_t tag, bool value);
    void field_text(std::uint8_t tag, std::string_view text);
    /// Appends bytes that are already a complete TLV.
    void raw(ByteSpan encoded);

    const Bytes& bytes() const { return out_; }
    Bytes take() { return std::move(out_); }

    static Bytes wrap(std::uint8_t tag, ByteSpan content);

private:
    Bytes out_;
};

/// Sequential reader over the concatenated fields of one struct body.
/// Fields must be consumed in declared order; finish() rejects leftovers.
class Reader {
public:
    explicit Reader(ByteSpan data);

    bool at_end() const { return pos_ == data_.size(); }
    /// Tag of the next field, or nullopt at end.
    std::optional<std::uint8_t> peek() const;

    ByteSpan expect(std::uint8_t tag);
    /// Like expect, but yields the complete TLV including its header, for
    /// containers holding a sequence of fully tagged values.
    ByteSpan expect_raw(std::uint8_t tag);
    std::optional<ByteSpan> optional(std::uint8_t tag);
    std::vector<ByteSpan> repeated(std::uint8_t tag);

    std::uint64_t expect_uint(std::uint8_t tag);
    bool expect_bool(std::uint8_t tag);
    std::string expect_text(std::uint8_t tag);

    void finish() const;

private:
    ByteSpan next(std::uint8_t tag);

    ByteSpan data_;
    std::size_t pos_ = 0;
};

/// Unwraps `data` as a single TLV with the given tag; rejects trailing bytes.
ByteSpan unwrap(std::uint8_t tag, ByteSpan data);

}  // namespace rsplab::tlv

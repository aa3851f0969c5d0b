#pragma once

#include <map>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "rsplab/bytes.hpp"

namespace rsplab::wire {

/// Missing protocol header, invalid base64, invalid JSON, bad framing.
struct BadEnvelope : std::runtime_error {
    explicit BadEnvelope(const std::string& what) : std::runtime_error(what) {}
};

inline constexpr const char* kAdminProtocol = "gsma/rsp/v2.5.0";
inline constexpr const char* kContentTypeJson = "application/json;charset=UTF-8";
inline constexpr const char* kContentTypeTlv = "application/x-rsptlv";

/// HTTP-shaped frame: request line (or status line), a fixed header set and
/// a body. Every byte is load-bearing: receivers reject unknown headers,
/// wrong protocol versions and length mismatches, so a one-byte tamper never
/// passes unnoticed.
struct Envelope {
    enum class Kind { request, response };

    Kind kind = Kind::request;
    std::string endpoint;                        // requests only
    std::map<std::string, std::string> headers;  // lowercased names
    Bytes body;

    bool is_json() const;
    bool is_tlv() const;
    nlohmann::json body_json() const;

    Bytes encode() const;
    static Envelope decode(ByteSpan data);
};

Envelope make_request(const std::string& endpoint, const nlohmann::json& body);
Envelope make_request_tlv(const std::string& endpoint, Bytes bodyTlv);
Envelope make_response(const nlohmann::json& body);
Envelope make_response_tlv(Bytes bodyTlv);

/// Canonical JSON rendering used for every body: sorted keys, no spaces.
std::string dump_json(const nlohmann::json& j);

}  // namespace rsplab::wire

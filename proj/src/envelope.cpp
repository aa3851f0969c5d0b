#include "rsplab/envelope.hpp"

#include <algorithm>

namespace rsplab::wire {

namespace {

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

const std::array<const char*, 3> kAllowedHeaders = {"x-admin-protocol", "content-type",
                                                    "content-length"};

void check_headers(const std::map<std::string, std::string>& headers, std::size_t bodySize) {
    for (const auto& [name, value] : headers) {
        if (std::find(kAllowedHeaders.begin(), kAllowedHeaders.end(), name) ==
            kAllowedHeaders.end()) {
            throw BadEnvelope("unknown header " + name);
        }
        (void)value;
    }
    auto proto = headers.find("x-admin-protocol");
    if (proto == headers.end()) throw BadEnvelope("missing X-Admin-Protocol header");
    if (proto->second != kAdminProtocol) throw BadEnvelope("unsupported protocol version");
    auto ctype = headers.find("content-type");
    if (ctype == headers.end()) throw BadEnvelope("missing Content-Type header");
    if (ctype->second != kContentTypeJson && ctype->second != kContentTypeTlv) {
        throw BadEnvelope("unsupported content type");
    }
    auto clen = headers.find("content-length");
    if (clen == headers.end()) throw BadEnvelope("missing Content-Length header");
    const std::string& lenText = clen->second;
    if (lenText.empty() || lenText.size() > 9 ||
        !std::all_of(lenText.begin(), lenText.end(),
                     [](char c) { return c >= '0' && c <= '9'; })) {
        throw BadEnvelope("bad Content-Length value");
    }
    if (std::stoul(lenText) != bodySize) throw BadEnvelope("Content-Length mismatch");
}

}  // namespace

bool Envelope::is_json() const {
    auto it = headers.find("content-type");
    return it != headers.end() && it->second == kContentTypeJson;
}

bool Envelope::is_tlv() const {
    auto it = headers.find("content-type");
    return it != headers.end() && it->second == kContentTypeTlv;
}

nlohmann::json Envelope::body_json() const {
    if (!is_json()) throw BadEnvelope("body is not JSON");
    nlohmann::json j = nlohmann::json::parse(body.begin(), body.end(), nullptr, false);
    if (j.is_discarded()) throw BadEnvelope("invalid JSON body");
    return j;
}

Bytes Envelope::encode() const {
    std::string head;
    if (kind == Kind::request) {
        if (endpoint.empty() || endpoint[0] != '/') throw BadEnvelope("bad endpoint");
        head = "POST " + endpoint + " HTTP/1.1\r\n";
    } else {
        head = "HTTP/1.1 200 OK\r\n";
    }
    auto ctype = headers.find("content-type");
    std::string contentType = ctype == headers.end() ? kContentTypeJson : ctype->second;
    head += std::string("X-Admin-Protocol: ") + kAdminProtocol + "\r\n";
    head += "Content-Type: " + contentType + "\r\n";
    head += "Content-Length: " + std::to_string(body.size()) + "\r\n\r\n";
    Bytes out(head.begin(), head.end());
    append(out, body);
    return out;
}

Envelope Envelope::decode(ByteSpan data) {
    std::string text(reinterpret_cast<const char*>(data.data()), data.size());
    std::size_t headerEnd = text.find("\r\n\r\n");
    if (headerEnd == std::string::npos) throw BadEnvelope("missing header terminator");

    std::vector<std::string> lines;
    std::size_t pos = 0;
    while (pos < headerEnd) {
        std::size_t eol = text.find("\r\n", pos);
        if (eol == std::string::npos || eol > headerEnd) eol = headerEnd;
        lines.push_back(text.substr(pos, eol - pos));
        pos = eol + 2;
    }
    if (lines.empty()) throw BadEnvelope("empty envelope");

    Envelope env;
    const std::string& start = lines[0];
    if (start.rfind("POST ", 0) == 0) {
        env.kind = Kind::request;
        std::size_t sp = start.rfind(' ');
        if (sp == std::string::npos || start.substr(sp + 1) != "HTTP/1.1") {
            throw BadEnvelope("bad request line");
        }
        env.endpoint = start.substr(5, sp - 5);
        if (env.endpoint.empty() || env.endpoint[0] != '/') throw BadEnvelope("bad endpoint");
    } else if (start == "HTTP/1.1 200 OK") {
        env.kind = Kind::response;
    } else {
        throw BadEnvelope("bad start line");
    }

    for (std::size_t i = 1; i < lines.size(); i++) {
        const std::string& line = lines[i];
        std::size_t colon = line.find(": ");
        if (colon == std::string::npos) throw BadEnvelope("bad header line");
        std::string name = lower(line.substr(0, colon));
        std::string value = line.substr(colon + 2);
        if (env.headers.contains(name)) throw BadEnvelope("duplicate header " + name);
        env.headers[name] = value;
    }

    env.body.assign(data.begin() + headerEnd + 4, data.end());
    check_headers(env.headers, env.body.size());
    return env;
}

std::string dump_json(const nlohmann::json& j) { return j.dump(); }

namespace {

Envelope build(Envelope::Kind kind, std::string endpoint, const std::string& contentType,
               Bytes body) {
    Envelope env;
    env.kind = kind;
    env.endpoint = std::move(endpoint);
    env.headers["x-admin-protocol"] = kAdminProtocol;
    env.headers["content-type"] = contentType;
    env.headers["content-length"] = std::to_string(body.size());
    env.body = std::move(body);
    return env;
}

}  // namespace

Envelope make_request(const std::string& endpoint, const nlohmann::json& body) {
    std::string text = dump_json(body);
    return build(Envelope::Kind::request, endpoint, kContentTypeJson,
                 Bytes(text.begin(), text.end()));
}

Envelope make_request_tlv(const std::string& endpoint, Bytes bodyTlv) {
    return build(Envelope::Kind::request, endpoint, kContentTypeTlv, std::move(bodyTlv));
}

Envelope make_response(const nlohmann::json& body) {
    std::string text = dump_json(body);
    return build(Envelope::Kind::response, "", kContentTypeJson, Bytes(text.begin(), text.end()));
}

Envelope make_response_tlv(Bytes bodyTlv) {
    return build(Envelope::Kind::response, "", kContentTypeTlv, std::move(bodyTlv));
}

}  // namespace rsplab::wire

#include "rsplab/harness.hpp"

#include <fstream>

namespace rsplab::sim {

bool glob_match(const std::string& pattern, const std::string& text) {
    // Iterative '*' matcher; no other metacharacters.
    std::size_t p = 0, t = 0, star = std::string::npos, mark = 0;
    while (t < text.size()) {
        if (p < pattern.size() && (pattern[p] == text[t])) {
            p++;
            t++;
        } else if (p < pattern.size() && pattern[p] == '*') {
            star = p++;
            mark = t;
        } else if (star != std::string::npos) {
            p = star + 1;
            t = ++mark;
        } else {
            return false;
        }
    }
    while (p < pattern.size() && pattern[p] == '*') p++;
    return p == pattern.size();
}

nlohmann::json TranscriptEntry::to_json() const {
    nlohmann::json j;
    j["seq"] = seq;
    j["direction"] = direction;
    j["endpoint"] = endpoint;
    j["envelope"] = to_base64(envelopeBytes);
    if (decoded) j["decoded"] = *decoded;
    if (faultApplied) j["fault"] = *faultApplied;
    return j;
}

Transport::Transport(std::shared_ptr<Clock> clock) : clock_(std::move(clock)) {}

void Transport::route(const std::string& address, Actor* actor) { routes_[address] = actor; }

int Transport::add_fault(FaultRule rule) {
    rule.id = nextFaultId_++;
    faults_.push_back(std::move(rule));
    return faults_.back().id;
}

void Transport::clear_faults() { faults_.clear(); }

void Transport::transcribe(const char* direction, const std::string& key, const Bytes& bytes,
                           std::optional<int> faultId) {
    TranscriptEntry e;
    e.seq = transcript_.size();
    e.direction = direction;
    e.endpoint = key;
    e.envelopeBytes = bytes;
    if (!bytes.empty()) {
        try {
            wire::Envelope env = wire::Envelope::decode(bytes);
            if (env.is_json()) e.decoded = env.body_json();
        } catch (const std::exception&) {
            // leave decoded unset for unparseable (e.g. tampered) envelopes
        }
    }
    e.faultApplied = faultId;
    transcript_.push_back(std::move(e));
}

Bytes Transport::apply_faults(const std::string& key, const char* direction, Bytes bytes) {
    for (FaultRule& rule : faults_) {
        if (rule.direction != "any" && rule.direction != direction) continue;
        if (!glob_match(rule.endpointGlob, key)) continue;
        std::uint64_t index = rule.seen++;
        if (rule.fired || index != rule.occurrence) continue;
        rule.fired = true;

        switch (rule.action.type) {
            case FaultAction::Type::drop:
                transcribe(direction, key, bytes, rule.id);
                throw Dropped("message dropped by fault rule " + std::to_string(rule.id));
            case FaultAction::Type::tamperByte: {
                transcribe(direction, key, bytes, std::nullopt);
                if (rule.action.bodyOnly) {
                    try {
                        wire::Envelope env = wire::Envelope::decode(bytes);
                        if (!env.body.empty()) {
                            std::size_t off = rule.action.offset % env.body.size();
                            env.body[off] ^= static_cast<std::uint8_t>(1u << (off & 7));
                            bytes = env.encode();
                        }
                    } catch (const std::exception&) {
                        // unparseable frames keep their raw-offset behavior
                        std::size_t off = bytes.empty() ? 0 : rule.action.offset % bytes.size();
                        if (!bytes.empty())
                            bytes[off] ^= static_cast<std::uint8_t>(1u << (off & 7));
                    }
                } else if (!bytes.empty()) {
                    std::size_t off = rule.action.offset % bytes.size();
                    bytes[off] ^= static_cast<std::uint8_t>(1u << (off & 7));
                }
                transcribe(direction, key, bytes, rule.id);
                break;
            }
            case FaultAction::Type::swapField: {
                transcribe(direction, key, bytes, std::nullopt);
                try {
                    wire::Envelope env = wire::Envelope::decode(bytes);
                    nlohmann::json body = env.body_json();
                    if (!rule.action.fieldText.empty()) {
                        body[rule.action.fieldName] = rule.action.fieldText;
                    } else {
                        body[rule.action.fieldName] = to_base64(rule.action.fieldValue);
                    }
                    std::string text = wire::dump_json(body);
                    env.body.assign(text.begin(), text.end());
                    env.headers["content-length"] = std::to_string(env.body.size());
                    bytes = env.encode();
                } catch (const std::exception&) {
                    // non-JSON bodies are left untouched
                }
                transcribe(direction, key, bytes, rule.id);
                break;
            }
            case FaultAction::Type::delayLogical:
                clock_->now += static_cast<std::int64_t>(rule.action.amount);
                transcribe(direction, key, bytes, rule.id);
                break;
            case FaultAction::Type::expireCert:
                if (expireHook_) expireHook_(rule.action.serial);
                transcribe(direction, key, bytes, rule.id);
                break;
            case FaultAction::Type::revoke:
                if (revokeHook_) revokeHook_(rule.action.serial);
                transcribe(direction, key, bytes, rule.id);
                break;
        }
        return bytes;
    }
    transcribe(direction, key, bytes, std::nullopt);
    return bytes;
}

Bytes Transport::send(const std::string& toAddress, const Bytes& requestEnvelope) {
    std::string path;
    try {
        wire::Envelope env = wire::Envelope::decode(requestEnvelope);
        path = env.endpoint;
    } catch (const std::exception&) {
        path = "/?";
    }
    std::string key = toAddress + path;

    Bytes delivered = apply_faults(key, "request", requestEnvelope);

    auto it = routes_.find(toAddress);
    if (it == routes_.end()) throw Unroutable("no route to " + toAddress);
    Bytes response = it->second->handle(delivered);

    return apply_faults(key, "response", std::move(response));
}

void Transport::mark(const std::string& label) { transcribe("marker", label, {}, std::nullopt); }

void Transport::write_transcript(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoFailure("cannot open " + path);
    for (const auto& entry : transcript_) {
        out << entry.to_json().dump() << "\n";
    }
    if (!out) throw IoFailure("write failed for " + path);
}

std::optional<std::uint64_t> Transport::verify_transcript(const std::string& path,
                                                          const std::string& goldenPath) {
    std::ifstream a(path, std::ios::binary);
    if (!a) throw IoFailure("cannot open " + path);
    std::ifstream b(goldenPath, std::ios::binary);
    if (!b) throw IoFailure("cannot open " + goldenPath);

    std::string lineA, lineB;
    std::uint64_t seq = 0;
    while (true) {
        bool gotA = static_cast<bool>(std::getline(a, lineA));
        bool gotB = static_cast<bool>(std::getline(b, lineB));
        if (!gotA && !gotB) return std::nullopt;
        if (gotA != gotB || lineA != lineB) return seq;
        seq++;
    }
}

}  // namespace rsplab::sim

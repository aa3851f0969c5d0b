#pragma once

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "rsplab/envelope.hpp"

namespace rsplab::sim {

/// Logical time. Advances only when a test or fault says so.
struct Clock {
    std::int64_t now = 0;
};

class Actor {
public:
    virtual ~Actor() = default;
    virtual Bytes handle(const Bytes& requestEnvelope) = 0;
};

struct FaultAction {
    enum class Type { drop, tamperByte, swapField, delayLogical, expireCert, revoke };

    Type type = Type::drop;
    std::uint64_t offset = 0;   // tamperByte: index into the envelope bytes (mod size)
    bool bodyOnly = false;      // tamperByte: index into the body instead
    std::string fieldName;      // swapField: top-level JSON field
    Bytes fieldValue;           // swapField: replacement, rendered as base64
    std::string fieldText;      // swapField: raw string replacement (wins over fieldValue)
    std::uint64_t amount = 0;   // delayLogical: seconds to advance the clock
    std::uint64_t serial = 0;   // expireCert / revoke: certificate serial
};

struct FaultRule {
    std::string endpointGlob = "*";   // matched against "<address><path>"
    std::string direction = "any";    // request | response | any
    std::uint64_t occurrence = 0;     // fires once, on the n-th matching message
    FaultAction action;

    int id = 0;
    std::uint64_t seen = 0;
    bool fired = false;
};

struct TranscriptEntry {
    std::uint64_t seq = 0;
    std::string direction;  // request | response | marker
    std::string endpoint;   // "<address><path>" or marker label
    Bytes envelopeBytes;
    std::optional<nlohmann::json> decoded;
    std::optional<int> faultApplied;

    nlohmann::json to_json() const;
};

struct Unroutable : std::runtime_error {
    explicit Unroutable(const std::string& what) : std::runtime_error(what) {}
};

/// A drop fault consumed the message; flows surface this as a stage error.
struct Dropped : std::runtime_error {
    explicit Dropped(const std::string& what) : std::runtime_error(what) {}
};

struct IoFailure : std::runtime_error {
    explicit IoFailure(const std::string& what) : std::runtime_error(what) {}
};

/// In-process transport. Delivers envelopes to routed actors, applies fault
/// rules in declared order, and transcribes everything it touches.
class Transport {
public:
    explicit Transport(std::shared_ptr<Clock> clock);

    void route(const std::string& address, Actor* actor);
    int add_fault(FaultRule rule);
    void clear_faults();

    /// Installed by the fixture builder so revoke/expireCert faults can
    /// reach every actor's trust store.
    void set_revoke_hook(std::function<void(std::uint64_t)> hook) { revokeHook_ = std::move(hook); }
    void set_expire_hook(std::function<void(std::uint64_t)> hook) { expireHook_ = std::move(hook); }

    Bytes send(const std::string& toAddress, const Bytes& requestEnvelope);
    /// Transcript-only marker (e.g. connection-open before a fresh exchange).
    void mark(const std::string& label);

    const std::vector<TranscriptEntry>& transcript() const { return transcript_; }
    Clock& clock() { return *clock_; }

    void write_transcript(const std::string& path) const;

    /// nullopt when equal, else the seq of the first divergent line.
    static std::optional<std::uint64_t> verify_transcript(const std::string& path,
                                                          const std::string& goldenPath);

private:
    Bytes apply_faults(const std::string& key, const char* direction, Bytes bytes);
    void transcribe(const char* direction, const std::string& key, const Bytes& bytes,
                    std::optional<int> faultId);

    std::shared_ptr<Clock> clock_;
    std::map<std::string, Actor*> routes_;
    std::vector<FaultRule> faults_;
    std::vector<TranscriptEntry> transcript_;
    std::function<void(std::uint64_t)> revokeHook_;
    std::function<void(std::uint64_t)> expireHook_;
    int nextFaultId_ = 1;
};

bool glob_match(const std::string& pattern, const std::string& text);

}  // namespace rsplab::sim

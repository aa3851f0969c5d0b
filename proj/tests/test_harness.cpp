#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "rsplab/harness.hpp"
#include "rsplab/messages.hpp"

using namespace rsplab;

namespace {

/// Echo actor: returns an ok response carrying the received body size and,
/// like the real actors, answers garbage with a Failed envelope.
struct EchoActor : sim::Actor {
    Bytes handle(const Bytes& requestEnvelope) override {
        try {
            wire::Envelope env = wire::Envelope::decode(requestEnvelope);
            msg::json out = msg::ok_header();
            out["size"] = env.body.size();
            return wire::make_response(out).encode();
        } catch (const std::exception& e) {
            msg::json out = msg::failed_header();
            out["error"] = e.what();
            return wire::make_response(out).encode();
        }
    }
};

std::string temp_path(const char* name) {
    return (std::filesystem::temp_directory_path() / name).string();
}

}  // namespace

TEST_CASE("glob matching") {
    CHECK(sim::glob_match("*", "anything"));
    CHECK(sim::glob_match("*authenticateClient", "smdp.example.com/gsma/rsp2/es9plus/authenticateClient"));
    CHECK_FALSE(sim::glob_match("*authenticateClient", "smdp/x/initiateAuthentication"));
    CHECK(sim::glob_match("euicc:*/es10b/*", "euicc:dev-1/es10b/prepareDownload"));
    CHECK_FALSE(sim::glob_match("euicc:*/es10b/*", "smdp/es9/x"));
    CHECK(sim::glob_match("abc", "abc"));
    CHECK_FALSE(sim::glob_match("abc", "abd"));
}

TEST_CASE("send routes, transcribes and returns responses") {
    auto clock = std::make_shared<sim::Clock>();
    sim::Transport transport(clock);
    EchoActor actor;
    transport.route("echo", &actor);

    Bytes req = wire::make_request("/ping", msg::json{{"n", 1}}).encode();
    Bytes resp = transport.send("echo", req);
    wire::Envelope env = wire::Envelope::decode(resp);
    CHECK(env.kind == wire::Envelope::Kind::response);

    const auto& t = transport.transcript();
    REQUIRE(t.size() == 2);
    CHECK(t[0].direction == "request");
    CHECK(t[0].endpoint == "echo/ping");
    CHECK(t[1].direction == "response");
    CHECK(t[0].seq == 0);
    CHECK(t[1].seq == 1);
    CHECK(t[0].decoded.has_value());

    CHECK_THROWS_AS(transport.send("nowhere", req), sim::Unroutable);
}

TEST_CASE("tamper fault flips one byte and transcribes both versions") {
    auto clock = std::make_shared<sim::Clock>();
    sim::Transport transport(clock);
    EchoActor actor;
    transport.route("echo", &actor);

    sim::FaultRule rule;
    rule.endpointGlob = "*ping";
    rule.direction = "request";
    rule.occurrence = 0;
    rule.action.type = sim::FaultAction::Type::tamperByte;
    rule.action.offset = 2;
    transport.add_fault(rule);

    Bytes req = wire::make_request("/ping", msg::json{{"n", 1}}).encode();
    transport.send("echo", req);

    const auto& t = transport.transcript();
    REQUIRE(t.size() == 3);  // pre-fault, post-fault, response
    CHECK_FALSE(t[0].faultApplied.has_value());
    CHECK(t[1].faultApplied.has_value());
    CHECK(t[0].envelopeBytes != t[1].envelopeBytes);
    CHECK(t[0].envelopeBytes.size() == t[1].envelopeBytes.size());
}

TEST_CASE("occurrence index selects the n-th matching message only") {
    auto clock = std::make_shared<sim::Clock>();
    sim::Transport transport(clock);
    EchoActor actor;
    transport.route("echo", &actor);

    sim::FaultRule rule;
    rule.endpointGlob = "*";
    rule.direction = "request";
    rule.occurrence = 2;
    rule.action.type = sim::FaultAction::Type::drop;
    transport.add_fault(rule);

    Bytes req = wire::make_request("/ping", msg::json{{"n", 1}}).encode();
    CHECK_NOTHROW(transport.send("echo", req));
    CHECK_NOTHROW(transport.send("echo", req));
    CHECK_THROWS_AS(transport.send("echo", req), sim::Dropped);
    // Fires exactly once.
    CHECK_NOTHROW(transport.send("echo", req));
}

TEST_CASE("swapField fault replaces a JSON field") {
    auto clock = std::make_shared<sim::Clock>();
    sim::Transport transport(clock);
    EchoActor actor;
    transport.route("echo", &actor);

    sim::FaultRule rule;
    rule.endpointGlob = "*";
    rule.direction = "request";
    rule.action.type = sim::FaultAction::Type::swapField;
    rule.action.fieldName = "payload";
    rule.action.fieldValue = {9, 9, 9};
    transport.add_fault(rule);

    Bytes req = wire::make_request("/ping", msg::json{{"payload", "AAAA"}}).encode();
    transport.send("echo", req);
    const auto& t = transport.transcript();
    REQUIRE(t.size() == 3);
    wire::Envelope mutated = wire::Envelope::decode(t[1].envelopeBytes);
    CHECK(mutated.body_json().at("payload") == to_base64(Bytes{9, 9, 9}));
}

TEST_CASE("delay fault advances the logical clock") {
    auto clock = std::make_shared<sim::Clock>();
    clock->now = 100;
    sim::Transport transport(clock);
    EchoActor actor;
    transport.route("echo", &actor);

    sim::FaultRule rule;
    rule.action.type = sim::FaultAction::Type::delayLogical;
    rule.action.amount = 500;
    rule.direction = "request";
    transport.add_fault(rule);

    transport.send("echo", wire::make_request("/ping", msg::json::object()).encode());
    CHECK(clock->now == 600);
}

TEST_CASE("markers land in the transcript") {
    auto clock = std::make_shared<sim::Clock>();
    sim::Transport transport(clock);
    transport.mark("connection-open smdp.example.com");
    REQUIRE(transport.transcript().size() == 1);
    CHECK(transport.transcript()[0].direction == "marker");
    CHECK(transport.transcript()[0].endpoint == "connection-open smdp.example.com");
}

TEST_CASE("transcript files: write, verify, first divergence") {
    auto clock = std::make_shared<sim::Clock>();
    sim::Transport transport(clock);
    EchoActor actor;
    transport.route("echo", &actor);
    Bytes req = wire::make_request("/ping", msg::json{{"n", 7}}).encode();
    transport.send("echo", req);
    transport.send("echo", req);

    std::string a = temp_path("rsplab-transcript-a.jsonl");
    std::string b = temp_path("rsplab-transcript-b.jsonl");
    transport.write_transcript(a);
    transport.write_transcript(b);
    CHECK_FALSE(sim::Transport::verify_transcript(a, b).has_value());

    // Flip one byte in a copy: the divergence is reported at that line.
    std::ifstream in(a, std::ios::binary);
    std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    std::size_t secondLine = content.find('\n') + 5;
    content[secondLine] = content[secondLine] == 'x' ? 'y' : 'x';
    std::ofstream out(b, std::ios::binary);
    out << content;
    out.close();
    auto divergence = sim::Transport::verify_transcript(a, b);
    REQUIRE(divergence.has_value());
    CHECK(*divergence == 1);

    CHECK_THROWS_AS(sim::Transport::verify_transcript(a, temp_path("rsplab-none.jsonl")),
                    sim::IoFailure);
    std::filesystem::remove(a);
    std::filesystem::remove(b);
}

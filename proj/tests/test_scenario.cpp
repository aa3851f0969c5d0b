#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "fixtures.hpp"

using namespace rsplab;

namespace {

const std::string kSourceDir = RSPLAB_SOURCE_DIR;

Bytes read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in);
    return Bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

std::string temp_path(const char* name) {
    return (std::filesystem::temp_directory_path() / name).string();
}

}  // namespace

TEST_CASE("scenario parsing accepts the committed files") {
    for (const auto& entry :
         std::filesystem::directory_iterator(kSourceDir + "/scenarios")) {
        CAPTURE(entry.path().string());
        CHECK_NOTHROW(ScenarioSpec::from_file(entry.path().string()));
    }
}

TEST_CASE("scenario parsing rejects malformed input") {
    CHECK_THROWS_AS(ScenarioSpec::from_json(msg::json::array()), BadScenario);
    CHECK_THROWS_AS(ScenarioSpec::from_json({{"flow", "teleport"}}), BadScenario);
    CHECK_THROWS_AS(ScenarioSpec::from_json({{"lpa", {{"consent", "maybe"}}}}), BadScenario);
    CHECK_THROWS_AS(
        ScenarioSpec::from_json({{"orders", {{{"matchingId", "m"}, {"iccid", "123"}}}}}),
        BadScenario);
    CHECK_THROWS_AS(
        ScenarioSpec::from_json({{"faults", {{{"action", {{"type", "meteor"}}}}}}}),
        BadScenario);
}

TEST_CASE("iccid digits pack to bcd bytes") {
    Iccid iccid = iccid_from_digits("89000123456789012341");
    CHECK(iccid[0] == 0x89);
    CHECK(iccid[1] == 0x00);
    CHECK(iccid[9] == 0x41);
    CHECK_THROWS_AS(iccid_from_digits("123"), BadScenario);
    CHECK_THROWS_AS(iccid_from_digits("8900012345678901234X"), BadScenario);
}

TEST_CASE("report_matches grammar") {
    msg::TransactionId txid;
    msg::FlowReport installed = msg::FlowReport::make_installed(txid);
    CHECK(report_matches(installed, "installed"));
    CHECK_FALSE(report_matches(installed, "error"));

    msg::FlowReport cancelled =
        msg::FlowReport::make_cancelled(msg::CancelSessionReason::pprNotAllowed, txid);
    CHECK(report_matches(cancelled, "cancelled"));
    CHECK(report_matches(cancelled, "cancelled:3"));
    CHECK_FALSE(report_matches(cancelled, "cancelled:4"));

    msg::FlowReport error = msg::FlowReport::make_error("getBpp", 2, "x");
    CHECK(report_matches(error, "error"));
    CHECK(report_matches(error, "error:getBpp"));
    CHECK_FALSE(report_matches(error, "error:loadBpp"));
}

TEST_CASE("pki fixture files are deterministic and self-describing") {
    PkiFixture one = build_pki_fixture(42);
    PkiFixture two = build_pki_fixture(42);
    CHECK(one.encode() == two.encode());

    PkiFixture other = build_pki_fixture(43);
    CHECK(one.encode() != other.encode());
    // Different seeds produce different subject key ids.
    CHECK(one.certs[0].subjectKeyId != other.certs[0].subjectKeyId);

    std::string path = temp_path("rsplab-fixture.tlv");
    write_pki_fixture(one, path);
    PkiFixture back = read_pki_fixture(path);
    CHECK(back.encode() == one.encode());
    REQUIRE(back.keypairs.size() == 7);
    CHECK(back.keypairs[0].first == "ci");
    REQUIRE(back.certs.size() == 7);
    CHECK(back.certs[0].role == pki::CertRole::ci);
    REQUIRE(back.rootIds.size() == 1);
    CHECK(back.rootIds[0] == back.certs[0].subjectKeyId);
    // Every keypair actually signs under its certificate's public key.
    for (std::size_t i = 0; i < back.keypairs.size(); i++) {
        CHECK(back.keypairs[i].second.publicKey == back.certs[i].subjectPublicKey);
    }
    std::filesystem::remove(path);
}

TEST_CASE("golden vectors match the committed files byte for byte") {
    auto samples = golden_vector_samples();
    CHECK(samples.size() == 27);
    for (const auto& [name, bytes] : samples) {
        CAPTURE(name);
        std::filesystem::path path =
            std::filesystem::path(kSourceDir) / "golden" / "vectors" / (name + ".tlv");
        REQUIRE(std::filesystem::exists(path));
        CHECK(read_file(path) == bytes);
    }
}

TEST_CASE("fixed seeds reproduce byte-identical transcripts") {
    ScenarioSpec spec = ScenarioSpec::from_file(kSourceDir + "/scenarios/download_ac.json");

    std::string a = temp_path("rsplab-golden-a.jsonl");
    std::string b = temp_path("rsplab-golden-b.jsonl");
    {
        World world(spec);
        REQUIRE(world.run_flow().outcome == msg::FlowReport::Outcome::installed);
        world.transport->write_transcript(a);
    }
    {
        World world(spec);
        REQUIRE(world.run_flow().outcome == msg::FlowReport::Outcome::installed);
        world.transport->write_transcript(b);
    }
    CHECK_FALSE(sim::Transport::verify_transcript(a, b).has_value());

    // And they match the committed golden file.
    CHECK_FALSE(sim::Transport::verify_transcript(
                    a, kSourceDir + "/golden/transcripts/download_ac.jsonl")
                    .has_value());

    // A different seed diverges at the very first challenge-bearing message.
    ScenarioSpec reseeded = spec;
    reseeded.seed = 8;
    {
        World world(reseeded);
        world.run_flow();
        world.transport->write_transcript(b);
    }
    auto divergence = sim::Transport::verify_transcript(a, b);
    REQUIRE(divergence.has_value());
    // The whole fixture derives from the seed, so the key ids inside the
    // very first euiccInfo1 response already differ.
    CHECK(*divergence == 1);

    std::filesystem::remove(a);
    std::filesystem::remove(b);
}

TEST_CASE("scenario fault lists parse into live rules") {
    ScenarioSpec spec =
        ScenarioSpec::from_file(kSourceDir + "/scenarios/tamper_signature.json");
    REQUIRE(spec.faults.size() == 1);
    CHECK(spec.faults[0].action.type == sim::FaultAction::Type::tamperByte);
    World world(spec);
    msg::FlowReport report = world.run_flow();
    CHECK(report_matches(report, spec.expected));
}

TEST_CASE("committed scenarios all meet their declared expectations") {
    for (const auto& entry :
         std::filesystem::directory_iterator(kSourceDir + "/scenarios")) {
        CAPTURE(entry.path().string());
        ScenarioSpec spec = ScenarioSpec::from_file(entry.path().string());
        World world(spec);
        msg::FlowReport report = world.run_flow();
        CHECK(report_matches(report, spec.expected));
    }
}

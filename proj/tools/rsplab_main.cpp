#include <cstdlib>
#include <filesystem>
#include <iostream>

#include <CLI11.hpp>

#include "rsplab/scenario.hpp"

namespace {

using rsplab::msg::json;

std::optional<std::uint64_t> env_seed() {
    const char* value = std::getenv("RSPLAB_SEED");
    if (value == nullptr || *value == '\0') return std::nullopt;
    char* end = nullptr;
    std::uint64_t seed = std::strtoull(value, &end, 10);
    if (end == nullptr || *end != '\0') return std::nullopt;
    return seed;
}

int cmd_pki_init(std::uint64_t seed, const std::string& outPath) {
    try {
        rsplab::PkiFixture fixture = rsplab::build_pki_fixture(seed);
        rsplab::write_pki_fixture(fixture, outPath);
        json ids = json::object();
        for (const auto& cert : fixture.certs) {
            ids[rsplab::pki::role_name(cert.role)] = cert.subjectKeyId.hex();
        }
        json out;
        out["seed"] = seed;
        out["fixture"] = outPath;
        out["subjectKeyIds"] = ids;
        std::cout << out.dump() << "\n";
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "pki init failed: " << e.what() << "\n";
        return 2;
    }
}

int cmd_run(const std::string& scenarioPath, std::optional<std::uint64_t> seedOverride,
            const std::string& transcriptPath, const std::string& goldenPath) {
    rsplab::ScenarioSpec spec;
    try {
        spec = rsplab::ScenarioSpec::from_file(scenarioPath);
    } catch (const std::exception& e) {
        std::cerr << "scenario error: " << e.what() << "\n";
        return 2;
    }
    if (seedOverride) {
        spec.seed = *seedOverride;
    } else if (auto seed = env_seed()) {
        spec.seed = *seed;
    }

    try {
        rsplab::World world(spec);
        rsplab::msg::FlowReport report = world.run_flow();
        if (!transcriptPath.empty()) {
            world.transport->write_transcript(transcriptPath);
            report.transcriptRef = transcriptPath;
        }

        bool matched = rsplab::report_matches(report, spec.expected);
        std::optional<std::uint64_t> divergence;
        if (!goldenPath.empty() && !transcriptPath.empty()) {
            divergence = rsplab::sim::Transport::verify_transcript(transcriptPath, goldenPath);
        }

        json out = report.to_json();
        out["expected"] = spec.expected;
        out["expectedMatched"] = matched;
        if (!goldenPath.empty() && !transcriptPath.empty()) {
            out["transcriptMatched"] = !divergence.has_value();
            if (divergence) out["firstDivergence"] = *divergence;
        }
        std::cout << out.dump() << "\n";
        std::cerr << "flow " << rsplab::flow_kind_name(spec.flow) << " -> "
                  << rsplab::msg::outcome_name(report.outcome) << "\n";
        return (matched && !divergence.has_value()) ? 0 : 1;
    } catch (const std::exception& e) {
        std::cerr << "run failed: " << e.what() << "\n";
        return 2;
    }
}

int cmd_transcript_verify(const std::string& path, const std::string& golden) {
    if (!std::filesystem::exists(path) || !std::filesystem::exists(golden)) {
        std::cerr << "missing transcript or golden file\n";
        return 2;
    }
    try {
        auto divergence = rsplab::sim::Transport::verify_transcript(path, golden);
        json out;
        out["equal"] = !divergence.has_value();
        if (divergence) out["firstDivergence"] = *divergence;
        std::cout << out.dump() << "\n";
        return divergence ? 1 : 0;
    } catch (const std::exception& e) {
        std::cerr << "verify failed: " << e.what() << "\n";
        return 2;
    }
}

int cmd_vectors(const std::string& outDir) {
    try {
        std::filesystem::create_directories(outDir);
        json index = json::object();
        for (const auto& [name, bytes] : rsplab::golden_vector_samples()) {
            std::filesystem::path path = std::filesystem::path(outDir) / (name + ".tlv");
            std::ofstream out(path, std::ios::binary);
            if (!out) throw rsplab::sim::IoFailure("cannot open " + path.string());
            out.write(reinterpret_cast<const char*>(bytes.data()),
                      static_cast<std::streamsize>(bytes.size()));
            index[name] = bytes.size();
        }
        std::cout << index.dump() << "\n";
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "vectors failed: " << e.what() << "\n";
        return 2;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Desk-scale RSP protocol lab"};
    app.require_subcommand(1);

    auto* pki = app.add_subcommand("pki", "PKI fixture commands");
    pki->require_subcommand(1);
    auto* pkiInit = pki->add_subcommand("init", "Generate a deterministic PKI fixture file");
    std::uint64_t pkiSeed = env_seed().value_or(1);
    std::string pkiOut = "pki-fixture.tlv";
    pkiInit->add_option("--seed", pkiSeed, "Fixture seed");
    pkiInit->add_option("--out", pkiOut, "Output path");

    auto* run = app.add_subcommand("run", "Run a scenario and print the flow report");
    std::string scenarioPath;
    std::string transcriptPath;
    std::string goldenPath;
    std::optional<std::uint64_t> seedOverride;
    run->add_option("--scenario", scenarioPath, "Scenario JSON file")->required();
    run->add_option("--seed", seedOverride, "Seed override (beats RSPLAB_SEED)");
    run->add_option("--transcript", transcriptPath, "Write the transcript JSONL here");
    run->add_option("--golden", goldenPath, "Compare the transcript against this golden file");

    auto* transcript = app.add_subcommand("transcript", "Transcript utilities");
    transcript->require_subcommand(1);
    auto* verify = transcript->add_subcommand("verify", "Compare a transcript against a golden");
    std::string verifyPath;
    std::string verifyGolden;
    verify->add_option("--transcript", verifyPath, "Transcript JSONL")->required();
    verify->add_option("--golden", verifyGolden, "Golden JSONL")->required();

    auto* vectors = app.add_subcommand("vectors", "Write one encoded sample per message type");
    std::string vectorsOut = "golden/vectors";
    vectors->add_option("--out", vectorsOut, "Output directory");

    CLI11_PARSE(app, argc, argv);

    if (pkiInit->parsed()) return cmd_pki_init(pkiSeed, pkiOut);
    if (run->parsed()) return cmd_run(scenarioPath, seedOverride, transcriptPath, goldenPath);
    if (verify->parsed()) return cmd_transcript_verify(verifyPath, verifyGolden);
    if (vectors->parsed()) return cmd_vectors(vectorsOut);
    return 2;
}

#pragma once

#include "rsplab/eim.hpp"
#include "rsplab/euicc.hpp"
#include "rsplab/lpa.hpp"
#include "rsplab/smdp.hpp"

namespace rsplab {

struct BadScenario : std::runtime_error {
    explicit BadScenario(const std::string& what) : std::runtime_error(what) {}
};

enum class FlowKind { auth, downloadAc, downloadDefault, iotPush, iotAssisted, eimConfig };

const char* flow_kind_name(FlowKind kind);

struct OrderSpec {
    std::string matchingId;
    std::string iccidDigits;  // 20 decimal digits
    bool ccRequired = false;
    std::string confirmationCode;
    std::string eid;  // "", "auto", or 32 hex chars
    bool expired = false;
    bool viaSmds = false;
    std::uint32_t maxAttempts = 3;
    msg::ProfileMetadata metadata;  // iccid filled from iccidDigits
};

struct DeviceSpec {
    std::string deviceId = "dev-1";
    msg::EsipaMode mode = msg::EsipaMode::jsonEnvelope;
};

struct ScenarioSpec {
    std::uint64_t seed = 1;
    FlowKind flow = FlowKind::downloadAc;
    std::string smdpAddress = "smdp.example.com";
    msg::RspCapability smdpCapability;
    bool rejectAllEligibility = false;

    msg::RspCapability euiccCapability;
    std::vector<msg::PprSet> ratPermitted;
    std::vector<msg::ProfileMetadata> preinstalledProfiles;

    std::optional<std::string> allowedRootIdHex;
    std::optional<std::string> defaultSmdpAddress;
    std::string consent = "accept";  // accept | reject | postpone
    std::optional<std::string> confirmationCode;
    bool timeCheckEnabled = true;
    msg::RspCapability lpaCapability;
    msg::OperationType operationType = msg::OperationType::profileDownload;

    std::vector<OrderSpec> orders;
    std::vector<DeviceSpec> devices;
    std::string activationCode;
    std::string deviceId = "dev-1";

    std::vector<sim::FaultRule> faults;
    std::string expected = "installed";

    static ScenarioSpec from_json(const msg::json& j);
    static ScenarioSpec from_file(const std::string& path);
};

Iccid iccid_from_digits(const std::string& digits);

/// Everything one scenario instantiates: the PKI, the four actors and the
/// transport. Fault hooks for revoke/expireCert are wired here.
struct World {
    explicit World(const ScenarioSpec& spec);

    ScenarioSpec spec;
    std::shared_ptr<sim::Clock> clock;
    std::unique_ptr<sim::Transport> transport;

    crypto::SigKeyPair ciKeys, eumKeys, euiccKeys, dpauthKeys, dppbKeys, dsauthKeys, eimKeys;
    pki::Certificate ciCert, eumCert, euiccCert, dpauthCert, dppbCert, dsauthCert, eimCert;

    std::unique_ptr<Euicc> euicc;
    std::unique_ptr<Smdp> smdp;
    std::unique_ptr<Ipa> ipa;
    std::unique_ptr<Eim> eim;
    std::unique_ptr<Lpa> lpa;

    void revoke_serial(std::uint64_t serial);
    void expire_serial(std::uint64_t serial);
    const pki::Certificate* cert_by_serial(std::uint64_t serial) const;

    msg::FlowReport run_flow();

private:
    std::vector<std::uint64_t> revokedSerials_;
};

bool report_matches(const msg::FlowReport& report, const std::string& expected);

// --- PKI fixture file (written/read by `pki init`) ---

struct PkiFixture {
    std::vector<std::pair<std::string, crypto::SigKeyPair>> keypairs;
    std::vector<pki::Certificate> certs;
    std::vector<pki::Crl> crls;
    std::vector<pki::PublicKeyId> rootIds;

    Bytes encode() const;
    static PkiFixture decode(ByteSpan data);
};

PkiFixture build_pki_fixture(std::uint64_t seed);
void write_pki_fixture(const PkiFixture& fixture, const std::string& path);
PkiFixture read_pki_fixture(const std::string& path);

/// One encoded sample per wire-format type, for the golden vector suite.
std::vector<std::pair<std::string, Bytes>> golden_vector_samples();

}  // namespace rsplab

#include <doctest.h>

#include <map>
#include <set>

#include "rsplab/messages.hpp"
#include "rsplab/rng.hpp"

using namespace rsplab;

namespace {

// Random-value generators used by the roundtrip and injectivity properties.
struct Gen {
    DeterministicRng rng;

    explicit Gen(std::uint64_t seed) : rng(seed) {}

    bool chance(int pct) { return rng.next_below(100) < static_cast<std::uint64_t>(pct); }

    std::string text(std::size_t maxLen) {
        std::size_t n = rng.next_below(maxLen + 1);
        std::string out;
        for (std::size_t i = 0; i < n; i++) {
            out.push_back(static_cast<char>('a' + rng.next_below(26)));
        }
        return out;
    }

    msg::TransactionId txid() {
        msg::TransactionId t;
        rng.fill(t.id.data(), t.id.size());
        return t;
    }

    msg::RspCapability capability() { return msg::RspCapability::from_byte(rng.next_below(16)); }

    pki::PublicKeyId keyId() {
        pki::PublicKeyId id;
        rng.fill(id.id.data(), id.id.size());
        return id;
    }

    Iccid iccid() {
        Iccid out{};
        rng.fill(out.data(), out.size());
        return out;
    }

    msg::EuiccInfo1 info1() {
        msg::EuiccInfo1 v;
        std::size_t nv = 1 + rng.next_below(3);
        for (std::size_t i = 0; i < nv; i++) v.verificationKeyIds.push_back(keyId());
        std::size_t ns = 1 + rng.next_below(2);
        for (std::size_t i = 0; i < ns; i++) v.signingKeyIds.push_back(keyId());
        v.capability = capability();
        return v;
    }

    msg::EuiccInfo2 info2() {
        msg::EuiccInfo2 v;
        v.info1 = info1();
        v.svn = {static_cast<std::uint8_t>(rng.next_below(4)),
                 static_cast<std::uint8_t>(rng.next_below(10)),
                 static_cast<std::uint8_t>(rng.next_below(10))};
        v.freeNonVolatileMemory = rng.next_below(1 << 24);
        v.installedProfileCount = rng.next_below(8);
        return v;
    }

    msg::ServerSigned1 serverSigned1() {
        msg::ServerSigned1 v;
        v.transactionId = txid();
        rng.fill(v.euiccChallenge.data(), 16);
        v.serverAddress = text(24);
        rng.fill(v.serverChallenge.data(), 16);
        return v;
    }

    msg::DeviceInfo deviceInfo() {
        msg::DeviceInfo v;
        v.tac.clear();
        for (int i = 0; i < 8; i++) v.tac.push_back(static_cast<char>('0' + rng.next_below(10)));
        v.deviceCapabilities = capability();
        return v;
    }

    msg::CtxParams1 ctxParams1() {
        msg::CtxParams1 v;
        v.matchingId = text(16);
        v.deviceInfo = deviceInfo();
        v.operationType = chance(80) ? msg::OperationType::profileDownload : msg::OperationType::rpm;
        return v;
    }

    msg::EuiccSigned1 euiccSigned1() {
        msg::EuiccSigned1 v;
        v.transactionId = txid();
        v.serverAddress = text(24);
        rng.fill(v.serverChallenge.data(), 16);
        v.euiccInfo2 = info2();
        v.ctxParams1 = ctxParams1();
        return v;
    }

    msg::SmdpSigned2 smdpSigned2() {
        msg::SmdpSigned2 v;
        v.transactionId = txid();
        v.ccRequiredFlag = chance(50);
        if (chance(40)) v.bppEuiccOtpk = rngOctet32();
        v.rpmPending = chance(20);
        return v;
    }

    msg::EuiccSigned2 euiccSigned2() {
        msg::EuiccSigned2 v;
        v.transactionId = txid();
        v.euiccOtpk = rngOctet32();
        if (chance(50)) v.hashCc = rngOctet32();
        return v;
    }

    msg::ProfileMetadata metadata() {
        msg::ProfileMetadata v;
        v.iccid = iccid();
        v.profileName = text(12);
        v.serviceProviderName = text(12);
        v.pprs = msg::PprSet::from_byte(rng.next_below(4));
        v.lprConfigPresent = chance(30);
        return v;
    }

    msg::ProfileInstallationResult pir() {
        msg::ProfileInstallationResult v;
        v.data.transactionId = txid();
        v.data.notificationMetadata.seqNumber = rng.next_below(1000);
        v.data.notificationMetadata.iccid = iccid();
        v.data.smdpOid = "1.3.6.1.4.1." + std::to_string(rng.next_below(99999));
        if (chance(60)) {
            msg::SuccessResult ok;
            ok.isdpAid = rng.bytes(5 + rng.next_below(12));
            v.data.finalResult = ok;
        } else {
            msg::ErrorResult err;
            err.bppCommandId = msg::bpp_command_from_int(rng.next_below(6));
            err.errorReason = msg::ErrorReason::bspSecurityError;
            if (chance(30)) err.ppiResponse = rng.bytes(1 + rng.next_below(20));
            v.data.finalResult = err;
        }
        rng.fill(v.euiccSignPIR.data(), 64);
        return v;
    }

    msg::ActivationCode activationCode() {
        msg::ActivationCode v;
        v.version = 1 + rng.next_below(3);
        v.smdpAddress = "s" + text(14);
        v.matchingId = "m" + text(14);
        if (chance(40)) v.oid = "1.2." + std::to_string(rng.next_below(999));
        return v;
    }

    Octet32 rngOctet32() {
        Octet32 out{};
        rng.fill(out.data(), 32);
        return out;
    }
};

template <typename T, typename MakeT>
void roundtrip_property(const char* name, std::size_t iterations, MakeT make) {
    Gen gen(0xC0FFEE ^ std::hash<std::string>{}(name));
    std::map<Bytes, T> seen;
    for (std::size_t i = 0; i < iterations; i++) {
        T value = make(gen);
        Bytes encoded = value.encode();
        T back = T::decode(encoded);
        REQUIRE(back == value);
        // Canonical: re-encoding the decoded value reproduces the bytes.
        REQUIRE(back.encode() == encoded);
        // Injectivity over the generated corpus: one byte string per value.
        auto it = seen.find(encoded);
        if (it != seen.end()) {
            REQUIRE(it->second == value);
        } else {
            seen.emplace(std::move(encoded), std::move(value));
        }
    }
}

}  // namespace

TEST_CASE("enum wire values match the published numbers") {
    using AE = msg::AuthenticateErrorCode;
    const std::pair<AE, int> authErrors[] = {
        {AE::invalidCertificate, 1}, {AE::invalidSignature, 2},  {AE::unsupportedCurve, 3},
        {AE::noSession, 4},          {AE::invalidOid, 5},        {AE::euiccChallengeMismatch, 6},
        {AE::ciPKUnknown, 7},        {AE::transactionIdError, 8},{AE::missingCrl, 9},
        {AE::invalidCrlSignature, 10},{AE::revokedCert, 11},     {AE::invalidCertOrCrlTime, 12},
        {AE::invalidCertOrCrlConfiguration, 13}, {AE::invalidIccid, 14}, {AE::undefinedError, 127}};
    for (auto [e, v] : authErrors) {
        CHECK(static_cast<int>(e) == v);
        CHECK(msg::authenticate_error_from_int(v) == e);
    }

    using CR = msg::CancelSessionReason;
    const std::pair<CR, int> cancelReasons[] = {
        {CR::endUserRejection, 0}, {CR::postponed, 1},       {CR::timeout, 2},
        {CR::pprNotAllowed, 3},    {CR::metadataMismatch, 4},{CR::loadBppExecutionError, 5},
        {CR::sessionAborted, 16},  {CR::enterpriseProfilesNotSupported, 17},
        {CR::enterpriseRulesNotAllowed, 18}, {CR::enterpriseProfileNotAllowed, 19},
        {CR::enterpriseOidMismatch, 20}, {CR::enterpriseRulesError, 21},
        {CR::enterpriseProfilesOnly, 22}, {CR::lprNotSupported, 23},
        {CR::lprNetworkDataNotAllowed, 24}, {CR::emptyProfileOrSpName, 25},
        {CR::rpmDisabled, 27}, {CR::invalidRpmPackage, 28}, {CR::loadRpmPackageError, 29},
        {CR::undefinedReason, 127}};
    for (auto [e, v] : cancelReasons) {
        CHECK(static_cast<int>(e) == v);
        CHECK(msg::cancel_reason_from_int(v) == e);
    }

    using AC = msg::AuthenticateClientError;
    const std::pair<AC, int> clientErrors[] = {
        {AC::eumCertificateInvalid, 1},  {AC::eumCertificateExpired, 2},
        {AC::euiccCertificateInvalid, 3},{AC::euiccCertificateExpired, 4},
        {AC::euiccSignatureInvalid, 5},  {AC::matchingIdRefused, 6},
        {AC::eidMismatch, 7},            {AC::noEligibleProfile, 8},
        {AC::ciPKUnknown, 9},            {AC::invalidTransactionId, 10},
        {AC::insufficientMemory, 11},    {AC::ciPKMismatch, 12},
        {AC::euiccRspCapabilityHasChanged, 13}, {AC::lpaRspCapabilityHasChanged, 14},
        {AC::deviceChangeNotSupported, 15}, {AC::deviceChangeNotAllowed, 16},
        {AC::iccidUnknown, 17}, {AC::invalidInputData, 124}, {AC::missingInputData, 125},
        {AC::functionProviderBusy, 126}, {AC::undefinedError, 127}};
    for (auto [e, v] : clientErrors) {
        CHECK(static_cast<int>(e) == v);
        CHECK(msg::authenticate_client_error_from_int(v) == e);
    }

    using DE = msg::DownloadErrorCode;
    const std::pair<DE, int> downloadErrors[] = {{DE::invalidCertificate, 1},
                                                 {DE::invalidSignature, 2},
                                                 {DE::noSession, 4},
                                                 {DE::invalidTransactionId, 5},
                                                 {DE::undefinedError, 127}};
    for (auto [e, v] : downloadErrors) {
        CHECK(static_cast<int>(e) == v);
        CHECK(msg::download_error_from_int(v) == e);
    }
    CHECK_THROWS_AS(msg::download_error_from_int(3), msg::BadMessage);

    using GE = msg::GetBoundProfilePackageError;
    const std::pair<GE, int> bppErrors[] = {
        {GE::euiccSignatureInvalid, 1}, {GE::confirmationCodeMissing, 2},
        {GE::confirmationCodeRefused, 3}, {GE::confirmationCodeRetriesExceeded, 4},
        {GE::bppRebindingRefused, 5}, {GE::downloadOrderExpired, 6},
        {GE::invalidTransactionId, 95}, {GE::invalidInputData, 124},
        {GE::missingInputData, 125}, {GE::functionProviderBusy, 126}, {GE::undefinedError, 127}};
    for (auto [e, v] : bppErrors) {
        CHECK(static_cast<int>(e) == v);
        CHECK(msg::get_bpp_error_from_int(v) == e);
    }

    using BC = msg::BppCommandId;
    const std::pair<BC, int> commands[] = {{BC::initialiseSecureChannel, 0}, {BC::configureIsdp, 1},
                                           {BC::storeMetadata, 2},           {BC::storeMetadata2, 3},
                                           {BC::replaceSessionKeys, 4},
                                           {BC::loadProfileElements, 5}};
    for (auto [e, v] : commands) {
        CHECK(static_cast<int>(e) == v);
        CHECK(msg::bpp_command_from_int(v) == e);
    }

    using ER = msg::ErrorReason;
    const std::pair<ER, int> reasons[] = {
        {ER::incorrectInputValues, 1}, {ER::invalidSignature, 2}, {ER::invalidTransactionId, 3},
        {ER::unsupportedCrtValues, 4}, {ER::unsupportedRemoteOperationType, 5},
        {ER::unsupportedProfileClass, 6}, {ER::bspStructureError, 7}, {ER::bspSecurityError, 8},
        {ER::installFailedDueToIccidAlreadyExistsOnEuicc, 9},
        {ER::installFailedDueToInsufficientMemoryForProfile, 10},
        {ER::installFailedDueToInterruption, 11}, {ER::installFailedDueToPEProcessingError, 12},
        {ER::installFailedDueToDataMismatch, 13},
        {ER::testProfileInstallFailedDueToInvalidNaaKey, 14}, {ER::pprNotAllowed, 15},
        {ER::enterpriseProfilesNotSupported, 17}, {ER::enterpriseRulesNotAllowed, 18},
        {ER::enterpriseProfileNotAllowed, 19}, {ER::enterpriseOidMismatch, 20},
        {ER::enterpriseRulesError, 21}, {ER::enterpriseProfilesOnly, 22},
        {ER::lprNotSupported, 23}, {ER::unknownTlvInMetadata, 26},
        {ER::installFailedDueToUnknownError, 127}};
    for (auto [e, v] : reasons) {
        CHECK(static_cast<int>(e) == v);
        CHECK(msg::error_reason_from_int(v) == e);
    }
    CHECK_THROWS_AS(msg::error_reason_from_int(16), msg::BadMessage);

    const std::pair<msg::CancelSessionRespError, int> cancelErrs[] = {
        {msg::CancelSessionRespError::invalidTransactionId, 5},
        {msg::CancelSessionRespError::undefinedError, 127}};
    for (auto [e, v] : cancelErrs) CHECK(static_cast<int>(e) == v);
}

TEST_CASE("tlv roundtrip, canonicality and injectivity over 10k random messages") {
    roundtrip_property<msg::EuiccInfo1>("EuiccInfo1", 1000, [](Gen& g) { return g.info1(); });
    roundtrip_property<msg::EuiccInfo2>("EuiccInfo2", 1000, [](Gen& g) { return g.info2(); });
    roundtrip_property<msg::ServerSigned1>("ServerSigned1", 1000,
                                           [](Gen& g) { return g.serverSigned1(); });
    roundtrip_property<msg::CtxParams1>("CtxParams1", 1000, [](Gen& g) { return g.ctxParams1(); });
    roundtrip_property<msg::EuiccSigned1>("EuiccSigned1", 1000,
                                          [](Gen& g) { return g.euiccSigned1(); });
    roundtrip_property<msg::SmdpSigned2>("SmdpSigned2", 1500,
                                         [](Gen& g) { return g.smdpSigned2(); });
    roundtrip_property<msg::EuiccSigned2>("EuiccSigned2", 1500,
                                          [](Gen& g) { return g.euiccSigned2(); });
    roundtrip_property<msg::ProfileMetadata>("ProfileMetadata", 1500,
                                             [](Gen& g) { return g.metadata(); });
    roundtrip_property<msg::ProfileInstallationResult>("ProfileInstallationResult", 1000,
                                                       [](Gen& g) { return g.pir(); });
    roundtrip_property<msg::ActivationCode>("ActivationCode", 500,
                                            [](Gen& g) { return g.activationCode(); });
}

TEST_CASE("optional fields encode as absent tags") {
    msg::SmdpSigned2 v;
    DeterministicRng rng(5);
    rng.fill(v.transactionId.id.data(), 16);
    v.ccRequiredFlag = false;
    Bytes withoutOptionals = v.encode();
    msg::SmdpSigned2 back = msg::SmdpSigned2::decode(withoutOptionals);
    CHECK_FALSE(back.bppEuiccOtpk.has_value());
    CHECK_FALSE(back.rpmPending);

    v.bppEuiccOtpk = Octet32{};
    v.rpmPending = true;
    Bytes withOptionals = v.encode();
    CHECK(withOptionals.size() > withoutOptionals.size());
    msg::SmdpSigned2 back2 = msg::SmdpSigned2::decode(withOptionals);
    CHECK(back2.bppEuiccOtpk.has_value());
    CHECK(back2.rpmPending);
}

TEST_CASE("error result wire bytes carry the exact reason number") {
    msg::ErrorResult err;
    err.bppCommandId = msg::BppCommandId::loadProfileElements;
    err.errorReason = msg::ErrorReason::installFailedDueToInsufficientMemoryForProfile;
    Bytes encoded = err.encode();
    CHECK(msg::ErrorResult::decode(encoded) == err);
    // Body: 80 01 05 (command 5), 81 01 0A (reason 10).
    Bytes expectedBody{0x80, 0x01, 0x05, 0x81, 0x01, 0x0A};
    Bytes body(encoded.begin() + 2, encoded.end());
    CHECK(body == expectedBody);
}

TEST_CASE("activation code grammar") {
    SUBCASE("plain parse") {
        auto ac = msg::ActivationCode::parse("LPA:1$smdp.example.com$MATCH-001");
        CHECK(ac.version == 1);
        CHECK(ac.smdpAddress == "smdp.example.com");
        CHECK(ac.matchingId == "MATCH-001");
        CHECK(ac.oid.empty());
        CHECK(ac.render() == "LPA:1$smdp.example.com$MATCH-001");
    }
    SUBCASE("with oid") {
        auto ac = msg::ActivationCode::parse("LPA:1$a.example$m$1.2.3");
        CHECK(ac.oid == "1.2.3");
        CHECK(ac.render() == "LPA:1$a.example$m$1.2.3");
    }
    SUBCASE("render/parse identity over random codes") {
        Gen gen(31337);
        for (int i = 0; i < 500; i++) {
            msg::ActivationCode ac = gen.activationCode();
            CHECK(msg::ActivationCode::parse(ac.render()) == ac);
        }
    }
    SUBCASE("rejections") {
        CHECK_THROWS_AS(msg::ActivationCode::parse("LPA:1$smdp.example.com$"),
                        msg::BadActivationCode);
        CHECK_THROWS_AS(msg::ActivationCode::parse("XYZ:1$a$b"), msg::BadActivationCode);
        CHECK_THROWS_AS(msg::ActivationCode::parse("LPA:1$$m"), msg::BadActivationCode);
        CHECK_THROWS_AS(msg::ActivationCode::parse("LPA:x$a$b"), msg::BadActivationCode);
        CHECK_THROWS_AS(msg::ActivationCode::parse("LPA:1$a"), msg::BadActivationCode);
        CHECK_THROWS_AS(msg::ActivationCode::parse("LPA:1$a$b$c$d"), msg::BadActivationCode);
    }
}

TEST_CASE("confirmation code hashing") {
    msg::TransactionId zero;
    SUBCASE("frozen double-hash oracle") {
        // Computed with an independent script:
        // sha256(sha256("1234") || 16 zero bytes).
        Octet32 digest = msg::compute_hash_cc("1234", zero);
        CHECK(to_hex(as_span(digest)) ==
              "A9CD23F01921A4A4F2ED5A6220AFF065F9C24BC1E149466317F997D11FCD9A8D");
        msg::TransactionId seq;
        for (std::size_t i = 0; i < 16; i++) seq.id[i] = static_cast<std::uint8_t>(i);
        CHECK(to_hex(as_span(msg::compute_hash_cc("1234", seq))) ==
              "E62ED88864CCF99EBCC7C57C5A37641A99315C87F6151C3F4B77C920332E1177");
    }
    SUBCASE("deterministic and transaction-bound") {
        msg::TransactionId other;
        other.id[0] = 1;
        CHECK(msg::compute_hash_cc("1234", zero) == msg::compute_hash_cc("1234", zero));
        CHECK(msg::compute_hash_cc("1234", zero) != msg::compute_hash_cc("1234", other));
        CHECK(msg::compute_hash_cc("1234", zero) != msg::compute_hash_cc("1235", zero));
    }
    SUBCASE("empty code rejected") {
        CHECK_THROWS_AS(msg::compute_hash_cc("", zero), msg::EmptyCode);
    }
}

TEST_CASE("flow report json and tlv forms") {
    msg::TransactionId txid;
    txid.id[3] = 9;
    msg::FlowReport installed = msg::FlowReport::make_installed(txid);
    CHECK(msg::FlowReport::from_json(installed.to_json()) == installed);
    CHECK(msg::FlowReport::decode(installed.encode()) == installed);

    msg::FlowReport cancelled =
        msg::FlowReport::make_cancelled(msg::CancelSessionReason::pprNotAllowed, txid);
    CHECK(msg::FlowReport::from_json(cancelled.to_json()) == cancelled);
    CHECK(msg::FlowReport::decode(cancelled.encode()) == cancelled);

    msg::FlowReport error = msg::FlowReport::make_error("getBpp", 4, "confirmationCode");
    CHECK(msg::FlowReport::from_json(error.to_json()) == error);
    CHECK(msg::FlowReport::decode(error.encode()) == error);
}

TEST_CASE("decode rejects unknown enum values on the wire") {
    msg::ErrorResult err;
    err.bppCommandId = msg::BppCommandId::storeMetadata;
    err.errorReason = msg::ErrorReason::pprNotAllowed;
    Bytes encoded = err.encode();
    // Patch the reason byte (last byte of the body) to an unassigned value.
    encoded[encoded.size() - 1] = 16;
    CHECK_THROWS_AS(msg::ErrorResult::decode(encoded), tlv::MalformedTlv);
}

TEST_CASE("decode input cap applies to message blobs") {
    Bytes giant(tlv::kMaxDecodeInput + 1, 0x00);
    CHECK_THROWS_AS(msg::EuiccInfo1::decode(giant), tlv::LengthOverflow);
}

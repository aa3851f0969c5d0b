#include "rsplab/scenario.hpp"

#include <fstream>

namespace rsplab {

namespace {

constexpr std::int64_t kClockStart = 1'700'000'000;
constexpr std::int64_t kCertNotBefore = 1'600'000'000;
constexpr std::int64_t kCertNotAfter = 1'900'000'000;
constexpr std::int64_t kRootNotAfter = 1'950'000'000;
constexpr std::int64_t kCrlHorizon = 365 * 86'400;

msg::RspCapability capability_from_json(const msg::json& arr, const char* what) {
    msg::RspCapability cap;
    if (!arr.is_array()) throw BadScenario(std::string(what) + " must be an array");
    for (const auto& item : arr) {
        if (!item.is_string()) throw BadScenario(std::string(what) + " entries must be strings");
        std::string name = item.get<std::string>();
        if (name == "crlStaplingV3Support") {
            cap.crlStaplingV3Support = true;
        } else if (name == "euiccCiUpdateSupport") {
            cap.euiccCiUpdateSupport = true;
        } else if (name == "cancelForEmptySpnPnSupport") {
            cap.cancelForEmptySpnPnSupport = true;
        } else if (name == "lprSupport") {
            cap.lprSupport = true;
        } else {
            throw BadScenario("unknown capability " + name);
        }
    }
    return cap;
}

msg::PprSet pprs_from_json(const msg::json& arr, const char* what) {
    msg::PprSet set;
    if (!arr.is_array()) throw BadScenario(std::string(what) + " must be an array");
    for (const auto& item : arr) {
        std::string name = item.get<std::string>();
        if (name == "ppr1") {
            set.ppr1 = true;
        } else if (name == "ppr2") {
            set.ppr2 = true;
        } else {
            throw BadScenario("unknown ppr " + name);
        }
    }
    return set;
}

msg::ProfileMetadata metadata_from_json(const msg::json& j, const Iccid& iccid) {
    msg::ProfileMetadata m;
    m.iccid = iccid;
    m.profileName = j.value("profileName", "Desk Profile");
    m.serviceProviderName = j.value("serviceProviderName", "Desk Telecom");
    if (j.contains("pprs")) m.pprs = pprs_from_json(j.at("pprs"), "pprs");
    m.lprConfigPresent = j.value("lprConfigPresent", false);
    return m;
}

sim::FaultRule fault_from_json(const msg::json& j) {
    sim::FaultRule rule;
    rule.endpointGlob = j.value("endpoint", "*");
    rule.direction = j.value("direction", "any");
    if (rule.direction != "any" && rule.direction != "request" && rule.direction != "response") {
        throw BadScenario("bad fault direction " + rule.direction);
    }
    rule.occurrence = j.value("occurrence", std::uint64_t{0});
    if (!j.contains("action")) throw BadScenario("fault without action");
    const msg::json& a = j.at("action");
    std::string type = a.value("type", "");
    if (type == "drop") {
        rule.action.type = sim::FaultAction::Type::drop;
    } else if (type == "tamperByte") {
        rule.action.type = sim::FaultAction::Type::tamperByte;
        rule.action.offset = a.value("offset", std::uint64_t{0});
        rule.action.bodyOnly = a.value("scope", "envelope") == std::string("body");
    } else if (type == "swapField") {
        rule.action.type = sim::FaultAction::Type::swapField;
        rule.action.fieldName = a.value("field", "");
        rule.action.fieldValue = from_base64(a.value("value", ""));
        rule.action.fieldText = a.value("textValue", "");
        if (rule.action.fieldName.empty()) throw BadScenario("swapField without field");
    } else if (type == "delayLogical") {
        rule.action.type = sim::FaultAction::Type::delayLogical;
        rule.action.amount = a.value("amount", std::uint64_t{0});
    } else if (type == "expireCert") {
        rule.action.type = sim::FaultAction::Type::expireCert;
        rule.action.serial = a.value("serial", std::uint64_t{0});
    } else if (type == "revoke") {
        rule.action.type = sim::FaultAction::Type::revoke;
        rule.action.serial = a.value("serial", std::uint64_t{0});
    } else {
        throw BadScenario("unknown fault action " + type);
    }
    return rule;
}

}  // namespace

const char* flow_kind_name(FlowKind kind) {
    switch (kind) {
        case FlowKind::auth: return "auth";
        case FlowKind::downloadAc: return "download-ac";
        case FlowKind::downloadDefault: return "download-default";
        case FlowKind::iotPush: return "iot-push";
        case FlowKind::iotAssisted: return "iot-assisted";
        case FlowKind::eimConfig: return "eim-config";
    }
    return "?";
}

Iccid iccid_from_digits(const std::string& digits) {
    if (digits.size() != 20 ||
        !std::all_of(digits.begin(), digits.end(), [](char c) { return c >= '0' && c <= '9'; })) {
        throw BadScenario("iccid must be 20 decimal digits");
    }
    Iccid out{};
    for (std::size_t i = 0; i < 10; i++) {
        out[i] = static_cast<std::uint8_t>(((digits[2 * i] - '0') << 4) | (digits[2 * i + 1] - '0'));
    }
    return out;
}

ScenarioSpec ScenarioSpec::from_json(const msg::json& j) {
    if (!j.is_object()) throw BadScenario("scenario must be a JSON object");
    ScenarioSpec spec;
    spec.seed = j.value("seed", 1);

    std::string flow = j.value("flow", "download-ac");
    bool known = false;
    for (auto kind : {FlowKind::auth, FlowKind::downloadAc, FlowKind::downloadDefault,
                      FlowKind::iotPush, FlowKind::iotAssisted, FlowKind::eimConfig}) {
        if (flow == flow_kind_name(kind)) {
            spec.flow = kind;
            known = true;
        }
    }
    if (!known) throw BadScenario("unknown flow " + flow);

    if (j.contains("smdp")) {
        const msg::json& s = j.at("smdp");
        spec.smdpAddress = s.value("address", spec.smdpAddress);
        if (s.contains("capability")) {
            spec.smdpCapability = capability_from_json(s.at("capability"), "smdp.capability");
        }
        spec.rejectAllEligibility = s.value("rejectAllEligibility", false);
    }

    if (j.contains("euicc")) {
        const msg::json& e = j.at("euicc");
        if (e.contains("capability")) {
            spec.euiccCapability = capability_from_json(e.at("capability"), "euicc.capability");
        }
        if (e.contains("ratPermitted")) {
            for (const auto& entry : e.at("ratPermitted")) {
                spec.ratPermitted.push_back(pprs_from_json(entry, "ratPermitted"));
            }
        }
        if (e.contains("installedProfiles")) {
            for (const auto& p : e.at("installedProfiles")) {
                Iccid iccid = iccid_from_digits(p.value("iccid", ""));
                spec.preinstalledProfiles.push_back(metadata_from_json(p, iccid));
            }
        }
    }

    if (j.contains("lpa")) {
        const msg::json& l = j.at("lpa");
        if (l.contains("allowedRootId")) spec.allowedRootIdHex = l.at("allowedRootId").get<std::string>();
        if (l.contains("defaultSmdpAddress")) {
            spec.defaultSmdpAddress = l.at("defaultSmdpAddress").get<std::string>();
        }
        spec.consent = l.value("consent", "accept");
        if (spec.consent != "accept" && spec.consent != "reject" && spec.consent != "postpone") {
            throw BadScenario("unknown consent " + spec.consent);
        }
        if (l.contains("confirmationCode")) {
            spec.confirmationCode = l.at("confirmationCode").get<std::string>();
        }
        spec.timeCheckEnabled = l.value("timeCheckEnabled", true);
        if (l.contains("capability")) {
            spec.lpaCapability = capability_from_json(l.at("capability"), "lpa.capability");
        }
        std::string op = l.value("operationType", "profileDownload");
        if (op == "rpm") {
            spec.operationType = msg::OperationType::rpm;
        } else if (op != "profileDownload") {
            throw BadScenario("unknown operationType " + op);
        }
    }

    if (j.contains("orders")) {
        for (const auto& o : j.at("orders")) {
            OrderSpec order;
            order.matchingId = o.value("matchingId", "");
            order.iccidDigits = o.value("iccid", "");
            order.ccRequired = o.value("ccRequired", false);
            order.confirmationCode = o.value("confirmationCode", "");
            order.eid = o.value("eid", "");
            order.expired = o.value("expired", false);
            order.viaSmds = o.value("viaSmds", false);
            order.maxAttempts = o.value("maxAttempts", 3);
            Iccid iccid = iccid_from_digits(order.iccidDigits);
            order.metadata = metadata_from_json(o.value("metadata", msg::json::object()), iccid);
            spec.orders.push_back(std::move(order));
        }
    }

    if (j.contains("devices")) {
        for (const auto& d : j.at("devices")) {
            DeviceSpec dev;
            dev.deviceId = d.value("deviceId", "dev-1");
            std::string mode = d.value("transportMode", "jsonEnvelope");
            if (mode == "jsonEnvelope") {
                dev.mode = msg::EsipaMode::jsonEnvelope;
            } else if (mode == "compactTlv") {
                dev.mode = msg::EsipaMode::compactTlv;
            } else {
                throw BadScenario("unknown transportMode " + mode);
            }
            spec.devices.push_back(std::move(dev));
        }
    }

    spec.activationCode = j.value("activationCode", "");
    spec.deviceId = j.value("deviceId", "dev-1");

    if (j.contains("faults")) {
        for (const auto& f : j.at("faults")) spec.faults.push_back(fault_from_json(f));
    }
    spec.expected = j.value("expected", "installed");
    return spec;
}

ScenarioSpec ScenarioSpec::from_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw sim::IoFailure("cannot open " + path);
    msg::json j = msg::json::parse(in, nullptr, false);
    if (j.is_discarded()) throw BadScenario("scenario is not valid JSON");
    return from_json(j);
}

World::World(const ScenarioSpec& scenarioSpec) : spec(scenarioSpec) {
    clock = std::make_shared<sim::Clock>();
    clock->now = kClockStart;
    transport = std::make_unique<sim::Transport>(clock);

    DeterministicRng rootRng(spec.seed);

    auto makeKeys = [&](const char* label) {
        DeterministicRng r = rootRng.derive(label);
        return crypto::generate_keypair(r.octet32());
    };
    ciKeys = makeKeys("pki.ci");
    eumKeys = makeKeys("pki.eum");
    euiccKeys = makeKeys("pki.euicc");
    dpauthKeys = makeKeys("pki.dpauth");
    dppbKeys = makeKeys("pki.dppb");
    dsauthKeys = makeKeys("pki.dsauth");
    eimKeys = makeKeys("pki.eim");

    const std::string smdpOid = "1.3.6.1.4.1.54321.1";
    pki::CertTemplate tpl;
    tpl.serial = 1;
    tpl.subjectName = "Desk Root CI";
    tpl.role = pki::CertRole::ci;
    tpl.subjectPublicKey = ciKeys.publicKey;
    tpl.notBefore = kCertNotBefore;
    tpl.notAfter = kRootNotAfter;
    ciCert = pki::issue_certificate(ciKeys, nullptr, tpl);

    auto issue = [&](std::uint64_t serial, const char* name, pki::CertRole role,
                     const Octet32& pub, const std::string& oid, bool crlDp,
                     const crypto::SigKeyPair& issuerKeys, const pki::Certificate& issuerCert) {
        pki::CertTemplate t;
        t.serial = serial;
        t.subjectName = name;
        t.role = role;
        t.subjectPublicKey = pub;
        t.notBefore = kCertNotBefore;
        t.notAfter = kCertNotAfter;
        t.oid = oid;
        t.hasCrlDistributionPoint = crlDp;
        return pki::issue_certificate(issuerKeys, &issuerCert, t);
    };
    eumCert = issue(2, "Desk EUM", pki::CertRole::eum, eumKeys.publicKey, "", true, ciKeys, ciCert);
    euiccCert = issue(3, "Desk eUICC dev-1", pki::CertRole::euicc, euiccKeys.publicKey, "", false,
                      eumKeys, eumCert);
    dpauthCert = issue(4, "Desk SM-DP+ auth", pki::CertRole::dpauth, dpauthKeys.publicKey, smdpOid,
                       true, ciKeys, ciCert);
    dppbCert = issue(5, "Desk SM-DP+ pb", pki::CertRole::dppb, dppbKeys.publicKey, smdpOid, true,
                     ciKeys, ciCert);
    dsauthCert = issue(6, "Desk SM-DS auth", pki::CertRole::dsauth, dsauthKeys.publicKey, "", true,
                       ciKeys, ciCert);
    eimCert = issue(7, "Desk eIM", pki::CertRole::eim, eimKeys.publicKey, "", false, ciKeys,
                    ciCert);

    pki::Crl emptyCrl = pki::issue_crl(ciKeys, ciCert, kClockStart - 86'400,
                                       kClockStart + kCrlHorizon, {});

    pki::TrustStore euiccStore;
    euiccStore.add_root(ciCert);
    euiccStore.now = clock->now;

    pki::TrustStore smdpStore;
    smdpStore.add_root(ciCert);
    smdpStore.add_crl(emptyCrl);
    smdpStore.now = clock->now;

    EuiccConfig euiccConfig;
    euiccConfig.capability = spec.euiccCapability;
    euiccConfig.ratPermitted = spec.ratPermitted;
    euicc = std::make_unique<Euicc>(euiccConfig, euiccKeys,
                                    std::vector<pki::Certificate>{euiccCert, eumCert}, euiccStore,
                                    clock, rootRng.derive("euicc"));
    for (const auto& m : spec.preinstalledProfiles) euicc->install_fixture_profile(m);

    SmdpConfig smdpConfig;
    smdpConfig.address = spec.smdpAddress;
    smdpConfig.oid = smdpOid;
    smdpConfig.capability = spec.smdpCapability;
    smdpConfig.rejectAllEligibility = spec.rejectAllEligibility;
    smdp = std::make_unique<Smdp>(smdpConfig, dpauthKeys, dpauthCert, dppbKeys, dppbCert,
                                  smdpStore, clock, rootRng.derive("smdp"));
    // Stand-in eligibility policy: the operator allow-lists the fixture's
    // device model, so a mangled TAC is an ineligible device.
    const std::string expectedTac = "35290611";
    smdp->set_eligibility([expectedTac](const msg::DeviceInfo& device, const msg::EuiccInfo2&) {
        return device.tac == expectedTac;
    });

    for (const auto& o : spec.orders) {
        ProfileOrder order;
        order.matchingId = o.matchingId;
        order.iccid = iccid_from_digits(o.iccidDigits);
        order.eid = o.eid == "auto" ? euicc->eid() : o.eid;
        order.ccRequired = o.ccRequired;
        order.confirmationCode = o.confirmationCode;
        order.expired = o.expired;
        order.viaSmds = o.viaSmds;
        order.maxAttempts = o.maxAttempts;
        order.metadata = o.metadata;
        smdp->add_order(order);
    }

    LpaConfig lpaConfig;
    if (spec.allowedRootIdHex) {
        Bytes raw = from_hex(*spec.allowedRootIdHex);
        lpaConfig.allowedRootId = pki::PublicKeyId::from_bytes(raw);
    }
    lpaConfig.defaultSmdpAddress = spec.defaultSmdpAddress;
    lpaConfig.timeCheckEnabled = spec.timeCheckEnabled;
    lpaConfig.capability = spec.lpaCapability;
    lpaConfig.serverCapability = spec.smdpCapability;
    lpaConfig.confirmationCode = spec.confirmationCode;
    std::string consent = spec.consent;
    lpaConfig.consentHook = [consent](const msg::ProfileMetadata&) {
        if (consent == "reject") return Consent::reject;
        if (consent == "postpone") return Consent::postpone;
        return Consent::accept;
    };

    transport->route(euicc->address(), euicc.get());
    transport->route(smdp->address(), smdp.get());

    lpa = std::make_unique<Lpa>(lpaConfig, *transport, euicc->address());

    eim = std::make_unique<Eim>(EimConfig{}, eimKeys, *transport);
    if (!spec.devices.empty()) {
        const DeviceSpec& dev = spec.devices.front();
        LpaConfig ipaConfig = lpaConfig;  // the device mirrors the LPA settings
        ipa = std::make_unique<Ipa>(dev.deviceId, euicc->address(), ipaConfig, *transport,
                                    dev.mode);
        std::string ipaAddress = "ipa:" + dev.deviceId;
        transport->route(ipaAddress, ipa.get());
        EimDevice registered;
        registered.deviceId = dev.deviceId;
        registered.ipaAddress = ipaAddress;
        registered.mode = dev.mode;
        registered.capability = spec.lpaCapability;
        eim->register_device(registered);
    }

    for (const auto& rule : spec.faults) transport->add_fault(rule);

    transport->set_revoke_hook([this](std::uint64_t serial) { revoke_serial(serial); });
    transport->set_expire_hook([this](std::uint64_t serial) { expire_serial(serial); });
}

const pki::Certificate* World::cert_by_serial(std::uint64_t serial) const {
    for (const pki::Certificate* c :
         {&ciCert, &eumCert, &euiccCert, &dpauthCert, &dppbCert, &dsauthCert, &eimCert}) {
        if (c->serial == serial) return c;
    }
    return nullptr;
}

void World::revoke_serial(std::uint64_t serial) {
    // The signer of a certificate is the one who revokes it: eUICC certs go
    // on the EUM's list, everything else on the CI's.
    revokedSerials_.push_back(serial);
    const pki::Certificate* cert = cert_by_serial(serial);
    bool byEum = cert != nullptr && cert->authorityKeyId == eumCert.subjectKeyId;
    std::vector<std::uint64_t> ciList, eumList;
    for (std::uint64_t s : revokedSerials_) {
        const pki::Certificate* c = cert_by_serial(s);
        if (c != nullptr && c->authorityKeyId == eumCert.subjectKeyId) {
            eumList.push_back(s);
        } else {
            ciList.push_back(s);
        }
    }
    std::int64_t thisUpdate = clock->now;
    pki::Crl ciCrl = pki::issue_crl(ciKeys, ciCert, thisUpdate, thisUpdate + kCrlHorizon, ciList);
    euicc->trust_store().add_crl(ciCrl);
    smdp->trust_store().add_crl(ciCrl);
    if (byEum || !eumList.empty()) {
        pki::Crl eumCrl =
            pki::issue_crl(eumKeys, eumCert, thisUpdate, thisUpdate + kCrlHorizon, eumList);
        euicc->trust_store().add_crl(eumCrl);
        smdp->trust_store().add_crl(eumCrl);
    }
}

void World::expire_serial(std::uint64_t serial) {
    const pki::Certificate* cert = cert_by_serial(serial);
    if (cert == nullptr) return;
    if (clock->now <= cert->notAfter) clock->now = cert->notAfter + 1;
}

msg::FlowReport World::run_flow() {
    switch (spec.flow) {
        case FlowKind::auth: {
            std::string matchingId = spec.orders.empty() ? "" : spec.orders.front().matchingId;
            auto outcome = lpa->run_common_mutual_auth(spec.smdpAddress, matchingId,
                                                       spec.operationType, "");
            if (std::holds_alternative<msg::FlowReport>(outcome)) {
                return std::get<msg::FlowReport>(outcome);
            }
            msg::FlowReport report;
            report.outcome = msg::FlowReport::Outcome::authenticated;
            report.transactionId = std::get<AuthSession>(outcome).transactionId;
            return report;
        }
        case FlowKind::downloadAc: {
            msg::ActivationCode ac;
            try {
                ac = msg::ActivationCode::parse(spec.activationCode);
            } catch (const msg::BadActivationCode& e) {
                return msg::FlowReport::make_error("activationCode", 0, e.what());
            }
            return lpa->run_profile_download(ac);
        }
        case FlowKind::downloadDefault:
            return lpa->run_profile_download(DefaultSmdpSource{});
        case FlowKind::iotPush:
            return eim->push_activation_code(spec.deviceId, spec.activationCode);
        case FlowKind::iotAssisted: {
            msg::ActivationCode ac;
            try {
                ac = msg::ActivationCode::parse(spec.activationCode);
            } catch (const msg::BadActivationCode& e) {
                return msg::FlowReport::make_error("activationCode", 0, e.what());
            }
            return eim->assisted_download(spec.deviceId, ac);
        }
        case FlowKind::eimConfig: {
            auto fail = [](const char* step) {
                return msg::FlowReport::make_error("eimConfig", 0, step);
            };
            // Add when empty, via the device path.
            msg::json addBody;
            addBody["eimConfigurationData"] = to_base64(as_span(eim->configuration_data().encode()));
            msg::json resp = exchange_json(*transport, euicc->address(),
                                           msg::endpoint::kAddEimConfig, addBody, "eimConfig");
            if (!msg::EimConfigResult::from_json(resp).ok) return fail("addWhenEmpty");

            // A second add must be rejected.
            try {
                resp = exchange_json(*transport, euicc->address(), msg::endpoint::kAddEimConfig,
                                     addBody, "eimConfig");
                if (msg::EimConfigResult::from_json(resp).ok) return fail("secondAddAccepted");
            } catch (const StageError&) {
                return fail("secondAdd");
            }

            // Signed replace through the eIM.
            msg::EimOperation replaceOp;
            replaceOp.kind = msg::EimOperationKind::replaceConfig;
            msg::EimConfigurationData updated = eim->configuration_data();
            updated.eimAddress = "eim-backup.example.com";
            replaceOp.config = updated;
            auto signedOk = eim->send_config_operation(spec.deviceId,
                                                       eim->sign_eim_operation(replaceOp));
            if (!signedOk.ok) return fail("signedReplace");

            // The same operation under a wrong key must be rejected.
            msg::SignedEimOperation wrongKey = eim->sign_eim_operation(replaceOp);
            wrongKey.signature[0] ^= 0x01;
            auto rejected = eim->send_config_operation(spec.deviceId, wrongKey);
            if (rejected.ok ||
                rejected.reason != msg::EimConfigRejectReason::badSignature) {
                return fail("wrongKeyAccepted");
            }

            // Removal clears the association.
            resp = exchange_json(*transport, euicc->address(), msg::endpoint::kRemoveEimConfig,
                                 msg::json::object(), "eimConfig");
            msg::JsonView v(resp);
            if (!msg::read_header(v)) return fail("remove");
            if (euicc->eim_config().has_value()) return fail("configNotCleared");

            msg::FlowReport report;
            report.outcome = msg::FlowReport::Outcome::eimConfigured;
            return report;
        }
    }
    return msg::FlowReport::make_error("flow", 0, "unhandled flow kind");
}

bool report_matches(const msg::FlowReport& report, const std::string& expected) {
    std::size_t colon = expected.find(':');
    std::string kind = expected.substr(0, colon == std::string::npos ? expected.size() : colon);
    std::string detail = colon == std::string::npos ? "" : expected.substr(colon + 1);

    if (kind != msg::outcome_name(report.outcome)) return false;
    if (detail.empty()) return true;
    if (report.outcome == msg::FlowReport::Outcome::cancelled) {
        return report.cancelReason &&
               std::to_string(static_cast<int>(*report.cancelReason)) == detail;
    }
    if (report.outcome == msg::FlowReport::Outcome::error) {
        return report.errorStage == detail;
    }
    return false;
}

// ---------------------------------------------------------------------------
// PKI fixture file
// ---------------------------------------------------------------------------

Bytes PkiFixture::encode() const {
    tlv::Writer w;
    tlv::Writer kps;
    for (const auto& [name, kp] : keypairs) {
        tlv::Writer rec;
        rec.field_text(0x80, name);
        rec.field(0x81, as_span(kp.publicKey));
        rec.field(0x82, as_span(kp.privateKey));
        kps.raw(tlv::Writer::wrap(tag::KeyPairRecord, rec.bytes()));
    }
    w.field(0x80, kps.bytes());
    tlv::Writer certsW;
    for (const auto& c : certs) certsW.raw(c.encode());
    w.field(0x81, certsW.bytes());
    tlv::Writer crlsW;
    for (const auto& c : crls) crlsW.raw(c.encode());
    w.field(0x82, crlsW.bytes());
    tlv::Writer roots;
    for (const auto& id : rootIds) roots.field(0x80, as_span(id.id));
    w.field(0x83, roots.bytes());
    return tlv::Writer::wrap(tag::PkiFixture, w.bytes());
}

PkiFixture PkiFixture::decode(ByteSpan data) {
    tlv::Reader r(tlv::unwrap(tag::PkiFixture, data));
    PkiFixture f;
    tlv::Reader kps(r.expect(0x80));
    while (!kps.at_end()) {
        tlv::Reader rec(kps.expect(tag::KeyPairRecord));
        std::string name = rec.expect_text(0x80);
        crypto::SigKeyPair kp;
        kp.publicKey = to_array<32>(rec.expect(0x81));
        kp.privateKey = to_array<32>(rec.expect(0x82));
        rec.finish();
        f.keypairs.emplace_back(name, kp);
    }
    tlv::Reader certs(r.expect(0x81));
    while (!certs.at_end()) {
        f.certs.push_back(pki::Certificate::decode(certs.expect_raw(tag::Certificate)));
    }
    tlv::Reader crls(r.expect(0x82));
    while (!crls.at_end()) f.crls.push_back(pki::Crl::decode(crls.expect_raw(tag::Crl)));
    tlv::Reader roots(r.expect(0x83));
    while (!roots.at_end()) f.rootIds.push_back(pki::PublicKeyId::from_bytes(roots.expect(0x80)));
    r.finish();
    return f;
}

PkiFixture build_pki_fixture(std::uint64_t seed) {
    ScenarioSpec spec;
    spec.seed = seed;
    World world(spec);
    PkiFixture f;
    f.keypairs = {{"ci", world.ciKeys},         {"eum", world.eumKeys},
                  {"euicc", world.euiccKeys},   {"dpauth", world.dpauthKeys},
                  {"dppb", world.dppbKeys},     {"dsauth", world.dsauthKeys},
                  {"eim", world.eimKeys}};
    f.certs = {world.ciCert,   world.eumCert,    world.euiccCert, world.dpauthCert,
               world.dppbCert, world.dsauthCert, world.eimCert};
    f.crls = {pki::issue_crl(world.ciKeys, world.ciCert, kClockStart - 86'400,
                             kClockStart + kCrlHorizon, {})};
    f.rootIds = {world.ciCert.subjectKeyId};
    return f;
}

void write_pki_fixture(const PkiFixture& fixture, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw sim::IoFailure("cannot open " + path);
    Bytes raw = fixture.encode();
    out.write(reinterpret_cast<const char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
    if (!out) throw sim::IoFailure("write failed for " + path);
}

PkiFixture read_pki_fixture(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw sim::IoFailure("cannot open " + path);
    Bytes raw((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return PkiFixture::decode(raw);
}

// ---------------------------------------------------------------------------
// Golden vectors
// ---------------------------------------------------------------------------

std::vector<std::pair<std::string, Bytes>> golden_vector_samples() {
    std::vector<std::pair<std::string, Bytes>> out;

    msg::TransactionId txid;
    for (std::size_t i = 0; i < 16; i++) txid.id[i] = static_cast<std::uint8_t>(i);
    Octet16 sixteen{};
    sixteen.fill(0x5A);
    Octet32 thirtyTwo{};
    for (std::size_t i = 0; i < 32; i++) thirtyTwo[i] = static_cast<std::uint8_t>(0xA0 + i);
    Octet64 sig{};
    for (std::size_t i = 0; i < 64; i++) sig[i] = static_cast<std::uint8_t>(i);
    pki::PublicKeyId keyId;
    for (std::size_t i = 0; i < 20; i++) keyId.id[i] = static_cast<std::uint8_t>(0x10 + i);
    Iccid iccid = iccid_from_digits("89000123456789012341");

    msg::EuiccInfo1 info1;
    info1.verificationKeyIds = {keyId};
    info1.signingKeyIds = {keyId};
    info1.capability.crlStaplingV3Support = true;
    out.emplace_back("EuiccInfo1", info1.encode());

    msg::EuiccInfo2 info2;
    info2.info1 = info1;
    info2.svn = {3, 0, 0};
    info2.freeNonVolatileMemory = 4'194'304;
    info2.installedProfileCount = 1;
    out.emplace_back("EuiccInfo2", info2.encode());

    msg::ServerSigned1 serverSigned1;
    serverSigned1.transactionId = txid;
    serverSigned1.euiccChallenge = sixteen;
    serverSigned1.serverAddress = "smdp.example.com";
    serverSigned1.serverChallenge = sixteen;
    out.emplace_back("ServerSigned1", serverSigned1.encode());

    msg::DeviceInfo deviceInfo;
    deviceInfo.tac = "35290611";
    deviceInfo.deviceCapabilities.crlStaplingV3Support = true;
    out.emplace_back("DeviceInfo", deviceInfo.encode());

    msg::CtxParams1 ctx;
    ctx.matchingId = "MATCH-001";
    ctx.deviceInfo = deviceInfo;
    ctx.operationType = msg::OperationType::profileDownload;
    out.emplace_back("CtxParams1", ctx.encode());

    msg::EuiccSigned1 euiccSigned1;
    euiccSigned1.transactionId = txid;
    euiccSigned1.serverAddress = "smdp.example.com";
    euiccSigned1.serverChallenge = sixteen;
    euiccSigned1.euiccInfo2 = info2;
    euiccSigned1.ctxParams1 = ctx;
    out.emplace_back("EuiccSigned1", euiccSigned1.encode());

    msg::SmdpSigned2 smdpSigned2;
    smdpSigned2.transactionId = txid;
    smdpSigned2.ccRequiredFlag = true;
    smdpSigned2.bppEuiccOtpk = thirtyTwo;
    out.emplace_back("SmdpSigned2", smdpSigned2.encode());

    msg::EuiccSigned2 euiccSigned2;
    euiccSigned2.transactionId = txid;
    euiccSigned2.euiccOtpk = thirtyTwo;
    euiccSigned2.hashCc = crypto::sha256(as_span(std::string("sample")));
    out.emplace_back("EuiccSigned2", euiccSigned2.encode());

    msg::ProfileMetadata metadata;
    metadata.iccid = iccid;
    metadata.profileName = "Desk Profile";
    metadata.serviceProviderName = "Desk Telecom";
    metadata.pprs.ppr1 = true;
    out.emplace_back("ProfileMetadata", metadata.encode());

    msg::InitialiseSecureChannel isc;
    isc.transactionId = txid;
    isc.smdpOtpkKa = thirtyTwo;
    isc.signature = sig;
    out.emplace_back("InitialiseSecureChannel", isc.encode());

    msg::SealedSegment segment;
    segment.payload = {0xDE, 0xAD, 0xBE, 0xEF};
    segment.mac = sixteen;
    out.emplace_back("SealedSegment", segment.encode());

    msg::BoundProfilePackage bpp;
    bpp.initialiseSecureChannel = isc;
    bpp.configureIsdp = segment;
    bpp.storeMetadata.payload = metadata.encode();
    bpp.storeMetadata.mac = sixteen;
    bpp.loadProfileElements = {segment, segment};
    out.emplace_back("BoundProfilePackage", bpp.encode());

    msg::NotificationMetadata notif;
    notif.seqNumber = 1;
    notif.iccid = iccid;
    out.emplace_back("NotificationMetadata", notif.encode());

    msg::SuccessResult success;
    success.isdpAid = {0xA0, 0x00, 0x00, 0x05, 0x59, 0x01, 0x02, 0x03};
    out.emplace_back("SuccessResult", success.encode());

    msg::ErrorResult error;
    error.bppCommandId = msg::BppCommandId::loadProfileElements;
    error.errorReason = msg::ErrorReason::installFailedDueToInsufficientMemoryForProfile;
    out.emplace_back("ErrorResult", error.encode());

    msg::ProfileInstallationResultData pirData;
    pirData.transactionId = txid;
    pirData.notificationMetadata = notif;
    pirData.smdpOid = "1.3.6.1.4.1.54321.1";
    pirData.finalResult = success;
    out.emplace_back("ProfileInstallationResultData", pirData.encode());

    msg::ProfileInstallationResult pir;
    pir.data = pirData;
    pir.euiccSignPIR = sig;
    out.emplace_back("ProfileInstallationResult", pir.encode());

    msg::CancelSessionRequest cancelReq;
    cancelReq.transactionId = txid;
    cancelReq.reason = msg::CancelSessionReason::sessionAborted;
    out.emplace_back("CancelSessionRequest", cancelReq.encode());

    msg::EuiccCancelSessionSigned cancelSigned;
    cancelSigned.transactionId = txid;
    cancelSigned.smdpOid = "1.3.6.1.4.1.54321.1";
    cancelSigned.reason = msg::CancelSessionReason::pprNotAllowed;
    out.emplace_back("EuiccCancelSessionSigned", cancelSigned.encode());

    msg::CancelSessionResponse cancelResp;
    msg::CancelSessionResponseOk cancelOk;
    cancelOk.euiccCancelSessionSigned = cancelSigned;
    cancelOk.euiccCancelSessionSignature = sig;
    cancelResp.result = cancelOk;
    out.emplace_back("CancelSessionResponse", cancelResp.encode());

    msg::EimConfigurationData eimData;
    eimData.eimId = "eim-1";
    eimData.eimPublicKey = thirtyTwo;
    eimData.eimAddress = "eim.example.com";
    out.emplace_back("EimConfigurationData", eimData.encode());

    msg::EimOperation eimOp;
    eimOp.kind = msg::EimOperationKind::replaceConfig;
    eimOp.config = eimData;
    out.emplace_back("EimOperation", eimOp.encode());

    msg::SignedEimOperation signedOp;
    signedOp.operation = eimOp;
    signedOp.signature = sig;
    out.emplace_back("SignedEimOperation", signedOp.encode());

    msg::ActivationCode ac;
    ac.version = 1;
    ac.smdpAddress = "smdp.example.com";
    ac.matchingId = "MATCH-001";
    ac.oid = "1.3.6.1.4.1.54321.1";
    out.emplace_back("ActivationCode", ac.encode());

    msg::FlowReport report = msg::FlowReport::make_installed(txid);
    out.emplace_back("FlowReport", report.encode());

    pki::CertTemplate certTpl;
    certTpl.serial = 42;
    certTpl.subjectName = "Vector CI";
    certTpl.role = pki::CertRole::ci;
    certTpl.subjectPublicKey = crypto::generate_keypair(thirtyTwo).publicKey;
    certTpl.notBefore = kCertNotBefore;
    certTpl.notAfter = kRootNotAfter;
    pki::Certificate cert =
        pki::issue_certificate(crypto::generate_keypair(thirtyTwo), nullptr, certTpl);
    out.emplace_back("Certificate", cert.encode());

    pki::Crl crl = pki::issue_crl(crypto::generate_keypair(thirtyTwo), cert, kClockStart,
                                  kClockStart + kCrlHorizon, {2, 5});
    out.emplace_back("Crl", crl.encode());

    return out;
}

}  // namespace rsplab

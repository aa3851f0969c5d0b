#pragma once

#include "rsplab/scenario.hpp"

namespace fx {

using namespace rsplab;

inline msg::json base_scenario() {
    return msg::json{
        {"seed", 7},
        {"flow", "download-ac"},
        {"smdp", {{"address", "smdp.example.com"}}},
        {"orders",
         {{{"matchingId", "MATCH-001"},
           {"iccid", "89000123456789012341"},
           {"metadata",
            {{"profileName", "Test Plan"}, {"serviceProviderName", "Desk Telecom"}}}}}},
        {"activationCode", "LPA:1$smdp.example.com$MATCH-001"},
        {"expected", "installed"},
    };
}

inline msg::json merged(msg::json overrides) {
    msg::json j = base_scenario();
    j.merge_patch(overrides);
    return j;
}

inline ScenarioSpec spec_of(const msg::json& j) { return ScenarioSpec::from_json(j); }

/// The client-side message set accumulated while driving the ops directly
/// (no transport), so tests can mutate any piece before the next step.
struct AuthDrive {
    msg::EuiccInfo1 info1;
    Octet16 challenge{};
    msg::InitiateAuthenticationOk init;
    msg::AuthenticateResponseOk authOk;
    msg::AuthenticateClientOk clientOk;
};

inline msg::AuthenticateServerRequest make_auth_server_request(
    const msg::InitiateAuthenticationOk& init, const std::string& matchingId,
    msg::RspCapability lpaCapability = {}) {
    msg::AuthenticateServerRequest req;
    req.serverSigned1 = init.serverSigned1;
    req.serverSignature1 = init.serverSignature1;
    req.euiccCiPKIdToBeUsed = init.euiccCiPKIdToBeUsed;
    req.serverCertificate = init.serverCertificate;
    req.ctxParams1.matchingId = matchingId;
    req.ctxParams1.deviceInfo.tac = "35290611";
    req.ctxParams1.deviceInfo.deviceCapabilities = lpaCapability;
    req.ctxParams1.operationType = msg::OperationType::profileDownload;
    req.otherCertsInChain = init.otherCertsInChain;
    req.crlList = init.crlList;
    return req;
}

/// Runs steps 1..16 against the world's actors directly; REQUIREs success.
AuthDrive drive_auth(World& world, const std::string& matchingId,
                     msg::RspCapability lpaCapability = {});

inline AuthDrive drive_auth(World& world, const std::string& matchingId,
                            msg::RspCapability lpaCapability) {
    AuthDrive d;
    d.info1 = world.euicc->get_euicc_info1();
    d.challenge = world.euicc->get_euicc_challenge();

    msg::InitiateAuthenticationRequest initReq;
    initReq.euiccChallenge = d.challenge;
    initReq.euiccInfo1 = d.info1;
    initReq.smdpAddress = world.spec.smdpAddress;
    initReq.lpaRspCapability = lpaCapability;
    auto initResp = world.smdp->initiate_authentication(initReq);
    if (!initResp.ok()) throw std::runtime_error("initiate_authentication failed in fixture");
    d.init = std::get<msg::InitiateAuthenticationOk>(initResp.result);

    auto authResp = world.euicc->authenticate_server(
        make_auth_server_request(d.init, matchingId, lpaCapability));
    if (!authResp.ok()) throw std::runtime_error("authenticate_server failed in fixture");
    d.authOk = std::get<msg::AuthenticateResponseOk>(authResp.result);

    msg::AuthenticateClientRequest clientReq;
    clientReq.transactionId = d.init.transactionId;
    clientReq.euiccSigned1 = d.authOk.euiccSigned1;
    clientReq.euiccSignature1 = d.authOk.euiccSignature1;
    clientReq.euiccCertificate = d.authOk.euiccCertificate;
    clientReq.nextCertInChain = d.authOk.nextCertInChain;
    clientReq.otherCertsInChain = d.authOk.otherCertsInChain;
    auto clientResp = world.smdp->authenticate_client(clientReq);
    if (!clientResp.ok()) throw std::runtime_error("authenticate_client failed in fixture");
    d.clientOk = std::get<msg::AuthenticateClientOk>(clientResp.result);
    return d;
}

inline msg::PrepareDownloadResponseOk drive_prepare(World& world, const AuthDrive& d,
                                                    std::optional<Octet32> hashCc = {}) {
    msg::PrepareDownloadRequest req;
    req.smdpSigned2 = *d.clientOk.smdpSigned2;
    req.smdpSignature2 = *d.clientOk.smdpSignature2;
    req.smdpCertificate = *d.clientOk.smdpCertificate;
    req.hashCc = hashCc;
    auto resp = world.euicc->prepare_download(req);
    if (!resp.ok()) throw std::runtime_error("prepare_download failed in fixture");
    return std::get<msg::PrepareDownloadResponseOk>(resp.result);
}

inline msg::BoundProfilePackage drive_get_bpp(World& world, const AuthDrive& d,
                                              const msg::PrepareDownloadResponseOk& prep) {
    msg::GetBoundProfilePackageRequest req;
    req.transactionId = d.init.transactionId;
    req.prepareDownloadResponse.result = prep;
    auto resp = world.smdp->get_bound_profile_package(req);
    if (!resp.ok()) throw std::runtime_error("get_bound_profile_package failed in fixture");
    return std::get<msg::GetBoundProfilePackageOk>(resp.result).boundProfilePackage;
}

/// Feeds the whole package segment-wise; returns the final result.
inline msg::ProfileInstallationResult drive_load(World& world,
                                                 const msg::BoundProfilePackage& bpp) {
    auto feed = [&](msg::BppCommandId cmd, Bytes segment, bool last) {
        msg::LoadBppSegmentRequest req;
        req.bppCommandId = cmd;
        req.isLastSegment = last;
        req.segment = std::move(segment);
        return world.euicc->load_bpp_segment(req);
    };
    auto r = feed(msg::BppCommandId::initialiseSecureChannel, bpp.initialiseSecureChannel.encode(),
                  false);
    if (r.profileInstallationResult) return *r.profileInstallationResult;
    r = feed(msg::BppCommandId::configureIsdp, bpp.configureIsdp.encode(), false);
    if (r.profileInstallationResult) return *r.profileInstallationResult;
    r = feed(msg::BppCommandId::storeMetadata, bpp.storeMetadata.encode(), false);
    if (r.profileInstallationResult) return *r.profileInstallationResult;
    for (std::size_t i = 0; i < bpp.loadProfileElements.size(); i++) {
        bool last = i + 1 == bpp.loadProfileElements.size();
        r = feed(msg::BppCommandId::loadProfileElements, bpp.loadProfileElements[i].encode(), last);
        if (r.profileInstallationResult) return *r.profileInstallationResult;
    }
    throw std::runtime_error("no installation result came back");
}

}  // namespace fx

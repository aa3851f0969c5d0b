#include "rsplab/lpa.hpp"

#include <algorithm>

namespace rsplab {

namespace ep = msg::endpoint;

std::optional<msg::CancelSessionReason> check_profile_rules(
    const msg::ProfileMetadata& metadata, const std::vector<msg::PprSet>& ratPermitted,
    std::size_t installedProfileCount, const PeerCapabilities& caps) {
    using Reason = msg::CancelSessionReason;

    if (metadata.pprs.any()) {
        bool allowed = std::any_of(ratPermitted.begin(), ratPermitted.end(),
                                   [&](const msg::PprSet& p) { return metadata.pprs.subset_of(p); });
        if (!allowed) return Reason::pprNotAllowed;
    }
    if (metadata.pprs.ppr1 && installedProfileCount > 0) return Reason::pprNotAllowed;
    if (metadata.lprConfigPresent && !(caps.lpa.lprSupport && caps.euicc.lprSupport)) {
        return Reason::lprNotSupported;
    }
    if (metadata.profileName.empty() || metadata.serviceProviderName.empty()) {
        bool both = caps.euicc.cancelForEmptySpnPnSupport && caps.server.cancelForEmptySpnPnSupport;
        return both ? Reason::emptyProfileOrSpName : Reason::undefinedReason;
    }
    return std::nullopt;
}

msg::json exchange_json(sim::Transport& transport, const std::string& toAddress,
                        const std::string& endpoint, const msg::json& body, const char* stage) {
    Bytes respBytes;
    try {
        respBytes = transport.send(toAddress, wire::make_request(endpoint, body).encode());
    } catch (const sim::Dropped& e) {
        throw StageError(stage, 0, e.what());
    } catch (const sim::Unroutable& e) {
        throw StageError(stage, 0, e.what());
    }

    msg::json respBody;
    try {
        wire::Envelope env = wire::Envelope::decode(respBytes);
        if (env.kind != wire::Envelope::Kind::response) throw wire::BadEnvelope("not a response");
        respBody = env.body_json();
    } catch (const std::exception& e) {
        throw StageError(stage, 0, std::string("BadEnvelope: ") + e.what());
    }

    // Envelope-level failures ("error" beside a Failed header) stop the
    // stage here; protocol-level error bodies are parsed by the caller.
    if (respBody.is_object() && respBody.contains("error")) {
        const auto& err = respBody.at("error");
        throw StageError(stage, 0, err.is_string() ? err.get<std::string>() : "peer error");
    }
    return respBody;
}

Lpa::Lpa(LpaConfig config, sim::Transport& transport, std::string euiccAddress)
    : config_(std::move(config)), transport_(transport), euiccAddress_(std::move(euiccAddress)) {}

std::variant<AuthSession, msg::FlowReport> Lpa::run_common_mutual_auth(
    const std::string& smdpAddress, const std::string& matchingId,
    msg::OperationType operationType, const std::string& expectedOid) {
    try {
        // euiccInfo1, optionally narrowed to the allowed root.
        msg::json infoBody = exchange_json(transport_, euiccAddress_, ep::kGetEuiccInfo1,
                                           msg::json::object(), "euiccInfo1");
        msg::JsonView infoView(infoBody);
        (void)msg::read_header(infoView);
        msg::EuiccInfo1 euiccInfo1 = msg::EuiccInfo1::decode(as_span(infoView.get_b64("euiccInfo1")));
        infoView.done();

        if (config_.allowedRootId) {
            auto keep = [&](const pki::PublicKeyId& id) { return id == *config_.allowedRootId; };
            std::erase_if(euiccInfo1.verificationKeyIds,
                          [&](const pki::PublicKeyId& id) { return !keep(id); });
            std::erase_if(euiccInfo1.signingKeyIds,
                          [&](const pki::PublicKeyId& id) { return !keep(id); });
            if (euiccInfo1.verificationKeyIds.empty() || euiccInfo1.signingKeyIds.empty()) {
                throw StageError("euiccInfo1", 0, "noAvailableIdentifier");
            }
        }

        msg::json challengeBody = exchange_json(transport_, euiccAddress_, ep::kGetEuiccChallenge,
                                                msg::json::object(), "euiccChallenge");
        msg::JsonView challengeView(challengeBody);
        (void)msg::read_header(challengeView);
        Octet16 euiccChallenge = to_array<16>(as_span(challengeView.get_b64("euiccChallenge", 16)));
        challengeView.done();

        transport_.mark("connection-open " + smdpAddress);

        msg::InitiateAuthenticationRequest initReq;
        initReq.euiccChallenge = euiccChallenge;
        initReq.euiccInfo1 = euiccInfo1;
        initReq.smdpAddress = smdpAddress;
        initReq.lpaRspCapability = config_.capability;
        msg::json initBody = exchange_json(transport_, smdpAddress, ep::kInitiateAuthentication,
                                           initReq.to_json(), "initiateAuth");
        auto initResp = msg::InitiateAuthenticationResponse::from_json(initBody);
        if (!initResp.ok()) {
            throw StageError("initiateAuth", 0, std::get<std::string>(initResp.result));
        }
        const auto& init = std::get<msg::InitiateAuthenticationOk>(initResp.result);

        // Client-side verification of the InitiateAuthentication response.
        if (!expectedOid.empty() && init.serverCertificate.oid != expectedOid) {
            throw StageError("initiateAuth", 0, "oidMismatch");
        }
        if (init.serverSigned1.serverAddress != smdpAddress) {
            throw StageError("initiateAuth", 0, "serverAddressMismatch");
        }
        pki::PublicKeyId serverRoot = init.otherCertsInChain.empty()
                                          ? init.serverCertificate.authorityKeyId
                                          : init.otherCertsInChain.back().authorityKeyId;
        if (config_.allowedRootId && serverRoot != *config_.allowedRootId) {
            throw StageError("initiateAuth", 0, "allowedRootMismatch");
        }
        if (config_.capability.euiccCiUpdateSupport) {
            bool known = std::find(euiccInfo1.verificationKeyIds.begin(),
                                   euiccInfo1.verificationKeyIds.end(),
                                   serverRoot) != euiccInfo1.verificationKeyIds.end();
            if (!known) throw StageError("initiateAuth", 0, "serverRootNotInVerificationList");
        }
        if (config_.timeCheckEnabled) {
            std::int64_t now = transport_.clock().now;
            auto inWindow = [&](const pki::Certificate& c) {
                return c.notBefore <= now && now <= c.notAfter;
            };
            if (!inWindow(init.serverCertificate)) throw StageError("initiateAuth", 0, "certTimeWindow");
            for (const auto& c : init.otherCertsInChain) {
                if (!inWindow(c)) throw StageError("initiateAuth", 0, "certTimeWindow");
            }
            for (const auto& crl : init.crlList) {
                if (crl.thisUpdate > now || crl.nextUpdate < now) {
                    throw StageError("initiateAuth", 0, "crlTimeWindow");
                }
            }
        }

        msg::AuthenticateServerRequest authReq;
        authReq.serverSigned1 = init.serverSigned1;
        authReq.serverSignature1 = init.serverSignature1;
        authReq.euiccCiPKIdToBeUsed = init.euiccCiPKIdToBeUsed;
        authReq.serverCertificate = init.serverCertificate;
        authReq.ctxParams1.matchingId = matchingId;
        authReq.ctxParams1.deviceInfo.tac = config_.tac;
        authReq.ctxParams1.deviceInfo.deviceCapabilities = config_.capability;
        authReq.ctxParams1.operationType = operationType;
        authReq.otherCertsInChain = init.otherCertsInChain;
        authReq.crlList = init.crlList;
        msg::json authBody = exchange_json(transport_, euiccAddress_, ep::kAuthenticateServer,
                                           authReq.to_json(), "authenticateServer");
        auto authResp = msg::AuthenticateServerResponse::from_json(authBody);
        if (!authResp.ok()) {
            const auto& err = std::get<msg::AuthenticateResponseError>(authResp.result);
            throw StageError("authenticateServer",
                             static_cast<std::int64_t>(err.authenticateErrorCode),
                             "authenticateErrorCode");
        }
        const auto& authOk = std::get<msg::AuthenticateResponseOk>(authResp.result);

        msg::AuthenticateClientRequest clientReq;
        clientReq.transactionId = init.transactionId;
        clientReq.euiccSigned1 = authOk.euiccSigned1;
        clientReq.euiccSignature1 = authOk.euiccSignature1;
        clientReq.euiccCertificate = authOk.euiccCertificate;
        clientReq.nextCertInChain = authOk.nextCertInChain;
        clientReq.otherCertsInChain = authOk.otherCertsInChain;

        // Any failure at this step -- an error status, a garbled reply, a
        // dropped message -- aborts the session on the eUICC.
        auto abort_session = [&](std::int64_t code, const std::string& name) {
            msg::FlowReport report =
                cancel_session(init.transactionId, msg::CancelSessionReason::sessionAborted,
                               authOk.euiccCertificate);
            if (report.outcome == msg::FlowReport::Outcome::cancelled) {
                report.errorStage = "authenticateClient";
                report.errorCode = code;
                report.errorName = name;
            }
            return report;
        };

        msg::AuthenticateClientResponse clientResp;
        try {
            msg::json clientBody = exchange_json(transport_, smdpAddress, ep::kAuthenticateClient,
                                                 clientReq.to_json(), "authenticateClient");
            clientResp = msg::AuthenticateClientResponse::from_json(clientBody);
        } catch (const StageError& e) {
            return abort_session(e.code, e.name);
        } catch (const msg::BadMessage& e) {
            return abort_session(0, e.what());
        }
        if (!clientResp.ok()) {
            auto code = std::get<msg::AuthenticateClientError>(clientResp.result);
            return abort_session(static_cast<std::int64_t>(code), "authenticateClientError");
        }
        if (std::get<msg::AuthenticateClientOk>(clientResp.result).transactionId !=
            init.transactionId) {
            return abort_session(0, "transactionIdEchoMismatch");
        }

        const auto& clientOk = std::get<msg::AuthenticateClientOk>(clientResp.result);
        if (clientOk.bare()) {
            // Nothing but the TransactionID came back: abort the session.
            if (operationType == msg::OperationType::rpm) {
                notes_.push_back("rpm session answered with bare TransactionID");
            }
            msg::FlowReport report = cancel_session(
                init.transactionId, msg::CancelSessionReason::sessionAborted,
                authOk.euiccCertificate);
            if (report.outcome == msg::FlowReport::Outcome::cancelled) {
                report.errorName = "bareTransactionId";
            }
            return report;
        }

        AuthSession session;
        session.transactionId = init.transactionId;
        session.smdpAddress = smdpAddress;
        session.euiccInfo1 = euiccInfo1;
        session.euiccInfo2 = authOk.euiccSigned1.euiccInfo2;
        session.serverCapability = config_.serverCapability;
        session.euiccCertificate = authOk.euiccCertificate;
        session.clientOk = clientOk;
        return session;
    } catch (const StageError& e) {
        return msg::FlowReport::make_error(e.stage, e.code, e.name);
    } catch (const std::exception& e) {
        return msg::FlowReport::make_error("internal", 0, e.what());
    }
}

msg::FlowReport Lpa::cancel_session(const msg::TransactionId& txid,
                                    msg::CancelSessionReason reason,
                                    const pki::Certificate& euiccCert) {
    try {
        msg::CancelSessionRequest req;
        req.transactionId = txid;
        req.reason = reason;
        msg::json body = exchange_json(transport_, euiccAddress_, ep::kCancelSession,
                                       msg::cancel_session_request_to_json(req), "cancelSession");
        auto resp = msg::cancel_session_response_from_json(body);
        if (!resp.ok()) {
            auto code = std::get<msg::CancelSessionRespError>(resp.result);
            return msg::FlowReport::make_error("cancelSession", static_cast<std::int64_t>(code),
                                               "cancelSessionResponseError");
        }
        const auto& ok = std::get<msg::CancelSessionResponseOk>(resp.result);
        if (ok.euiccCancelSessionSigned.reason != reason ||
            ok.euiccCancelSessionSigned.transactionId != txid ||
            !crypto::verify(euiccCert.subjectPublicKey, ok.euiccCancelSessionSigned.encode(),
                            ok.euiccCancelSessionSignature)) {
            return msg::FlowReport::make_error("cancelSession", 0, "cancelEchoInvalid");
        }
        return msg::FlowReport::make_cancelled(reason, txid);
    } catch (const StageError& e) {
        return msg::FlowReport::make_error(e.stage, e.code, e.name);
    }
}

msg::FlowReport Lpa::run_profile_download(const DownloadSource& source) {
    std::string smdpAddress;
    std::string matchingId;
    std::string expectedOid;
    bool viaSmds = false;

    if (std::holds_alternative<msg::ActivationCode>(source)) {
        const auto& ac = std::get<msg::ActivationCode>(source);
        smdpAddress = ac.smdpAddress;
        matchingId = ac.matchingId;
        expectedOid = ac.oid;
    } else if (std::holds_alternative<DefaultSmdpSource>(source)) {
        if (!config_.defaultSmdpAddress) {
            return msg::FlowReport::make_error("source", 0, "noDefaultSmdpAddress");
        }
        smdpAddress = *config_.defaultSmdpAddress;
    } else {
        const auto& smds = std::get<SmdsSource>(source);
        smdpAddress = smds.smdpAddress;
        matchingId = smds.matchingId;
        viaSmds = true;
    }

    return download_with(smdpAddress, matchingId, expectedOid, viaSmds);
}

msg::FlowReport Lpa::download_with(const std::string& smdpAddress, const std::string& matchingId,
                                   const std::string& expectedOid, bool viaSmds) {
    (void)viaSmds;
    auto authOutcome = run_common_mutual_auth(smdpAddress, matchingId,
                                              msg::OperationType::profileDownload, expectedOid);
    if (std::holds_alternative<msg::FlowReport>(authOutcome)) {
        return std::get<msg::FlowReport>(authOutcome);
    }
    AuthSession session = std::get<AuthSession>(authOutcome);
    const msg::TransactionId txid = session.transactionId;

    try {
        if (!session.clientOk.profileMetadata || !session.clientOk.smdpSigned2 ||
            !session.clientOk.smdpSignature2 || !session.clientOk.smdpCertificate) {
            throw StageError("authenticateClient", 0, "incompleteAuthenticateClientOk");
        }
        const msg::ProfileMetadata& metadata = *session.clientOk.profileMetadata;
        const msg::SmdpSigned2& smdpSigned2 = *session.clientOk.smdpSigned2;
        if (smdpSigned2.rpmPending) notes_.push_back("rpmPending ignored (rpm not executed)");

        // Install-permission checks against the RAT and the profile list.
        msg::json ratBody = exchange_json(transport_, euiccAddress_, ep::kGetRat,
                                          msg::json::object(), "getRat");
        msg::JsonView ratView(ratBody);
        (void)msg::read_header(ratView);
        std::vector<msg::PprSet> rat;
        const msg::json& ratArr = ratView.get("ratPermitted");
        if (!ratArr.is_array()) throw StageError("getRat", 0, "badRat");
        for (const auto& item : ratArr) {
            if (!item.is_number_integer()) throw StageError("getRat", 0, "badRat");
            rat.push_back(msg::PprSet::from_byte(static_cast<std::uint8_t>(item.get<int>())));
        }
        ratView.done();

        msg::json profBody = exchange_json(transport_, euiccAddress_, ep::kGetProfilesInfo,
                                           msg::json::object(), "getProfilesInfo");
        msg::JsonView profView(profBody);
        (void)msg::read_header(profView);
        std::int64_t installedCount = profView.get_int("installedProfileCount");
        profView.done();
        // Cross-check against the count the eUICC put under signature.
        if (installedCount < 0 || static_cast<std::uint64_t>(installedCount) !=
                                      session.euiccInfo2.installedProfileCount) {
            throw StageError("getProfilesInfo", 0, "profileCountMismatch");
        }

        PeerCapabilities caps;
        caps.euicc = session.euiccInfo1.capability;
        caps.server = session.serverCapability;
        caps.lpa = config_.capability;
        if (auto reason = check_profile_rules(metadata, rat,
                                              static_cast<std::size_t>(installedCount), caps)) {
            return cancel_session(txid, *reason, session.euiccCertificate);
        }

        consentCalls_++;
        switch (config_.consentHook(metadata)) {
            case Consent::accept: break;
            case Consent::reject:
                return cancel_session(txid, msg::CancelSessionReason::endUserRejection,
                                      session.euiccCertificate);
            case Consent::postpone:
                return cancel_session(txid, msg::CancelSessionReason::postponed,
                                      session.euiccCertificate);
        }

        msg::PrepareDownloadRequest prepReq;
        prepReq.smdpSigned2 = smdpSigned2;
        prepReq.smdpSignature2 = *session.clientOk.smdpSignature2;
        prepReq.smdpCertificate = *session.clientOk.smdpCertificate;
        if (smdpSigned2.ccRequiredFlag && config_.confirmationCode) {
            prepReq.hashCc = msg::compute_hash_cc(*config_.confirmationCode, txid);
        }
        msg::json prepBody = exchange_json(transport_, euiccAddress_, ep::kPrepareDownload,
                                           prepReq.to_json(), "prepareDownload");
        auto prepResp = msg::PrepareDownloadResponse::from_json(prepBody);
        if (!prepResp.ok()) {
            const auto& err = std::get<msg::PrepareDownloadResponseError>(prepResp.result);
            throw StageError("prepareDownload", static_cast<std::int64_t>(err.downloadErrorCode),
                             "downloadErrorCode");
        }

        msg::GetBoundProfilePackageRequest bppReq;
        bppReq.transactionId = txid;
        bppReq.prepareDownloadResponse = prepResp;
        msg::json bppBody = exchange_json(transport_, session.smdpAddress,
                                          ep::kGetBoundProfilePackage, bppReq.to_json(), "getBpp");
        auto bppResp = msg::GetBoundProfilePackageResponse::from_json(bppBody);
        if (!bppResp.ok()) {
            auto code = std::get<msg::GetBoundProfilePackageError>(bppResp.result);
            throw StageError("getBpp", static_cast<std::int64_t>(code),
                             "getBoundProfilePackageError");
        }
        const auto& bppOk = std::get<msg::GetBoundProfilePackageOk>(bppResp.result);
        if (bppOk.transactionId != txid) {
            throw StageError("getBpp", 0, "transactionIdEchoMismatch");
        }
        const auto& bpp = bppOk.boundProfilePackage;

        // The metadata that rides inside the package must be what consent
        // was given for.
        msg::ProfileMetadata bppMetadata;
        try {
            bppMetadata = msg::ProfileMetadata::decode(bpp.storeMetadata.payload);
        } catch (const std::exception&) {
            return cancel_session(txid, msg::CancelSessionReason::metadataMismatch,
                                  session.euiccCertificate);
        }
        if (bppMetadata != metadata) {
            return cancel_session(txid, msg::CancelSessionReason::metadataMismatch,
                                  session.euiccCertificate);
        }

        std::optional<msg::ProfileInstallationResult> pir;
        auto loadSegment = [&](msg::BppCommandId command, Bytes segment, bool last) {
            msg::LoadBppSegmentRequest segReq;
            segReq.bppCommandId = command;
            segReq.isLastSegment = last;
            segReq.segment = std::move(segment);
            msg::json segBody = exchange_json(transport_, euiccAddress_,
                                              ep::kLoadBoundProfilePackage, segReq.to_json(),
                                              "loadBpp");
            auto segResp = msg::LoadBppSegmentResponse::from_json(segBody);
            if (segResp.profileInstallationResult) pir = segResp.profileInstallationResult;
        };

        loadSegment(msg::BppCommandId::initialiseSecureChannel,
                    bpp.initialiseSecureChannel.encode(), false);
        if (!pir) loadSegment(msg::BppCommandId::configureIsdp, bpp.configureIsdp.encode(), false);
        if (!pir) loadSegment(msg::BppCommandId::storeMetadata, bpp.storeMetadata.encode(), false);
        if (!pir) {
            for (std::size_t i = 0; i < bpp.loadProfileElements.size() && !pir; i++) {
                bool last = i + 1 == bpp.loadProfileElements.size();
                loadSegment(msg::BppCommandId::loadProfileElements,
                            bpp.loadProfileElements[i].encode(), last);
            }
        }
        if (!pir) throw StageError("loadBpp", 0, "noInstallationResult");

        msg::HandleNotificationRequest notifyReq;
        notifyReq.profileInstallationResult = *pir;
        msg::json notifyBody = exchange_json(transport_, session.smdpAddress,
                                             ep::kHandleNotification, notifyReq.to_json(),
                                             "handleNotification");
        auto notifyResp = msg::HandleNotificationResponse::from_json(notifyBody);
        if (!notifyResp.acknowledged) {
            throw StageError("handleNotification", 0, notifyResp.error);
        }

        msg::RemoveNotificationRequest removeReq;
        removeReq.seqNumber = pir->data.notificationMetadata.seqNumber;
        msg::json removeBody = exchange_json(transport_, euiccAddress_,
                                             ep::kRemoveNotificationFromList, removeReq.to_json(),
                                             "removeNotification");
        auto removeResp = msg::RemoveNotificationResponse::from_json(removeBody);
        if (!removeResp.removed) throw StageError("removeNotification", 0, "unknownSeqNumber");

        if (!pir->data.success()) {
            const auto& err = std::get<msg::ErrorResult>(pir->data.finalResult);
            msg::FlowReport report = msg::FlowReport::make_error(
                "loadBpp", static_cast<std::int64_t>(err.errorReason), "errorReason");
            report.transactionId = txid;
            return report;
        }
        return msg::FlowReport::make_installed(txid);
    } catch (const StageError& e) {
        msg::FlowReport report = msg::FlowReport::make_error(e.stage, e.code, e.name);
        report.transactionId = txid;
        return report;
    } catch (const std::exception& e) {
        msg::FlowReport report = msg::FlowReport::make_error("internal", 0, e.what());
        report.transactionId = txid;
        return report;
    }
}

}  // namespace rsplab

#include "rsplab/eim.hpp"

namespace rsplab {

namespace ep = msg::endpoint;

// ---------------------------------------------------------------------------
// Ipa
// ---------------------------------------------------------------------------

Ipa::Ipa(std::string deviceId, std::string euiccAddress, LpaConfig config,
         sim::Transport& transport, msg::EsipaMode mode)
    : deviceId_(std::move(deviceId)),
      euiccAddress_(std::move(euiccAddress)),
      config_(std::move(config)),
      transport_(transport),
      mode_(mode) {
    // Devices have no end user to ask.
    config_.consentHook = [](const msg::ProfileMetadata&) { return Consent::accept; };
}

msg::EsipaGetAuthInputsResponse Ipa::get_auth_inputs() {
    msg::json infoBody = exchange_json(transport_, euiccAddress_, ep::kGetEuiccInfo1,
                                       msg::json::object(), "esipa");
    msg::JsonView infoView(infoBody);
    (void)msg::read_header(infoView);
    msg::EsipaGetAuthInputsResponse resp;
    resp.euiccInfo1 = msg::EuiccInfo1::decode(as_span(infoView.get_b64("euiccInfo1")));
    infoView.done();

    msg::json challengeBody = exchange_json(transport_, euiccAddress_, ep::kGetEuiccChallenge,
                                            msg::json::object(), "esipa");
    msg::JsonView challengeView(challengeBody);
    (void)msg::read_header(challengeView);
    resp.euiccChallenge = to_array<16>(as_span(challengeView.get_b64("euiccChallenge", 16)));
    challengeView.done();

    euiccInfo1_ = resp.euiccInfo1;
    transactionId_.reset();
    euiccCertificate_.reset();
    consentedMetadata_.reset();
    signedProfileCount_.reset();
    return resp;
}

msg::EsipaAuthenticateResponse Ipa::do_authenticate(const msg::EsipaAuthenticateRequest& req) {
    msg::AuthenticateServerRequest authReq;
    authReq.serverSigned1 = req.serverSigned1;
    authReq.serverSignature1 = req.serverSignature1;
    authReq.euiccCiPKIdToBeUsed = req.euiccCiPKIdToBeUsed;
    authReq.serverCertificate = req.serverCertificate;
    authReq.ctxParams1.matchingId = req.matchingId;
    authReq.ctxParams1.deviceInfo.tac = config_.tac;
    authReq.ctxParams1.deviceInfo.deviceCapabilities = config_.capability;
    authReq.ctxParams1.operationType = msg::OperationType::profileDownload;
    authReq.otherCertsInChain = req.otherCertsInChain;
    authReq.crlList = req.crlList;

    msg::json body = exchange_json(transport_, euiccAddress_, ep::kAuthenticateServer,
                                   authReq.to_json(), "esipa");
    auto resp = msg::AuthenticateServerResponse::from_json(body);
    msg::EsipaAuthenticateResponse out;
    out.result = resp.result;
    if (resp.ok()) {
        const auto& ok = std::get<msg::AuthenticateResponseOk>(resp.result);
        transactionId_ = ok.euiccSigned1.transactionId;
        euiccCertificate_ = ok.euiccCertificate;
        signedProfileCount_ = ok.euiccSigned1.euiccInfo2.installedProfileCount;
    }
    return out;
}

void Ipa::cancel(msg::CancelSessionReason reason) {
    if (!transactionId_) return;
    msg::CancelSessionRequest req;
    req.transactionId = *transactionId_;
    req.reason = reason;
    exchange_json(transport_, euiccAddress_, ep::kCancelSession,
                  msg::cancel_session_request_to_json(req), "esipa");
}

msg::EsipaPrepareDownloadResponse Ipa::do_prepare(const msg::EsipaPrepareDownloadRequest& req) {
    msg::EsipaPrepareDownloadResponse out;

    msg::json ratBody = exchange_json(transport_, euiccAddress_, ep::kGetRat, msg::json::object(),
                                      "esipa");
    msg::JsonView ratView(ratBody);
    (void)msg::read_header(ratView);
    std::vector<msg::PprSet> rat;
    for (const auto& item : ratView.get("ratPermitted")) {
        rat.push_back(msg::PprSet::from_byte(static_cast<std::uint8_t>(item.get<int>())));
    }
    ratView.done();

    msg::json profBody = exchange_json(transport_, euiccAddress_, ep::kGetProfilesInfo,
                                       msg::json::object(), "esipa");
    msg::JsonView profView(profBody);
    (void)msg::read_header(profView);
    std::int64_t installedCount = profView.get_int("installedProfileCount");
    profView.done();
    if (signedProfileCount_ && (installedCount < 0 ||
                                static_cast<std::uint64_t>(installedCount) !=
                                    *signedProfileCount_)) {
        throw StageError("esipa", 0, "profileCountMismatch");
    }

    PeerCapabilities caps;
    caps.euicc = euiccInfo1_ ? euiccInfo1_->capability : msg::RspCapability{};
    caps.server = msg::RspCapability{};  // not conveyed over ESipa
    caps.lpa = config_.capability;
    if (auto reason = check_profile_rules(req.profileMetadata, rat,
                                          static_cast<std::size_t>(installedCount), caps)) {
        cancel(*reason);
        out.result = msg::EsipaCancelled{*reason};
        return out;
    }

    msg::PrepareDownloadRequest prepReq;
    prepReq.smdpSigned2 = req.smdpSigned2;
    prepReq.smdpSignature2 = req.smdpSignature2;
    prepReq.smdpCertificate = req.smdpCertificate;
    if (req.smdpSigned2.ccRequiredFlag && config_.confirmationCode && transactionId_) {
        prepReq.hashCc = msg::compute_hash_cc(*config_.confirmationCode, *transactionId_);
    }
    msg::json body = exchange_json(transport_, euiccAddress_, ep::kPrepareDownload,
                                   prepReq.to_json(), "esipa");
    auto resp = msg::PrepareDownloadResponse::from_json(body);
    if (resp.ok()) {
        consentedMetadata_ = req.profileMetadata;
        out.result = std::get<msg::PrepareDownloadResponseOk>(resp.result);
    } else {
        out.result = std::get<msg::PrepareDownloadResponseError>(resp.result);
    }
    return out;
}

msg::EsipaLoadBppResponse Ipa::do_load(const msg::EsipaLoadBppRequest& req) {
    msg::EsipaLoadBppResponse out;
    const msg::BoundProfilePackage& bpp = req.boundProfilePackage;

    msg::ProfileMetadata bppMetadata;
    bool metadataOk = true;
    try {
        bppMetadata = msg::ProfileMetadata::decode(bpp.storeMetadata.payload);
    } catch (const std::exception&) {
        metadataOk = false;
    }
    if (!metadataOk || !consentedMetadata_ || bppMetadata != *consentedMetadata_) {
        cancel(msg::CancelSessionReason::metadataMismatch);
        out.result = msg::EsipaCancelled{msg::CancelSessionReason::metadataMismatch};
        return out;
    }

    std::optional<msg::ProfileInstallationResult> pir;
    auto loadSegment = [&](msg::BppCommandId command, Bytes segment, bool last) {
        msg::LoadBppSegmentRequest segReq;
        segReq.bppCommandId = command;
        segReq.isLastSegment = last;
        segReq.segment = std::move(segment);
        msg::json segBody = exchange_json(transport_, euiccAddress_, ep::kLoadBoundProfilePackage,
                                          segReq.to_json(), "esipa");
        auto segResp = msg::LoadBppSegmentResponse::from_json(segBody);
        if (segResp.profileInstallationResult) pir = segResp.profileInstallationResult;
    };

    loadSegment(msg::BppCommandId::initialiseSecureChannel, bpp.initialiseSecureChannel.encode(),
                false);
    if (!pir) loadSegment(msg::BppCommandId::configureIsdp, bpp.configureIsdp.encode(), false);
    if (!pir) loadSegment(msg::BppCommandId::storeMetadata, bpp.storeMetadata.encode(), false);
    if (!pir) {
        for (std::size_t i = 0; i < bpp.loadProfileElements.size() && !pir; i++) {
            bool last = i + 1 == bpp.loadProfileElements.size();
            loadSegment(msg::BppCommandId::loadProfileElements, bpp.loadProfileElements[i].encode(),
                        last);
        }
    }
    if (!pir) throw StageError("esipa", 0, "noInstallationResult");
    out.result = *pir;
    return out;
}

msg::EsipaRemoveNotificationResponse Ipa::do_remove(std::uint64_t seqNumber) {
    msg::RemoveNotificationRequest req;
    req.seqNumber = seqNumber;
    msg::json body = exchange_json(transport_, euiccAddress_, ep::kRemoveNotificationFromList,
                                   req.to_json(), "esipa");
    msg::EsipaRemoveNotificationResponse out;
    out.removed = msg::RemoveNotificationResponse::from_json(body).removed;
    return out;
}

msg::EsipaEimConfigResponse Ipa::do_eim_config(const msg::EsipaEimConfigRequest& req) {
    msg::json body;
    body["signedEimOperation"] = to_base64(as_span(req.signedEimOperation.encode()));
    msg::json respBody = exchange_json(transport_, euiccAddress_, ep::kProcessEimOperation, body,
                                       "esipa");
    auto result = msg::EimConfigResult::from_json(respBody);
    msg::EsipaEimConfigResponse out;
    out.ok = result.ok;
    out.reason = result.reason;
    return out;
}

Bytes Ipa::handle(const Bytes& requestEnvelope) {
    try {
        wire::Envelope env = wire::Envelope::decode(requestEnvelope);
        if (env.kind != wire::Envelope::Kind::request) throw wire::BadEnvelope("not a request");
        bool tlvMode = env.is_tlv();

        auto reply = [&](const auto& resp) {
            if (tlvMode) return wire::make_response_tlv(resp.encode()).encode();
            return wire::make_response(resp.to_json()).encode();
        };

        if (env.endpoint == ep::kEsipaGetAuthInputs) {
            if (tlvMode) {
                msg::EsipaGetAuthInputsRequest::decode(env.body);
            } else {
                msg::EsipaGetAuthInputsRequest::from_json(env.body_json());
            }
            return reply(get_auth_inputs());
        }
        if (env.endpoint == ep::kEsipaAuthenticate) {
            auto req = tlvMode ? msg::EsipaAuthenticateRequest::decode(env.body)
                               : msg::EsipaAuthenticateRequest::from_json(env.body_json());
            return reply(do_authenticate(req));
        }
        if (env.endpoint == ep::kEsipaPrepareDownload) {
            auto req = tlvMode ? msg::EsipaPrepareDownloadRequest::decode(env.body)
                               : msg::EsipaPrepareDownloadRequest::from_json(env.body_json());
            return reply(do_prepare(req));
        }
        if (env.endpoint == ep::kEsipaLoadBpp) {
            auto req = tlvMode ? msg::EsipaLoadBppRequest::decode(env.body)
                               : msg::EsipaLoadBppRequest::from_json(env.body_json());
            return reply(do_load(req));
        }
        if (env.endpoint == ep::kEsipaRemoveNotification) {
            auto req = tlvMode ? msg::EsipaRemoveNotificationRequest::decode(env.body)
                               : msg::EsipaRemoveNotificationRequest::from_json(env.body_json());
            return reply(do_remove(req.seqNumber));
        }
        if (env.endpoint == ep::kEsipaPushAc) {
            auto req = tlvMode ? msg::EsipaPushAcRequest::decode(env.body)
                               : msg::EsipaPushAcRequest::from_json(env.body_json());
            msg::EsipaPushAcResponse resp;
            msg::ActivationCode ac;
            try {
                ac = msg::ActivationCode::parse(req.activationCode);
            } catch (const msg::BadActivationCode& e) {
                resp.flowReport = msg::FlowReport::make_error("activationCode", 0, e.what());
                return reply(resp);
            }
            Lpa lpa(config_, transport_, euiccAddress_);
            resp.flowReport = lpa.run_profile_download(ac);
            return reply(resp);
        }
        if (env.endpoint == ep::kEsipaEimConfig) {
            auto req = tlvMode ? msg::EsipaEimConfigRequest::decode(env.body)
                               : msg::EsipaEimConfigRequest::from_json(env.body_json());
            return reply(do_eim_config(req));
        }
        throw wire::BadEnvelope("unknown endpoint " + env.endpoint);
    } catch (const std::exception& e) {
        nlohmann::json out = msg::failed_header();
        out["error"] = e.what();
        return wire::make_response(out).encode();
    }
}

// ---------------------------------------------------------------------------
// Eim
// ---------------------------------------------------------------------------

Eim::Eim(EimConfig config, crypto::SigKeyPair keys, sim::Transport& transport)
    : config_(std::move(config)), keys_(keys), transport_(transport) {}

void Eim::register_device(EimDevice device) { devices_[device.deviceId] = std::move(device); }

const EimDevice* Eim::device(const std::string& deviceId) const {
    auto it = devices_.find(deviceId);
    return it == devices_.end() ? nullptr : &it->second;
}

msg::EimConfigurationData Eim::configuration_data() const {
    msg::EimConfigurationData data;
    data.eimId = config_.eimId;
    data.eimPublicKey = keys_.publicKey;
    data.eimAddress = config_.eimAddress;
    return data;
}

msg::SignedEimOperation Eim::sign_eim_operation(const msg::EimOperation& op) const {
    msg::SignedEimOperation signedOp;
    signedOp.operation = op;
    signedOp.signature = crypto::sign(keys_.privateKey, op.encode());
    return signedOp;
}

template <typename Req, typename Resp>
Resp Eim::esipa_call(const EimDevice& dev, const char* endpoint, const Req& req,
                     const char* stage) {
    Bytes requestBytes;
    if (dev.mode == msg::EsipaMode::compactTlv) {
        requestBytes = wire::make_request_tlv(endpoint, req.encode()).encode();
    } else {
        requestBytes = wire::make_request(endpoint, req.to_json()).encode();
    }

    Bytes respBytes;
    try {
        respBytes = transport_.send(dev.ipaAddress, requestBytes);
    } catch (const sim::Dropped& e) {
        throw StageError(stage, 0, e.what());
    } catch (const sim::Unroutable& e) {
        throw StageError(stage, 0, e.what());
    }

    try {
        wire::Envelope env = wire::Envelope::decode(respBytes);
        if (env.kind != wire::Envelope::Kind::response) throw wire::BadEnvelope("not a response");
        if (env.is_tlv()) return Resp::decode(env.body);
        nlohmann::json body = env.body_json();
        if (body.is_object() && body.contains("error")) {
            const auto& err = body.at("error");
            throw StageError(stage, 0, err.is_string() ? err.get<std::string>() : "peer error");
        }
        return Resp::from_json(body);
    } catch (const StageError&) {
        throw;
    } catch (const std::exception& e) {
        throw StageError(stage, 0, std::string("BadEnvelope: ") + e.what());
    }
}

msg::FlowReport Eim::push_activation_code(const std::string& deviceId, const std::string& acText) {
    const EimDevice* dev = device(deviceId);
    if (dev == nullptr) return msg::FlowReport::make_error("esipa", 0, "deviceUnreachable");
    try {
        msg::EsipaPushAcRequest req;
        req.activationCode = acText;
        auto resp = esipa_call<msg::EsipaPushAcRequest, msg::EsipaPushAcResponse>(
            *dev, ep::kEsipaPushAc, req, "pushAc");
        return resp.flowReport;
    } catch (const StageError& e) {
        return msg::FlowReport::make_error(e.stage, e.code, e.name);
    }
}

msg::EsipaEimConfigResponse Eim::send_config_operation(const std::string& deviceId,
                                                       const msg::SignedEimOperation& op) {
    const EimDevice* dev = device(deviceId);
    if (dev == nullptr) {
        msg::EsipaEimConfigResponse resp;
        resp.ok = false;
        resp.reason = msg::EimConfigRejectReason::noAssociation;
        return resp;
    }
    msg::EsipaEimConfigRequest req;
    req.signedEimOperation = op;
    return esipa_call<msg::EsipaEimConfigRequest, msg::EsipaEimConfigResponse>(
        *dev, ep::kEsipaEimConfig, req, "eimConfig");
}

msg::FlowReport Eim::assisted_download(const std::string& deviceId,
                                       const msg::ActivationCode& ac) {
    const EimDevice* dev = device(deviceId);
    if (dev == nullptr) return msg::FlowReport::make_error("esipa", 0, "deviceUnreachable");

    try {
        // Collect the device's authentication inputs over ESipa.
        auto inputs = esipa_call<msg::EsipaGetAuthInputsRequest, msg::EsipaGetAuthInputsResponse>(
            *dev, ep::kEsipaGetAuthInputs, msg::EsipaGetAuthInputsRequest{}, "esipa");

        transport_.mark("connection-open " + ac.smdpAddress);

        msg::InitiateAuthenticationRequest initReq;
        initReq.euiccChallenge = inputs.euiccChallenge;
        initReq.euiccInfo1 = inputs.euiccInfo1;
        initReq.smdpAddress = ac.smdpAddress;
        initReq.lpaRspCapability = dev->capability;
        msg::json initBody = exchange_json(transport_, ac.smdpAddress,
                                           ep::kInitiateAuthentication, initReq.to_json(),
                                           "initiateAuth");
        auto initResp = msg::InitiateAuthenticationResponse::from_json(initBody);
        if (!initResp.ok()) {
            return msg::FlowReport::make_error("initiateAuth", 0,
                                               std::get<std::string>(initResp.result));
        }
        const auto& init = std::get<msg::InitiateAuthenticationOk>(initResp.result);

        // Relay the server's authentication material; the MatchingID from
        // the activation code rides along for the IPA's ctxParams1.
        msg::EsipaAuthenticateRequest relayReq;
        relayReq.matchingId = ac.matchingId;
        relayReq.serverSigned1 = init.serverSigned1;
        relayReq.serverSignature1 = init.serverSignature1;
        relayReq.euiccCiPKIdToBeUsed = init.euiccCiPKIdToBeUsed;
        relayReq.serverCertificate = init.serverCertificate;
        relayReq.otherCertsInChain = init.otherCertsInChain;
        relayReq.crlList = init.crlList;
        auto relayResp = esipa_call<msg::EsipaAuthenticateRequest, msg::EsipaAuthenticateResponse>(
            *dev, ep::kEsipaAuthenticate, relayReq, "authenticateServer");
        if (!relayResp.ok()) {
            const auto& err = std::get<msg::AuthenticateResponseError>(relayResp.result);
            return msg::FlowReport::make_error("authenticateServer",
                                               static_cast<std::int64_t>(err.authenticateErrorCode),
                                               "authenticateErrorCode");
        }
        const auto& authOk = std::get<msg::AuthenticateResponseOk>(relayResp.result);

        msg::AuthenticateClientRequest clientReq;
        clientReq.transactionId = init.transactionId;
        clientReq.euiccSigned1 = authOk.euiccSigned1;
        clientReq.euiccSignature1 = authOk.euiccSignature1;
        clientReq.euiccCertificate = authOk.euiccCertificate;
        clientReq.nextCertInChain = authOk.nextCertInChain;
        clientReq.otherCertsInChain = authOk.otherCertsInChain;
        msg::json clientBody = exchange_json(transport_, ac.smdpAddress, ep::kAuthenticateClient,
                                             clientReq.to_json(), "authenticateClient");
        auto clientResp = msg::AuthenticateClientResponse::from_json(clientBody);
        if (!clientResp.ok()) {
            auto code = std::get<msg::AuthenticateClientError>(clientResp.result);
            return msg::FlowReport::make_error("authenticateClient",
                                               static_cast<std::int64_t>(code),
                                               "authenticateClientError");
        }
        const auto& clientOk = std::get<msg::AuthenticateClientOk>(clientResp.result);
        if (clientOk.transactionId != init.transactionId) {
            return msg::FlowReport::make_error("authenticateClient", 0,
                                               "transactionIdEchoMismatch");
        }
        if (clientOk.bare() || !clientOk.profileMetadata || !clientOk.smdpSigned2 ||
            !clientOk.smdpSignature2 || !clientOk.smdpCertificate) {
            return msg::FlowReport::make_error("authenticateClient", 0, "bareTransactionId");
        }

        msg::EsipaPrepareDownloadRequest prepReq;
        prepReq.profileMetadata = *clientOk.profileMetadata;
        prepReq.smdpSigned2 = *clientOk.smdpSigned2;
        prepReq.smdpSignature2 = *clientOk.smdpSignature2;
        prepReq.smdpCertificate = *clientOk.smdpCertificate;
        auto prepResp =
            esipa_call<msg::EsipaPrepareDownloadRequest, msg::EsipaPrepareDownloadResponse>(
                *dev, ep::kEsipaPrepareDownload, prepReq, "prepareDownload");
        if (std::holds_alternative<msg::EsipaCancelled>(prepResp.result)) {
            msg::FlowReport report = msg::FlowReport::make_cancelled(
                std::get<msg::EsipaCancelled>(prepResp.result).reason, init.transactionId);
            return report;
        }
        if (std::holds_alternative<msg::PrepareDownloadResponseError>(prepResp.result)) {
            const auto& err = std::get<msg::PrepareDownloadResponseError>(prepResp.result);
            return msg::FlowReport::make_error("prepareDownload",
                                               static_cast<std::int64_t>(err.downloadErrorCode),
                                               "downloadErrorCode");
        }

        msg::GetBoundProfilePackageRequest bppReq;
        bppReq.transactionId = init.transactionId;
        bppReq.prepareDownloadResponse.result =
            std::get<msg::PrepareDownloadResponseOk>(prepResp.result);
        msg::json bppBody = exchange_json(transport_, ac.smdpAddress, ep::kGetBoundProfilePackage,
                                          bppReq.to_json(), "getBpp");
        auto bppResp = msg::GetBoundProfilePackageResponse::from_json(bppBody);
        if (!bppResp.ok()) {
            auto code = std::get<msg::GetBoundProfilePackageError>(bppResp.result);
            return msg::FlowReport::make_error("getBpp", static_cast<std::int64_t>(code),
                                               "getBoundProfilePackageError");
        }

        const auto& bppOk = std::get<msg::GetBoundProfilePackageOk>(bppResp.result);
        if (bppOk.transactionId != init.transactionId) {
            return msg::FlowReport::make_error("getBpp", 0, "transactionIdEchoMismatch");
        }
        msg::EsipaLoadBppRequest loadReq;
        loadReq.boundProfilePackage = bppOk.boundProfilePackage;
        auto loadResp = esipa_call<msg::EsipaLoadBppRequest, msg::EsipaLoadBppResponse>(
            *dev, ep::kEsipaLoadBpp, loadReq, "loadBpp");
        if (!loadResp.ok()) {
            msg::FlowReport report = msg::FlowReport::make_cancelled(
                std::get<msg::EsipaCancelled>(loadResp.result).reason, init.transactionId);
            return report;
        }
        const auto& pir = std::get<msg::ProfileInstallationResult>(loadResp.result);

        msg::HandleNotificationRequest notifyReq;
        notifyReq.profileInstallationResult = pir;
        msg::json notifyBody = exchange_json(transport_, ac.smdpAddress, ep::kHandleNotification,
                                             notifyReq.to_json(), "handleNotification");
        auto notifyResp = msg::HandleNotificationResponse::from_json(notifyBody);
        if (!notifyResp.acknowledged) {
            return msg::FlowReport::make_error("handleNotification", 0, notifyResp.error);
        }

        msg::EsipaRemoveNotificationRequest removeReq;
        removeReq.seqNumber = pir.data.notificationMetadata.seqNumber;
        auto removeResp =
            esipa_call<msg::EsipaRemoveNotificationRequest, msg::EsipaRemoveNotificationResponse>(
                *dev, ep::kEsipaRemoveNotification, removeReq, "removeNotification");
        if (!removeResp.removed) {
            return msg::FlowReport::make_error("removeNotification", 0, "unknownSeqNumber");
        }

        if (!pir.data.success()) {
            const auto& err = std::get<msg::ErrorResult>(pir.data.finalResult);
            msg::FlowReport report = msg::FlowReport::make_error(
                "loadBpp", static_cast<std::int64_t>(err.errorReason), "errorReason");
            report.transactionId = init.transactionId;
            return report;
        }
        return msg::FlowReport::make_installed(init.transactionId);
    } catch (const StageError& e) {
        return msg::FlowReport::make_error(e.stage, e.code, e.name);
    } catch (const std::exception& e) {
        return msg::FlowReport::make_error("internal", 0, e.what());
    }
}

}  // namespace rsplab

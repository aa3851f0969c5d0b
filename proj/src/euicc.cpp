#include "rsplab/euicc.hpp"

#include <algorithm>

namespace rsplab {

namespace {

// RID prefix for generated ISD-P AIDs.
const Bytes kIsdpRid = {0xA0, 0x00, 0x00, 0x05, 0x59};

Octet32 derive_session_key(const Octet32& sharedSecret, const msg::TransactionId& txid) {
    Bytes buf;
    append(buf, as_span(sharedSecret));
    append(buf, as_span(txid.id));
    return crypto::sha256(buf);
}

}  // namespace

std::string derive_eid(const Octet32& euiccPublicKey) {
    Octet32 digest = crypto::sha256(as_span(euiccPublicKey));
    return to_hex(ByteSpan(digest.data(), 16));
}

Euicc::Euicc(EuiccConfig config, crypto::SigKeyPair keys, std::vector<pki::Certificate> certChain,
             pki::TrustStore store, std::shared_ptr<sim::Clock> clock, DeterministicRng rng)
    : config_(std::move(config)),
      keys_(keys),
      certChain_(std::move(certChain)),
      store_(std::move(store)),
      clock_(std::move(clock)),
      rng_(rng) {}

pki::PublicKeyId Euicc::own_root_id() const {
    const pki::Certificate& top = certChain_.back();
    return top.self_signed() ? top.subjectKeyId : top.authorityKeyId;
}

msg::EuiccInfo1 Euicc::get_euicc_info1() const {
    msg::EuiccInfo1 info;
    for (const auto& id : store_.rootKeyIds) info.verificationKeyIds.push_back(id);
    info.signingKeyIds.push_back(own_root_id());
    info.capability = config_.capability;
    return info;
}

msg::EuiccInfo2 Euicc::build_euicc_info2() const {
    msg::EuiccInfo2 info2;
    info2.info1 = get_euicc_info1();
    info2.svn = config_.svn;
    info2.freeNonVolatileMemory = config_.freeNonVolatileMemory;
    info2.installedProfileCount = profiles_.size();
    return info2;
}

void Euicc::install_fixture_profile(const msg::ProfileMetadata& metadata) {
    InstalledProfile p;
    p.iccid = metadata.iccid;
    p.metadata = metadata;
    p.state = InstalledProfile::State::disabled;
    Octet32 digest = crypto::sha256(as_span(metadata.iccid));
    p.isdpAid = kIsdpRid;
    p.isdpAid.insert(p.isdpAid.end(), digest.begin(), digest.begin() + 11);
    profiles_.push_back(std::move(p));
}

Octet16 Euicc::get_euicc_challenge() {
    Session fresh;
    fresh.euiccChallenge = rng_.octet16();
    session_ = fresh;
    return fresh.euiccChallenge;
}

std::optional<msg::AuthenticateErrorCode> Euicc::check_server_chain_and_staples(
    const msg::AuthenticateServerRequest& req, std::vector<pki::Certificate>& fullChain) {
    using EC = msg::AuthenticateErrorCode;

    store_.now = clock_->now;
    pki::ChainResult chain = pki::validate_chain(req.serverCertificate, req.otherCertsInChain,
                                                 store_);
    if (!chain.valid) {
        switch (chain.reason) {
            case pki::ChainInvalidReason::revoked: return EC::revokedCert;
            case pki::ChainInvalidReason::expired: return EC::invalidCertOrCrlTime;
            default: return EC::invalidCertificate;
        }
    }

    fullChain.push_back(req.serverCertificate);
    for (const auto& c : req.otherCertsInChain) fullChain.push_back(c);

    if (!crypto::verify(req.serverCertificate.subjectPublicKey, req.serverSigned1.encode(),
                        req.serverSignature1)) {
        return EC::invalidSignature;
    }

    if (req.serverSigned1.euiccChallenge != session_->euiccChallenge) {
        return EC::euiccChallengeMismatch;
    }

    if (req.euiccCiPKIdToBeUsed && *req.euiccCiPKIdToBeUsed != own_root_id()) {
        return EC::ciPKUnknown;
    }

    session_->crlStaplingUsed = config_.capability.crlStaplingV3Support &&
                                req.ctxParams1.deviceInfo.deviceCapabilities.crlStaplingV3Support;
    if (session_->crlStaplingUsed) {
        for (const auto& cert : fullChain) {
            if (!cert.hasCrlDistributionPoint) continue;
            const pki::Crl* crl = nullptr;
            for (const auto& candidate : req.crlList) {
                if (candidate.issuerKeyId == cert.authorityKeyId) {
                    crl = &candidate;
                    break;
                }
            }
            if (crl == nullptr) return EC::missingCrl;
            const pki::Certificate* issuer = nullptr;
            for (const auto& c : fullChain) {
                if (c.subjectKeyId == crl->issuerKeyId) issuer = &c;
            }
            if (issuer == nullptr) {
                auto it = store_.certsByKeyId.find(crl->issuerKeyId);
                if (it != store_.certsByKeyId.end()) issuer = &it->second;
            }
            if (issuer == nullptr ||
                !crypto::verify(issuer->subjectPublicKey, crl->tbs_bytes(), crl->signature)) {
                return EC::invalidCrlSignature;
            }
            if (crl->covers(cert.serial)) return EC::revokedCert;
            if (crl->thisUpdate > clock_->now || crl->nextUpdate < clock_->now) {
                return EC::invalidCertOrCrlTime;
            }
        }
    }
    return std::nullopt;
}

msg::AuthenticateServerResponse Euicc::authenticate_server(
    const msg::AuthenticateServerRequest& req) {
    using EC = msg::AuthenticateErrorCode;
    msg::AuthenticateServerResponse resp;
    auto fail = [&](EC code) {
        msg::AuthenticateResponseError err;
        err.transactionId = req.serverSigned1.transactionId;
        err.authenticateErrorCode = code;
        resp.result = err;
        if (session_) session_->challengeConsumed = true;
        return resp;
    };

    if (!session_ || session_->challengeConsumed) return fail(EC::noSession);

    std::vector<pki::Certificate> fullChain;
    if (auto code = check_server_chain_and_staples(req, fullChain)) return fail(*code);

    msg::AuthenticateResponseOk ok;
    ok.euiccSigned1.transactionId = req.serverSigned1.transactionId;
    ok.euiccSigned1.serverAddress = req.serverSigned1.serverAddress;
    ok.euiccSigned1.serverChallenge = req.serverSigned1.serverChallenge;
    ok.euiccSigned1.euiccInfo2 = build_euicc_info2();
    ok.euiccSigned1.ctxParams1 = req.ctxParams1;
    ok.euiccSignature1 = crypto::sign(keys_.privateKey, ok.euiccSigned1.encode());
    ok.euiccCertificate = certChain_.front();
    ok.nextCertInChain = certChain_.size() > 1 ? certChain_[1] : certChain_.front();
    for (std::size_t i = 2; i < certChain_.size(); i++) ok.otherCertsInChain.push_back(certChain_[i]);

    session_->challengeConsumed = true;
    session_->transactionId = req.serverSigned1.transactionId;
    session_->serverAuthCert = req.serverCertificate;
    resp.result = ok;
    return resp;
}

msg::PrepareDownloadResponse Euicc::prepare_download(const msg::PrepareDownloadRequest& req) {
    using EC = msg::DownloadErrorCode;
    msg::PrepareDownloadResponse resp;
    auto fail = [&](EC code, msg::TransactionId txid) {
        msg::PrepareDownloadResponseError err;
        err.transactionId = txid;
        err.downloadErrorCode = code;
        resp.result = err;
        return resp;
    };

    if (!session_ || !session_->transactionId) {
        return fail(EC::noSession, req.smdpSigned2.transactionId);
    }
    const msg::TransactionId sessionTxid = *session_->transactionId;

    store_.now = clock_->now;
    pki::ChainResult chain = pki::validate_chain(req.smdpCertificate, {}, store_);
    if (!chain.valid) return fail(EC::invalidCertificate, sessionTxid);

    // CERT.DPauth.SIG and CERT.DPpb.SIG must belong to the same entity and
    // hang off the same issuer.
    const pki::Certificate& authCert = *session_->serverAuthCert;
    if (req.smdpCertificate.oid.empty() || req.smdpCertificate.oid != authCert.oid ||
        req.smdpCertificate.authorityKeyId != authCert.authorityKeyId) {
        return fail(EC::invalidCertificate, sessionTxid);
    }

    if (!crypto::verify(req.smdpCertificate.subjectPublicKey, req.smdpSigned2.encode(),
                        req.smdpSignature2)) {
        return fail(EC::invalidSignature, sessionTxid);
    }

    if (req.smdpSigned2.transactionId != sessionTxid) {
        return fail(EC::invalidTransactionId, sessionTxid);
    }

    // Reuse the stored one-time key pair when the server points at one we
    // still hold; otherwise mint a fresh pair.
    std::optional<crypto::KaKeyPair> chosen;
    if (req.smdpSigned2.bppEuiccOtpk) {
        for (auto it = storedOtKeys_.begin(); it != storedOtKeys_.end(); ++it) {
            if (it->publicKey == *req.smdpSigned2.bppEuiccOtpk) {
                chosen = *it;
                storedOtKeys_.erase(it);
                storedOtKeys_.push_back(*chosen);  // refresh recency
                break;
            }
        }
    }
    if (!chosen) {
        chosen = crypto::generate_ka_keypair(rng_.octet32());
        storedOtKeys_.push_back(*chosen);
        if (storedOtKeys_.size() > 4) storedOtKeys_.pop_front();
    }
    session_->otKeyPair = chosen;
    session_->serverPbCert = req.smdpCertificate;
    session_->expected = msg::BppCommandId::initialiseSecureChannel;
    session_->bppFailed = false;

    msg::PrepareDownloadResponseOk ok;
    ok.euiccSigned2.transactionId = sessionTxid;
    ok.euiccSigned2.euiccOtpk = chosen->publicKey;
    ok.euiccSigned2.hashCc = req.hashCc;
    ok.euiccSignature2 = crypto::sign(keys_.privateKey, ok.euiccSigned2.encode());
    resp.result = ok;
    return resp;
}

bool Euicc::mac_ok(msg::BppCommandId command, const msg::SealedSegment& segment) const {
    Bytes buf{static_cast<std::uint8_t>(command)};
    append(buf, segment.payload);
    return crypto::hmac16(*session_->sessionKey, buf) == segment.mac;
}

msg::ProfileInstallationResult Euicc::sign_result(msg::ProfileInstallationResultData data) {
    msg::ProfileInstallationResult result;
    result.data = std::move(data);
    result.euiccSignPIR = crypto::sign(keys_.privateKey, result.data.encode());
    notifications_.push_back({result.data.notificationMetadata.seqNumber, result});
    return result;
}

msg::ProfileInstallationResult Euicc::finish_with_error(msg::BppCommandId command,
                                                        msg::ErrorReason reason) {
    msg::ProfileInstallationResultData data;
    data.transactionId = *session_->transactionId;
    data.notificationMetadata.seqNumber = nextSeqNumber_++;
    if (session_->stagedMetadata) data.notificationMetadata.iccid = session_->stagedMetadata->iccid;
    data.smdpOid = session_->serverPbCert ? session_->serverPbCert->oid : "";
    msg::ErrorResult err;
    err.bppCommandId = command;
    err.errorReason = reason;
    data.finalResult = err;
    session_->bppFailed = true;
    return sign_result(std::move(data));
}

msg::ProfileInstallationResult Euicc::finish_with_success() {
    const msg::ProfileMetadata& metadata = *session_->stagedMetadata;
    InstalledProfile profile;
    profile.iccid = metadata.iccid;
    profile.metadata = metadata;
    profile.state = InstalledProfile::State::disabled;
    Octet32 digest = crypto::sha256(as_span(metadata.iccid));
    profile.isdpAid = kIsdpRid;
    profile.isdpAid.insert(profile.isdpAid.end(), digest.begin(), digest.begin() + 11);
    profiles_.push_back(profile);

    msg::ProfileInstallationResultData data;
    data.transactionId = *session_->transactionId;
    data.notificationMetadata.seqNumber = nextSeqNumber_++;
    data.notificationMetadata.iccid = metadata.iccid;
    data.smdpOid = session_->serverPbCert->oid;
    msg::SuccessResult okResult;
    okResult.isdpAid = profiles_.back().isdpAid;
    data.finalResult = okResult;
    session_->expected = msg::BppCommandId::initialiseSecureChannel;
    session_->stagedMetadata.reset();
    return sign_result(std::move(data));
}

msg::LoadBppSegmentResponse Euicc::load_bpp_segment(const msg::LoadBppSegmentRequest& req) {
    using Cmd = msg::BppCommandId;
    using Reason = msg::ErrorReason;
    msg::LoadBppSegmentResponse resp;

    if (!session_ || !session_->transactionId || !session_->otKeyPair || session_->bppFailed) {
        throw msg::BadMessage("no prepared download session");
    }

    if (req.bppCommandId != session_->expected) {
        resp.profileInstallationResult = finish_with_error(req.bppCommandId, Reason::bspStructureError);
        return resp;
    }

    switch (req.bppCommandId) {
        case Cmd::initialiseSecureChannel: {
            msg::InitialiseSecureChannel isc;
            try {
                isc = msg::InitialiseSecureChannel::decode(req.segment);
            } catch (const std::exception&) {
                resp.profileInstallationResult =
                    finish_with_error(Cmd::initialiseSecureChannel, Reason::incorrectInputValues);
                return resp;
            }
            if (!crypto::verify(session_->serverPbCert->subjectPublicKey, isc.tbs_bytes(),
                                isc.signature)) {
                resp.profileInstallationResult =
                    finish_with_error(Cmd::initialiseSecureChannel, Reason::invalidSignature);
                return resp;
            }
            // The channel keys hang off the binding transaction carried in
            // the signed command itself: a reused package keeps the id of
            // the session it was first bound in. Possession of the matching
            // one-time key is what ties the package to this eUICC.
            Octet32 shared = crypto::ka_shared_secret(session_->otKeyPair->privateKey,
                                                      isc.smdpOtpkKa);
            session_->sessionKey = derive_session_key(shared, isc.transactionId);
            // The one-time key is consumed once a secure channel opens on it.
            for (auto it = storedOtKeys_.begin(); it != storedOtKeys_.end(); ++it) {
                if (it->publicKey == session_->otKeyPair->publicKey) {
                    storedOtKeys_.erase(it);
                    break;
                }
            }
            session_->expected = Cmd::configureIsdp;
            return resp;
        }
        case Cmd::configureIsdp: {
            msg::SealedSegment seg;
            try {
                seg = msg::SealedSegment::decode(req.segment);
            } catch (const std::exception&) {
                resp.profileInstallationResult =
                    finish_with_error(Cmd::configureIsdp, Reason::incorrectInputValues);
                return resp;
            }
            if (!mac_ok(Cmd::configureIsdp, seg)) {
                resp.profileInstallationResult =
                    finish_with_error(Cmd::configureIsdp, Reason::bspSecurityError);
                return resp;
            }
            session_->expected = Cmd::storeMetadata;
            return resp;
        }
        case Cmd::storeMetadata: {
            msg::SealedSegment seg;
            try {
                seg = msg::SealedSegment::decode(req.segment);
            } catch (const std::exception&) {
                resp.profileInstallationResult =
                    finish_with_error(Cmd::storeMetadata, Reason::incorrectInputValues);
                return resp;
            }
            if (!mac_ok(Cmd::storeMetadata, seg)) {
                resp.profileInstallationResult =
                    finish_with_error(Cmd::storeMetadata, Reason::bspSecurityError);
                return resp;
            }
            msg::ProfileMetadata metadata;
            try {
                metadata = msg::ProfileMetadata::decode(seg.payload);
            } catch (const std::exception&) {
                resp.profileInstallationResult =
                    finish_with_error(Cmd::storeMetadata, Reason::unknownTlvInMetadata);
                return resp;
            }
            session_->stagedMetadata = metadata;
            for (const auto& p : profiles_) {
                if (p.iccid == metadata.iccid) {
                    resp.profileInstallationResult = finish_with_error(
                        Cmd::storeMetadata, Reason::installFailedDueToIccidAlreadyExistsOnEuicc);
                    return resp;
                }
            }
            if (metadata.pprs.any()) {
                bool allowed = std::any_of(
                    config_.ratPermitted.begin(), config_.ratPermitted.end(),
                    [&](const msg::PprSet& p) { return metadata.pprs.subset_of(p); });
                if (!allowed) {
                    resp.profileInstallationResult =
                        finish_with_error(Cmd::storeMetadata, Reason::pprNotAllowed);
                    return resp;
                }
            }
            session_->expected = Cmd::loadProfileElements;
            return resp;
        }
        case Cmd::loadProfileElements: {
            msg::SealedSegment seg;
            try {
                seg = msg::SealedSegment::decode(req.segment);
            } catch (const std::exception&) {
                resp.profileInstallationResult =
                    finish_with_error(Cmd::loadProfileElements, Reason::incorrectInputValues);
                return resp;
            }
            if (!mac_ok(Cmd::loadProfileElements, seg)) {
                resp.profileInstallationResult =
                    finish_with_error(Cmd::loadProfileElements, Reason::bspSecurityError);
                return resp;
            }
            if (req.isLastSegment) {
                resp.profileInstallationResult = finish_with_success();
            }
            return resp;
        }
        default:
            resp.profileInstallationResult =
                finish_with_error(req.bppCommandId, Reason::bspStructureError);
            return resp;
    }
}

msg::CancelSessionResponse Euicc::cancel_session(const msg::CancelSessionRequest& req) {
    msg::CancelSessionResponse resp;
    if (!session_ || !session_->transactionId || *session_->transactionId != req.transactionId) {
        resp.result = msg::CancelSessionRespError::invalidTransactionId;
        return resp;
    }
    msg::CancelSessionResponseOk ok;
    ok.euiccCancelSessionSigned.transactionId = req.transactionId;
    ok.euiccCancelSessionSigned.smdpOid = session_->serverAuthCert->oid;
    ok.euiccCancelSessionSigned.reason = req.reason;
    ok.euiccCancelSessionSignature =
        crypto::sign(keys_.privateKey, ok.euiccCancelSessionSigned.encode());
    session_.reset();
    resp.result = ok;
    return resp;
}

bool Euicc::remove_notification(std::uint64_t seqNumber) {
    for (auto it = notifications_.begin(); it != notifications_.end(); ++it) {
        if (it->seqNumber == seqNumber) {
            notifications_.erase(it);
            return true;
        }
    }
    return false;
}

msg::EimConfigResult Euicc::eim_add_config(const msg::EimConfigurationData& data) {
    msg::EimConfigResult result;
    if (eimConfig_) {
        result.ok = false;
        result.reason = msg::EimConfigRejectReason::alreadyAssociated;
        return result;
    }
    eimConfig_ = data;
    result.ok = true;
    return result;
}

msg::EimConfigResult Euicc::eim_process_signed_op(const msg::SignedEimOperation& op) {
    msg::EimConfigResult result;
    result.ok = false;
    if (!eimConfig_) {
        result.reason = msg::EimConfigRejectReason::noAssociation;
        return result;
    }
    if (!crypto::verify(eimConfig_->eimPublicKey, op.operation.encode(), op.signature)) {
        result.reason = msg::EimConfigRejectReason::badSignature;
        return result;
    }
    switch (op.operation.kind) {
        case msg::EimOperationKind::addConfig:
            result.reason = msg::EimConfigRejectReason::alreadyAssociated;
            return result;
        case msg::EimOperationKind::replaceConfig:
            eimConfig_ = op.operation.config;
            break;
        case msg::EimOperationKind::removeConfig:
            eimConfig_.reset();
            break;
    }
    result.ok = true;
    result.reason.reset();
    return result;
}

msg::EimConfigResult Euicc::eim_remove_config() {
    eimConfig_.reset();
    msg::EimConfigResult result;
    result.ok = true;
    return result;
}

Bytes Euicc::handle(const Bytes& requestEnvelope) {
    namespace ep = msg::endpoint;
    try {
        wire::Envelope env = wire::Envelope::decode(requestEnvelope);
        if (env.kind != wire::Envelope::Kind::request) throw wire::BadEnvelope("not a request");
        nlohmann::json body = env.body_json();
        nlohmann::json out;

        if (env.endpoint == ep::kGetEuiccInfo1) {
            msg::JsonView v(body);
            v.done();
            out = msg::ok_header();
            out["euiccInfo1"] = to_base64(as_span(get_euicc_info1().encode()));
        } else if (env.endpoint == ep::kGetEuiccChallenge) {
            msg::JsonView v(body);
            v.done();
            out = msg::ok_header();
            out["euiccChallenge"] = to_base64(as_span(get_euicc_challenge()));
        } else if (env.endpoint == ep::kGetRat) {
            msg::JsonView v(body);
            v.done();
            out = msg::ok_header();
            nlohmann::json rat = nlohmann::json::array();
            for (const auto& p : config_.ratPermitted) rat.push_back(p.to_byte());
            out["ratPermitted"] = rat;
        } else if (env.endpoint == ep::kGetProfilesInfo) {
            msg::JsonView v(body);
            v.done();
            out = msg::ok_header();
            out["installedProfileCount"] = profiles_.size();
        } else if (env.endpoint == ep::kAuthenticateServer) {
            auto req = msg::AuthenticateServerRequest::from_json(body);
            out = authenticate_server(req).to_json();
        } else if (env.endpoint == ep::kPrepareDownload) {
            auto req = msg::PrepareDownloadRequest::from_json(body);
            out = prepare_download(req).to_json();
        } else if (env.endpoint == ep::kLoadBoundProfilePackage) {
            auto req = msg::LoadBppSegmentRequest::from_json(body);
            out = load_bpp_segment(req).to_json();
        } else if (env.endpoint == ep::kCancelSession) {
            auto req = msg::cancel_session_request_from_json(body);
            out = msg::cancel_session_response_to_json(cancel_session(req));
        } else if (env.endpoint == ep::kRemoveNotificationFromList) {
            auto req = msg::RemoveNotificationRequest::from_json(body);
            msg::RemoveNotificationResponse resp;
            resp.removed = remove_notification(req.seqNumber);
            out = resp.to_json();
        } else if (env.endpoint == ep::kAddEimConfig) {
            msg::JsonView v(body);
            auto data = msg::EimConfigurationData::decode(as_span(v.get_b64("eimConfigurationData")));
            v.done();
            out = eim_add_config(data).to_json();
        } else if (env.endpoint == ep::kProcessEimOperation) {
            msg::JsonView v(body);
            auto op = msg::SignedEimOperation::decode(as_span(v.get_b64("signedEimOperation")));
            v.done();
            out = eim_process_signed_op(op).to_json();
        } else if (env.endpoint == ep::kRemoveEimConfig) {
            msg::JsonView v(body);
            v.done();
            out = eim_remove_config().to_json();
        } else {
            throw wire::BadEnvelope("unknown endpoint " + env.endpoint);
        }
        return wire::make_response(out).encode();
    } catch (const std::exception& e) {
        nlohmann::json out = msg::failed_header();
        out["error"] = e.what();
        return wire::make_response(out).encode();
    }
}

}  // namespace rsplab

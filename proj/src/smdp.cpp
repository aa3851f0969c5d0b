#include "rsplab/smdp.hpp"

#include <algorithm>

namespace rsplab {

namespace {

Octet32 derive_session_key(const Octet32& sharedSecret, const msg::TransactionId& txid) {
    Bytes buf;
    append(buf, as_span(sharedSecret));
    append(buf, as_span(txid.id));
    return crypto::sha256(buf);
}

// Deterministic pseudo profile content so a rebound package carries the
// exact same plaintext as the original.
Bytes profile_element_bytes(const Iccid& iccid, std::size_t total) {
    Bytes out;
    std::uint32_t counter = 0;
    while (out.size() < total) {
        Bytes seed = to_bytes(as_span(iccid));
        seed.push_back(static_cast<std::uint8_t>(counter >> 8));
        seed.push_back(static_cast<std::uint8_t>(counter));
        Octet32 digest = crypto::sha256(seed);
        append(out, as_span(digest));
        counter++;
    }
    out.resize(total);
    return out;
}

std::string eid_of_cert(const pki::Certificate& leaf) {
    Octet32 digest = crypto::sha256(as_span(leaf.subjectPublicKey));
    return to_hex(ByteSpan(digest.data(), 16));
}

}  // namespace

const char* order_state_name(ProfileOrder::State s) {
    switch (s) {
        case ProfileOrder::State::released: return "released";
        case ProfileOrder::State::downloaded: return "downloaded";
        case ProfileOrder::State::installed: return "installed";
        case ProfileOrder::State::error: return "error";
    }
    return "?";
}

Smdp::Smdp(SmdpConfig config, crypto::SigKeyPair dpauthKeys, pki::Certificate dpauthCert,
           crypto::SigKeyPair dppbKeys, pki::Certificate dppbCert, pki::TrustStore store,
           std::shared_ptr<sim::Clock> clock, DeterministicRng rng)
    : config_(std::move(config)),
      dpauthKeys_(dpauthKeys),
      dpauthCert_(std::move(dpauthCert)),
      dppbKeys_(dppbKeys),
      dppbCert_(std::move(dppbCert)),
      store_(std::move(store)),
      clock_(std::move(clock)),
      rng_(rng),
      eligibility_([](const msg::DeviceInfo&, const msg::EuiccInfo2&) { return true; }) {}

void Smdp::add_order(ProfileOrder order) {
    if (order.requesterId.empty()) order.requesterId = "operator-" + order.matchingId;
    if (order.callId.empty()) order.callId = "confirm-" + order.matchingId;
    orders_[order.matchingId] = std::move(order);
}

const ProfileOrder* Smdp::find_order(const std::string& matchingId) const {
    auto it = orders_.find(matchingId);
    return it == orders_.end() ? nullptr : &it->second;
}

ProfileOrder* Smdp::order_for(const std::string& matchingId, const std::string& eid) {
    if (!matchingId.empty()) {
        auto it = orders_.find(matchingId);
        return it == orders_.end() ? nullptr : &it->second;
    }
    // Default SM-DP+ flow: no MatchingID, resolve by the authenticated EID.
    for (auto& [key, order] : orders_) {
        if (!order.eid.empty() && order.eid == eid && !order.terminated) return &order;
    }
    return nullptr;
}

void Smdp::notify_operator(const ProfileOrder& order, bool success, const std::string& detail) {
    Es2Notification n;
    n.notificationEvent = "BPP installation";
    n.notificationEventStatus = success ? "Executed-Success" : "Failed";
    n.notificationReceiverIdentifier = order.requesterId;
    n.notificationIdentifier = order.callId;
    n.detail = detail;
    operatorLog_.push_back(std::move(n));
}

msg::InitiateAuthenticationResponse Smdp::initiate_authentication(
    const msg::InitiateAuthenticationRequest& req) {
    msg::InitiateAuthenticationResponse resp;

    if (req.smdpAddress != config_.address) {
        resp.result = std::string("invalidSmdpAddress");
        return resp;
    }

    const pki::PublicKeyId ownRoot = dpauthCert_.authorityKeyId;
    bool verifiable = std::find(req.euiccInfo1.verificationKeyIds.begin(),
                                req.euiccInfo1.verificationKeyIds.end(),
                                ownRoot) != req.euiccInfo1.verificationKeyIds.end();
    if (!verifiable) {
        // The root-update path behind euiccCiUpdateSupport is not served
        // here; it is logged separately and still refused.
        authLog_.push_back(req.lpaRspCapability.euiccCiUpdateSupport
                               ? "noCommonRoot(euiccCiUpdateSupport indicated)"
                               : "noCommonRoot");
        resp.result = std::string("noCommonRoot");
        return resp;
    }

    std::optional<pki::PublicKeyId> toBeUsed;
    for (const auto& id : req.euiccInfo1.signingKeyIds) {
        if (store_.rootKeyIds.contains(id)) {
            toBeUsed = id;
            break;
        }
    }
    if (!toBeUsed) {
        authLog_.push_back("noCommonRoot(signing)");
        resp.result = std::string("noCommonRoot");
        return resp;
    }

    msg::InitiateAuthenticationOk ok;
    rng_.fill(ok.transactionId.id.data(), ok.transactionId.id.size());
    Octet16 serverChallenge = rng_.octet16();
    ok.serverSigned1.transactionId = ok.transactionId;
    ok.serverSigned1.euiccChallenge = req.euiccChallenge;
    ok.serverSigned1.serverAddress = config_.address;
    ok.serverSigned1.serverChallenge = serverChallenge;
    ok.serverSignature1 = crypto::sign(dpauthKeys_.privateKey, ok.serverSigned1.encode());
    ok.euiccCiPKIdToBeUsed = *toBeUsed;
    ok.serverCertificate = dpauthCert_;

    if (req.lpaRspCapability.crlStaplingV3Support &&
        req.euiccInfo1.capability.crlStaplingV3Support) {
        if (dpauthCert_.hasCrlDistributionPoint) {
            if (const pki::Crl* crl = store_.crl_for(dpauthCert_.authorityKeyId)) {
                ok.crlList.push_back(*crl);
            }
        }
    }

    Session session;
    session.transactionId = ok.transactionId;
    session.serverChallenge = serverChallenge;
    session.euiccInfo1 = req.euiccInfo1;
    session.lpaCapability = req.lpaRspCapability;
    session.euiccCiPKIdToBeUsed = *toBeUsed;
    sessions_[ok.transactionId.hex()] = session;

    resp.result = ok;
    return resp;
}

msg::AuthenticateClientResponse Smdp::authenticate_client(
    const msg::AuthenticateClientRequest& req) {
    using EC = msg::AuthenticateClientError;
    msg::AuthenticateClientResponse resp;
    auto fail = [&](EC code) {
        resp.result = code;
        return resp;
    };

    auto sessionIt = sessions_.find(req.transactionId.hex());
    if (sessionIt == sessions_.end()) return fail(EC::invalidTransactionId);
    Session& session = sessionIt->second;
    if (req.euiccSigned1.transactionId != session.transactionId) {
        return fail(EC::invalidTransactionId);
    }

    // Root of the presented eUICC chain must be the CI selected at
    // InitiateAuthentication time.
    const pki::Certificate* top = &req.nextCertInChain;
    if (!req.otherCertsInChain.empty()) top = &req.otherCertsInChain.back();
    pki::PublicKeyId chainRoot = top->self_signed() ? top->subjectKeyId : top->authorityKeyId;
    if (chainRoot != session.euiccCiPKIdToBeUsed) return fail(EC::ciPKUnknown);

    store_.now = clock_->now;
    pki::ChainResult eumResult = pki::validate_chain(req.nextCertInChain, req.otherCertsInChain,
                                                     store_);
    if (!eumResult.valid) {
        return fail(eumResult.reason == pki::ChainInvalidReason::expired
                        ? EC::eumCertificateExpired
                        : EC::eumCertificateInvalid);
    }
    std::vector<pki::Certificate> chain;
    chain.push_back(req.nextCertInChain);
    for (const auto& c : req.otherCertsInChain) chain.push_back(c);
    pki::ChainResult euiccResult = pki::validate_chain(req.euiccCertificate, chain, store_);
    if (!euiccResult.valid) {
        return fail(euiccResult.reason == pki::ChainInvalidReason::expired
                        ? EC::euiccCertificateExpired
                        : EC::euiccCertificateInvalid);
    }

    if (!crypto::verify(req.euiccCertificate.subjectPublicKey, req.euiccSigned1.encode(),
                        req.euiccSignature1)) {
        return fail(EC::euiccSignatureInvalid);
    }

    // A stale serverChallenge means the signed payload belongs to another
    // session, so the signature proves nothing for this one.
    if (req.euiccSigned1.serverChallenge != session.serverChallenge) {
        return fail(EC::euiccSignatureInvalid);
    }

    if (req.euiccSigned1.euiccInfo2.info1 != session.euiccInfo1) {
        return fail(EC::euiccRspCapabilityHasChanged);
    }
    if (req.euiccSigned1.ctxParams1.deviceInfo.deviceCapabilities != session.lpaCapability) {
        return fail(EC::lpaRspCapabilityHasChanged);
    }

    session.euiccCert = req.euiccCertificate;
    session.eid = eid_of_cert(req.euiccCertificate);

    if (req.euiccSigned1.ctxParams1.operationType == msg::OperationType::rpm) {
        // RPM execution is out of scope; answer with the bare TransactionID.
        msg::AuthenticateClientOk bare;
        bare.transactionId = session.transactionId;
        session.stage = Stage::clientAuthenticated;
        resp.result = bare;
        return resp;
    }

    ProfileOrder* order = order_for(req.euiccSigned1.ctxParams1.matchingId, session.eid);
    if (order == nullptr) return fail(EC::matchingIdRefused);
    if (!order->eid.empty() && order->eid != session.eid) return fail(EC::eidMismatch);
    if (order->terminated || (order->state != ProfileOrder::State::released &&
                              order->state != ProfileOrder::State::downloaded)) {
        return fail(EC::matchingIdRefused);
    }

    order->downloadAttempts++;
    if (order->downloadAttempts > order->maxAttempts) {
        order->state = ProfileOrder::State::error;
        order->terminated = true;
        notify_operator(*order, false, "maximum download attempts exceeded");
        return fail(EC::matchingIdRefused);
    }

    if (!eligibility_(req.euiccSigned1.ctxParams1.deviceInfo, req.euiccSigned1.euiccInfo2) ||
        config_.rejectAllEligibility) {
        order->state = ProfileOrder::State::error;
        return fail(EC::noEligibleProfile);
    }

    msg::AuthenticateClientOk ok;
    ok.transactionId = session.transactionId;
    msg::SmdpSigned2 signed2;
    signed2.transactionId = session.transactionId;
    signed2.ccRequiredFlag = order->ccRequired;
    if (order->boundBpp && order->boundBpp->eid == session.eid) {
        signed2.bppEuiccOtpk = order->boundBpp->euiccOtpk;
    }
    ok.smdpSigned2 = signed2;
    ok.smdpSignature2 = crypto::sign(dppbKeys_.privateKey, signed2.encode());
    ok.profileMetadata = order->metadata;
    ok.smdpCertificate = dppbCert_;

    session.matchingId = order->matchingId;
    session.stage = Stage::clientAuthenticated;
    resp.result = ok;
    return resp;
}

msg::BoundProfilePackage Smdp::build_bpp(const ProfileOrder& order, const Octet32& euiccOtpk,
                                         const msg::TransactionId& txid) {
    msg::BoundProfilePackage bpp;
    crypto::KaKeyPair dpKa = crypto::generate_ka_keypair(rng_.octet32());
    bpp.initialiseSecureChannel.transactionId = txid;
    bpp.initialiseSecureChannel.smdpOtpkKa = dpKa.publicKey;
    bpp.initialiseSecureChannel.signature =
        crypto::sign(dppbKeys_.privateKey, bpp.initialiseSecureChannel.tbs_bytes());

    Octet32 shared = crypto::ka_shared_secret(dpKa.privateKey, euiccOtpk);
    Octet32 sessionKey = derive_session_key(shared, txid);

    auto seal = [&](msg::BppCommandId command, Bytes payload) {
        msg::SealedSegment seg;
        seg.payload = std::move(payload);
        Bytes buf{static_cast<std::uint8_t>(command)};
        append(buf, seg.payload);
        seg.mac = crypto::hmac16(sessionKey, buf);
        return seg;
    };

    Bytes isdpConfig = to_bytes(as_span(order.iccid));
    isdpConfig.push_back(0x01);
    bpp.configureIsdp = seal(msg::BppCommandId::configureIsdp, isdpConfig);
    bpp.storeMetadata = seal(msg::BppCommandId::storeMetadata, order.metadata.encode());

    Bytes elements = profile_element_bytes(order.iccid, 2400);
    std::size_t offset = 0;
    while (offset < elements.size()) {
        std::size_t n = std::min(msg::SealedSegment::kMaxPayload, elements.size() - offset);
        Bytes chunk(elements.begin() + offset, elements.begin() + offset + n);
        bpp.loadProfileElements.push_back(seal(msg::BppCommandId::loadProfileElements, chunk));
        offset += n;
    }
    return bpp;
}

msg::GetBoundProfilePackageResponse Smdp::get_bound_profile_package(
    const msg::GetBoundProfilePackageRequest& req) {
    using EC = msg::GetBoundProfilePackageError;
    msg::GetBoundProfilePackageResponse resp;
    auto fail = [&](EC code) {
        resp.result = code;
        return resp;
    };

    auto sessionIt = sessions_.find(req.transactionId.hex());
    if (sessionIt == sessions_.end()) return fail(EC::invalidTransactionId);
    Session& session = sessionIt->second;
    if (session.stage != Stage::clientAuthenticated) return fail(EC::invalidTransactionId);

    if (!req.prepareDownloadResponse.ok()) return fail(EC::undefinedError);
    const auto& ok2 = std::get<msg::PrepareDownloadResponseOk>(req.prepareDownloadResponse.result);
    if (ok2.euiccSigned2.transactionId != session.transactionId) {
        return fail(EC::invalidTransactionId);
    }
    if (!crypto::verify(session.euiccCert->subjectPublicKey, ok2.euiccSigned2.encode(),
                        ok2.euiccSignature2)) {
        return fail(EC::euiccSignatureInvalid);
    }

    auto orderIt = orders_.find(session.matchingId);
    if (orderIt == orders_.end()) return fail(EC::undefinedError);
    ProfileOrder& order = orderIt->second;

    if (order.expired) return fail(EC::downloadOrderExpired);

    if (order.ccRequired) {
        if (!ok2.euiccSigned2.hashCc) return fail(EC::confirmationCodeMissing);
        Octet32 expected = msg::compute_hash_cc(order.confirmationCode, session.transactionId);
        if (*ok2.euiccSigned2.hashCc != expected) {
            order.ccAttempts++;
            if (order.ccAttempts >= 3) {
                order.state = ProfileOrder::State::error;
                order.terminated = true;
                return fail(EC::confirmationCodeRetriesExceeded);
            }
            return fail(EC::confirmationCodeRefused);
        }
    }

    const Octet32& euiccOtpk = ok2.euiccSigned2.euiccOtpk;
    if (order.boundBpp && order.boundBpp->euiccOtpk == euiccOtpk) {
        // Reuse: byte-identical package.
    } else if (order.boundBpp && order.boundBpp->eid != session.eid) {
        return fail(EC::bppRebindingRefused);
    } else {
        ProfileOrder::BoundBpp bound;
        bound.eid = session.eid;
        bound.euiccOtpk = euiccOtpk;
        bound.bpp = build_bpp(order, euiccOtpk, session.transactionId);
        order.boundBpp = bound;
    }

    order.state = ProfileOrder::State::downloaded;
    session.stage = Stage::bppIssued;

    msg::GetBoundProfilePackageOk ok;
    ok.transactionId = session.transactionId;
    ok.boundProfilePackage = order.boundBpp->bpp;
    resp.result = ok;
    return resp;
}

msg::HandleNotificationResponse Smdp::handle_notification(
    const msg::HandleNotificationRequest& req) {
    msg::HandleNotificationResponse resp;
    const msg::ProfileInstallationResult& pir = req.profileInstallationResult;

    auto sessionIt = sessions_.find(pir.data.transactionId.hex());
    if (sessionIt == sessions_.end()) {
        // Unknown TransactionID: processing stops, the transport-level ack
        // still goes out.
        return resp;
    }
    Session& session = sessionIt->second;

    if (!session.euiccCert ||
        !crypto::verify(session.euiccCert->subjectPublicKey, pir.data.encode(),
                        pir.euiccSignPIR)) {
        resp.acknowledged = false;
        resp.error = "pirSignatureInvalid";
        return resp;
    }

    auto orderIt = orders_.find(session.matchingId);
    if (orderIt != orders_.end()) {
        ProfileOrder& order = orderIt->second;
        if (pir.data.success()) {
            order.state = ProfileOrder::State::installed;
            notify_operator(order, true, "");
        } else {
            const auto& err = std::get<msg::ErrorResult>(pir.data.finalResult);
            order.state = ProfileOrder::State::error;
            notify_operator(order, false,
                            "errorReason " +
                                std::to_string(static_cast<int>(err.errorReason)));
        }
        if (order.viaSmds) delete_ds_event(order.matchingId);
    }
    session.stage = Stage::closed;
    return resp;
}

void Smdp::delete_ds_event(const std::string& matchingId) { dsEventLog_.push_back(matchingId); }

Bytes Smdp::handle(const Bytes& requestEnvelope) {
    namespace ep = msg::endpoint;
    try {
        wire::Envelope env = wire::Envelope::decode(requestEnvelope);
        if (env.kind != wire::Envelope::Kind::request) throw wire::BadEnvelope("not a request");
        nlohmann::json body = env.body_json();
        nlohmann::json out;

        if (env.endpoint == ep::kInitiateAuthentication) {
            auto req = msg::InitiateAuthenticationRequest::from_json(body);
            out = initiate_authentication(req).to_json();
        } else if (env.endpoint == ep::kAuthenticateClient) {
            auto req = msg::AuthenticateClientRequest::from_json(body);
            out = authenticate_client(req).to_json();
        } else if (env.endpoint == ep::kGetBoundProfilePackage) {
            auto req = msg::GetBoundProfilePackageRequest::from_json(body);
            out = get_bound_profile_package(req).to_json();
        } else if (env.endpoint == ep::kHandleNotification) {
            auto req = msg::HandleNotificationRequest::from_json(body);
            out = handle_notification(req).to_json();
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

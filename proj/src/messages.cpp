#include "rsplab/messages.hpp"

#include <algorithm>

namespace rsplab::msg {

namespace {

template <typename E>
E enum_from_int(std::int64_t v, std::initializer_list<E> allowed, const char* name) {
    for (E e : allowed) {
        if (static_cast<std::int64_t>(e) == v) return e;
    }
    throw BadMessage(std::string("unknown ") + name + " value " + std::to_string(v));
}

// TLV helpers for json-embedded blobs.
template <typename T>
std::string b64_tlv(const T& value) {
    return to_base64(as_span(value.encode()));
}

template <typename T>
T tlv_from_b64(const std::string& text) {
    Bytes raw = from_base64(text);
    return T::decode(as_span(raw));
}

std::string b64_fixed(ByteSpan data) { return to_base64(data); }

}  // namespace

AuthenticateErrorCode authenticate_error_from_int(std::int64_t v) {
    using E = AuthenticateErrorCode;
    return enum_from_int(v,
                         {E::invalidCertificate, E::invalidSignature, E::unsupportedCurve,
                          E::noSession, E::invalidOid, E::euiccChallengeMismatch, E::ciPKUnknown,
                          E::transactionIdError, E::missingCrl, E::invalidCrlSignature,
                          E::revokedCert, E::invalidCertOrCrlTime,
                          E::invalidCertOrCrlConfiguration, E::invalidIccid, E::undefinedError},
                         "AuthenticateErrorCode");
}

CancelSessionReason cancel_reason_from_int(std::int64_t v) {
    using E = CancelSessionReason;
    return enum_from_int(
        v,
        {E::endUserRejection, E::postponed, E::timeout, E::pprNotAllowed, E::metadataMismatch,
         E::loadBppExecutionError, E::sessionAborted, E::enterpriseProfilesNotSupported,
         E::enterpriseRulesNotAllowed, E::enterpriseProfileNotAllowed, E::enterpriseOidMismatch,
         E::enterpriseRulesError, E::enterpriseProfilesOnly, E::lprNotSupported,
         E::lprNetworkDataNotAllowed, E::emptyProfileOrSpName, E::rpmDisabled,
         E::invalidRpmPackage, E::loadRpmPackageError, E::undefinedReason},
        "CancelSessionReason");
}

CancelSessionRespError cancel_resp_error_from_int(std::int64_t v) {
    using E = CancelSessionRespError;
    return enum_from_int(v, {E::invalidTransactionId, E::undefinedError},
                         "CancelSessionRespError");
}

AuthenticateClientError authenticate_client_error_from_int(std::int64_t v) {
    using E = AuthenticateClientError;
    return enum_from_int(
        v,
        {E::eumCertificateInvalid, E::eumCertificateExpired, E::euiccCertificateInvalid,
         E::euiccCertificateExpired, E::euiccSignatureInvalid, E::matchingIdRefused,
         E::eidMismatch, E::noEligibleProfile, E::ciPKUnknown, E::invalidTransactionId,
         E::insufficientMemory, E::ciPKMismatch, E::euiccRspCapabilityHasChanged,
         E::lpaRspCapabilityHasChanged, E::deviceChangeNotSupported, E::deviceChangeNotAllowed,
         E::iccidUnknown, E::invalidInputData, E::missingInputData, E::functionProviderBusy,
         E::undefinedError},
        "authenticateClientError");
}

DownloadErrorCode download_error_from_int(std::int64_t v) {
    using E = DownloadErrorCode;
    return enum_from_int(v,
                         {E::invalidCertificate, E::invalidSignature, E::noSession,
                          E::invalidTransactionId, E::undefinedError},
                         "DownloadErrorCode");
}

GetBoundProfilePackageError get_bpp_error_from_int(std::int64_t v) {
    using E = GetBoundProfilePackageError;
    return enum_from_int(
        v,
        {E::euiccSignatureInvalid, E::confirmationCodeMissing, E::confirmationCodeRefused,
         E::confirmationCodeRetriesExceeded, E::bppRebindingRefused, E::downloadOrderExpired,
         E::invalidTransactionId, E::invalidInputData, E::missingInputData,
         E::functionProviderBusy, E::undefinedError},
        "getBoundProfilePackageError");
}

BppCommandId bpp_command_from_int(std::int64_t v) {
    using E = BppCommandId;
    return enum_from_int(v,
                         {E::initialiseSecureChannel, E::configureIsdp, E::storeMetadata,
                          E::storeMetadata2, E::replaceSessionKeys, E::loadProfileElements},
                         "BppCommandId");
}

ErrorReason error_reason_from_int(std::int64_t v) {
    using E = ErrorReason;
    return enum_from_int(
        v,
        {E::incorrectInputValues, E::invalidSignature, E::invalidTransactionId,
         E::unsupportedCrtValues, E::unsupportedRemoteOperationType, E::unsupportedProfileClass,
         E::bspStructureError, E::bspSecurityError, E::installFailedDueToIccidAlreadyExistsOnEuicc,
         E::installFailedDueToInsufficientMemoryForProfile, E::installFailedDueToInterruption,
         E::installFailedDueToPEProcessingError, E::installFailedDueToDataMismatch,
         E::testProfileInstallFailedDueToInvalidNaaKey, E::pprNotAllowed,
         E::enterpriseProfilesNotSupported, E::enterpriseRulesNotAllowed,
         E::enterpriseProfileNotAllowed, E::enterpriseOidMismatch, E::enterpriseRulesError,
         E::enterpriseProfilesOnly, E::lprNotSupported, E::unknownTlvInMetadata,
         E::installFailedDueToUnknownError},
        "ErrorReason");
}

// ---------------------------------------------------------------------------
// Data types
// ---------------------------------------------------------------------------

TransactionId TransactionId::from_hex(const std::string& text) {
    if (text.size() != 32) throw BadMessage("transactionId must be 32 hex chars");
    Bytes raw;
    try {
        raw = rsplab::from_hex(text);
    } catch (const HexError& e) {
        throw BadMessage(std::string("transactionId: ") + e.what());
    }
    TransactionId t;
    t.id = to_array<16>(as_span(raw));
    return t;
}

std::uint8_t RspCapability::to_byte() const {
    std::uint8_t b = 0;
    if (crlStaplingV3Support) b |= 0x01;
    if (euiccCiUpdateSupport) b |= 0x02;
    if (cancelForEmptySpnPnSupport) b |= 0x04;
    if (lprSupport) b |= 0x08;
    return b;
}

RspCapability RspCapability::from_byte(std::uint8_t b) {
    if (b & ~0x0F) throw BadMessage("unknown capability bits");
    RspCapability c;
    c.crlStaplingV3Support = b & 0x01;
    c.euiccCiUpdateSupport = b & 0x02;
    c.cancelForEmptySpnPnSupport = b & 0x04;
    c.lprSupport = b & 0x08;
    return c;
}

std::uint8_t PprSet::to_byte() const {
    std::uint8_t b = 0;
    if (ppr1) b |= 0x01;
    if (ppr2) b |= 0x02;
    return b;
}

PprSet PprSet::from_byte(std::uint8_t b) {
    if (b & ~0x03) throw BadMessage("unknown ppr bits");
    PprSet p;
    p.ppr1 = b & 0x01;
    p.ppr2 = b & 0x02;
    return p;
}

namespace {

void write_keyid_list(tlv::Writer& w, std::uint8_t tag,
                      const std::vector<pki::PublicKeyId>& ids) {
    tlv::Writer inner;
    for (const auto& id : ids) inner.field(0x80, as_span(id.id));
    w.field(tag, inner.bytes());
}

std::vector<pki::PublicKeyId> read_keyid_list(tlv::Reader& r, std::uint8_t tag) {
    tlv::Reader inner(r.expect(tag));
    std::vector<pki::PublicKeyId> out;
    while (!inner.at_end()) out.push_back(pki::PublicKeyId::from_bytes(inner.expect(0x80)));
    return out;
}

void write_txid(tlv::Writer& w, std::uint8_t tag, const TransactionId& t) {
    w.field(tag, as_span(t.id));
}

TransactionId read_txid(tlv::Reader& r, std::uint8_t tag) {
    TransactionId t;
    t.id = to_array<16>(r.expect(tag));
    return t;
}

void write_capability(tlv::Writer& w, std::uint8_t tag, const RspCapability& c) {
    Bytes b{c.to_byte()};
    w.field(tag, b);
}

RspCapability read_capability(tlv::Reader& r, std::uint8_t tag) {
    ByteSpan c = r.expect(tag);
    if (c.size() != 1) throw tlv::MalformedTlv("capability must be one byte");
    try {
        return RspCapability::from_byte(c[0]);
    } catch (const BadMessage& e) {
        throw tlv::MalformedTlv(e.what());
    }
}

}  // namespace

Bytes EuiccInfo1::encode() const {
    tlv::Writer w;
    write_keyid_list(w, 0x80, verificationKeyIds);
    write_keyid_list(w, 0x81, signingKeyIds);
    write_capability(w, 0x82, capability);
    return tlv::Writer::wrap(tag::EuiccInfo1, w.bytes());
}

EuiccInfo1 EuiccInfo1::decode(ByteSpan data) {
    tlv::Reader r(tlv::unwrap(tag::EuiccInfo1, data));
    EuiccInfo1 v;
    v.verificationKeyIds = read_keyid_list(r, 0x80);
    v.signingKeyIds = read_keyid_list(r, 0x81);
    v.capability = read_capability(r, 0x82);
    r.finish();
    return v;
}

Bytes EuiccInfo2::encode() const {
    tlv::Writer w;
    w.field(0x80, info1.encode());
    Bytes svnBytes{svn.major, svn.minor, svn.patch};
    w.field(0x81, svnBytes);
    w.field_uint(0x82, freeNonVolatileMemory);
    w.field_uint(0x83, installedProfileCount);
    return tlv::Writer::wrap(tag::EuiccInfo2, w.bytes());
}

EuiccInfo2 EuiccInfo2::decode(ByteSpan data) {
    tlv::Reader r(tlv::unwrap(tag::EuiccInfo2, data));
    EuiccInfo2 v;
    v.info1 = EuiccInfo1::decode(r.expect(0x80));
    ByteSpan svn = r.expect(0x81);
    if (svn.size() != 3) throw tlv::MalformedTlv("svn must be 3 bytes");
    v.svn = {svn[0], svn[1], svn[2]};
    v.freeNonVolatileMemory = r.expect_uint(0x82);
    v.installedProfileCount = r.expect_uint(0x83);
    r.finish();
    return v;
}

Bytes ServerSigned1::encode() const {
    tlv::Writer w;
    write_txid(w, 0x80, transactionId);
    w.field(0x81, as_span(euiccChallenge));
    w.field_text(0x82, serverAddress);
    w.field(0x83, as_span(serverChallenge));
    return tlv::Writer::wrap(tag::ServerSigned1, w.bytes());
}

ServerSigned1 ServerSigned1::decode(ByteSpan data) {
    tlv::Reader r(tlv::unwrap(tag::ServerSigned1, data));
    ServerSigned1 v;
    v.transactionId = read_txid(r, 0x80);
    v.euiccChallenge = to_array<16>(r.expect(0x81));
    v.serverAddress = r.expect_text(0x82);
    v.serverChallenge = to_array<16>(r.expect(0x83));
    r.finish();
    return v;
}

Bytes DeviceInfo::encode() const {
    tlv::Writer w;
    w.field_text(0x80, tac);
    write_capability(w, 0x81, deviceCapabilities);
    return tlv::Writer::wrap(tag::DeviceInfo, w.bytes());
}

DeviceInfo DeviceInfo::decode(ByteSpan data) {
    tlv::Reader r(tlv::unwrap(tag::DeviceInfo, data));
    DeviceInfo v;
    v.tac = r.expect_text(0x80);
    if (v.tac.size() != 8 || !std::all_of(v.tac.begin(), v.tac.end(),
                                          [](char c) { return c >= '0' && c <= '9'; })) {
        throw tlv::MalformedTlv("tac must be 8 digits");
    }
    v.deviceCapabilities = read_capability(r, 0x81);
    r.finish();
    return v;
}

Bytes CtxParams1::encode() const {
    tlv::Writer w;
    w.field_text(0x80, matchingId);
    w.field(0x81, deviceInfo.encode());
    w.field_uint(0x82, static_cast<std::uint64_t>(operationType));
    return tlv::Writer::wrap(tag::CtxParams1, w.bytes());
}

CtxParams1 CtxParams1::decode(ByteSpan data) {
    tlv::Reader r(tlv::unwrap(tag::CtxParams1, data));
    CtxParams1 v;
    v.matchingId = r.expect_text(0x80);
    v.deviceInfo = DeviceInfo::decode(r.expect(0x81));
    std::uint64_t op = r.expect_uint(0x82);
    if (op > 1) throw tlv::MalformedTlv("bad operationType");
    v.operationType = static_cast<OperationType>(op);
    r.finish();
    return v;
}

Bytes EuiccSigned1::encode() const {
    tlv::Writer w;
    write_txid(w, 0x80, transactionId);
    w.field_text(0x81, serverAddress);
    w.field(0x82, as_span(serverChallenge));
    w.field(0x83, euiccInfo2.encode());
    w.field(0x84, ctxParams1.encode());
    return tlv::Writer::wrap(tag::EuiccSigned1, w.bytes());
}

EuiccSigned1 EuiccSigned1::decode(ByteSpan data) {
    tlv::Reader r(tlv::unwrap(tag::EuiccSigned1, data));
    EuiccSigned1 v;
    v.transactionId = read_txid(r, 0x80);
    v.serverAddress = r.expect_text(0x81);
    v.serverChallenge = to_array<16>(r.expect(0x82));
    v.euiccInfo2 = EuiccInfo2::decode(r.expect(0x83));
    v.ctxParams1 = CtxParams1::decode(r.expect(0x84));
    r.finish();
    return v;
}

Bytes SmdpSigned2::encode() const {
    tlv::Writer w;
    write_txid(w, 0x80, transactionId);
    w.field_bool(0x81, ccRequiredFlag);
    if (bppEuiccOtpk) w.field(0x82, as_span(*bppEuiccOtpk));
    if (rpmPending) w.field(0x83, ByteSpan{});
    return tlv::Writer::wrap(tag::SmdpSigned2, w.bytes());
}

SmdpSigned2 SmdpSigned2::decode(ByteSpan data) {
    tlv::Reader r(tlv::unwrap(tag::SmdpSigned2, data));
    SmdpSigned2 v;
    v.transactionId = read_txid(r, 0x80);
    v.ccRequiredFlag = r.expect_bool(0x81);
    if (auto otpk = r.optional(0x82)) v.bppEuiccOtpk = to_array<32>(*otpk);
    if (auto flag = r.optional(0x83)) {
        if (!flag->empty()) throw tlv::MalformedTlv("rpmPending must be empty");
        v.rpmPending = true;
    }
    r.finish();
    return v;
}

Bytes EuiccSigned2::encode() const {
    tlv::Writer w;
    write_txid(w, 0x80, transactionId);
    w.field(0x81, as_span(euiccOtpk));
    if (hashCc) w.field(0x82, as_span(*hashCc));
    return tlv::Writer::wrap(tag::EuiccSigned2, w.bytes());
}

EuiccSigned2 EuiccSigned2::decode(ByteSpan data) {
    tlv::Reader r(tlv::unwrap(tag::EuiccSigned2, data));
    EuiccSigned2 v;
    v.transactionId = read_txid(r, 0x80);
    v.euiccOtpk = to_array<32>(r.expect(0x81));
    if (auto h = r.optional(0x82)) v.hashCc = to_array<32>(*h);
    r.finish();
    return v;
}

Bytes ProfileMetadata::encode() const {
    tlv::Writer w;
    w.field(0x80, as_span(iccid));
    w.field_text(0x81, profileName);
    w.field_text(0x82, serviceProviderName);
    Bytes ppr{pprs.to_byte()};
    w.field(0x83, ppr);
    w.field_bool(0x84, lprConfigPresent);
    return tlv::Writer::wrap(tag::ProfileMetadata, w.bytes());
}

ProfileMetadata ProfileMetadata::decode(ByteSpan data) {
    tlv::Reader r(tlv::unwrap(tag::ProfileMetadata, data));
    ProfileMetadata v;
    v.iccid = to_array<10>(r.expect(0x80));
    v.profileName = r.expect_text(0x81);
    v.serviceProviderName = r.expect_text(0x82);
    ByteSpan ppr = r.expect(0x83);
    if (ppr.size() != 1) throw tlv::MalformedTlv("ppr set must be one byte");
    try {
        v.pprs = PprSet::from_byte(ppr[0]);
    } catch (const BadMessage& e) {
        throw tlv::MalformedTlv(e.what());
    }
    v.lprConfigPresent = r.expect_bool(0x84);
    r.finish();
    return v;
}

Bytes InitialiseSecureChannel::tbs_bytes() const {
    tlv::Writer w;
    write_txid(w, 0x80, transactionId);
    w.field(0x81, as_span(smdpOtpkKa));
    return w.take();
}

Bytes InitialiseSecureChannel::encode() const {
    tlv::Writer w;
    w.raw(tbs_bytes());
    w.field(0x82, as_span(signature));
    return tlv::Writer::wrap(tag::InitialiseSecureChannel, w.bytes());
}

InitialiseSecureChannel InitialiseSecureChannel::decode(ByteSpan data) {
    tlv::Reader r(tlv::unwrap(tag::InitialiseSecureChannel, data));
    InitialiseSecureChannel v;
    v.transactionId = read_txid(r, 0x80);
    v.smdpOtpkKa = to_array<32>(r.expect(0x81));
    v.signature = to_array<64>(r.expect(0x82));
    r.finish();
    return v;
}

Bytes SealedSegment::encode() const {
    if (payload.size() > kMaxPayload) throw tlv::LengthOverflow("segment payload above cap");
    tlv::Writer w;
    w.field(0x80, payload);
    w.field(0x81, as_span(mac));
    return tlv::Writer::wrap(tag::SealedSegment, w.bytes());
}

SealedSegment SealedSegment::decode(ByteSpan data) {
    tlv::Reader r(tlv::unwrap(tag::SealedSegment, data));
    SealedSegment v;
    v.payload = to_bytes(r.expect(0x80));
    if (v.payload.size() > kMaxPayload) throw tlv::MalformedTlv("segment payload above cap");
    v.mac = to_array<16>(r.expect(0x81));
    r.finish();
    return v;
}

Bytes BoundProfilePackage::encode() const {
    tlv::Writer w;
    w.field(0x80, initialiseSecureChannel.encode());
    w.field(0x81, configureIsdp.encode());
    w.field(0x82, storeMetadata.encode());
    tlv::Writer elems;
    for (const auto& seg : loadProfileElements) elems.raw(seg.encode());
    w.field(0x83, elems.bytes());
    return tlv::Writer::wrap(tag::BoundProfilePackage, w.bytes());
}

BoundProfilePackage BoundProfilePackage::decode(ByteSpan data) {
    tlv::Reader r(tlv::unwrap(tag::BoundProfilePackage, data));
    BoundProfilePackage v;
    v.initialiseSecureChannel = InitialiseSecureChannel::decode(r.expect(0x80));
    v.configureIsdp = SealedSegment::decode(r.expect(0x81));
    v.storeMetadata = SealedSegment::decode(r.expect(0x82));
    tlv::Reader elems(r.expect(0x83));
    while (!elems.at_end()) {
        v.loadProfileElements.push_back(SealedSegment::decode(elems.expect_raw(tag::SealedSegment)));
    }
    if (v.loadProfileElements.empty()) throw tlv::MalformedTlv("no profile elements");
    r.finish();
    return v;
}

Bytes NotificationMetadata::encode() const {
    tlv::Writer w;
    w.field_uint(0x80, seqNumber);
    w.field(0x81, as_span(iccid));
    return tlv::Writer::wrap(tag::NotificationMetadata, w.bytes());
}

NotificationMetadata NotificationMetadata::decode(ByteSpan data) {
    tlv::Reader r(tlv::unwrap(tag::NotificationMetadata, data));
    NotificationMetadata v;
    v.seqNumber = r.expect_uint(0x80);
    v.iccid = to_array<10>(r.expect(0x81));
    r.finish();
    return v;
}

Bytes SuccessResult::encode() const {
    if (isdpAid.size() < 5 || isdpAid.size() > 16) throw tlv::MalformedTlv("aid size 5..16");
    tlv::Writer w;
    w.field(0x80, isdpAid);
    return tlv::Writer::wrap(tag::SuccessResult, w.bytes());
}

SuccessResult SuccessResult::decode(ByteSpan data) {
    tlv::Reader r(tlv::unwrap(tag::SuccessResult, data));
    SuccessResult v;
    v.isdpAid = to_bytes(r.expect(0x80));
    if (v.isdpAid.size() < 5 || v.isdpAid.size() > 16) throw tlv::MalformedTlv("aid size 5..16");
    r.finish();
    return v;
}

Bytes ErrorResult::encode() const {
    tlv::Writer w;
    w.field_uint(0x80, static_cast<std::uint64_t>(bppCommandId));
    w.field_uint(0x81, static_cast<std::uint64_t>(errorReason));
    if (ppiResponse) w.field(0x82, *ppiResponse);
    return tlv::Writer::wrap(tag::ErrorResult, w.bytes());
}

ErrorResult ErrorResult::decode(ByteSpan data) {
    tlv::Reader r(tlv::unwrap(tag::ErrorResult, data));
    ErrorResult v;
    try {
        v.bppCommandId = bpp_command_from_int(static_cast<std::int64_t>(r.expect_uint(0x80)));
        v.errorReason = error_reason_from_int(static_cast<std::int64_t>(r.expect_uint(0x81)));
    } catch (const BadMessage& e) {
        throw tlv::MalformedTlv(e.what());
    }
    if (auto ppi = r.optional(0x82)) {
        if (ppi->empty()) throw tlv::MalformedTlv("empty optional ppiResponse");
        v.ppiResponse = to_bytes(*ppi);
    }
    r.finish();
    return v;
}

Bytes ProfileInstallationResultData::encode() const {
    tlv::Writer w;
    write_txid(w, 0x80, transactionId);
    w.field(0x81, notificationMetadata.encode());
    w.field_text(0x82, smdpOid);
    if (success()) {
        w.field(0x83, std::get<SuccessResult>(finalResult).encode());
    } else {
        w.field(0x84, std::get<ErrorResult>(finalResult).encode());
    }
    return tlv::Writer::wrap(tag::ProfileInstallationResultData, w.bytes());
}

ProfileInstallationResultData ProfileInstallationResultData::decode(ByteSpan data) {
    tlv::Reader r(tlv::unwrap(tag::ProfileInstallationResultData, data));
    ProfileInstallationResultData v;
    v.transactionId = read_txid(r, 0x80);
    v.notificationMetadata = NotificationMetadata::decode(r.expect(0x81));
    v.smdpOid = r.expect_text(0x82);
    if (auto ok = r.optional(0x83)) {
        v.finalResult = SuccessResult::decode(*ok);
    } else {
        v.finalResult = ErrorResult::decode(r.expect(0x84));
    }
    r.finish();
    return v;
}

Bytes ProfileInstallationResult::encode() const {
    tlv::Writer w;
    w.field(0x80, data.encode());
    w.field(0x81, as_span(euiccSignPIR));
    return tlv::Writer::wrap(tag::ProfileInstallationResult, w.bytes());
}

ProfileInstallationResult ProfileInstallationResult::decode(ByteSpan raw) {
    tlv::Reader r(tlv::unwrap(tag::ProfileInstallationResult, raw));
    ProfileInstallationResult v;
    v.data = ProfileInstallationResultData::decode(r.expect(0x80));
    v.euiccSignPIR = to_array<64>(r.expect(0x81));
    r.finish();
    return v;
}

Bytes CancelSessionRequest::encode() const {
    tlv::Writer w;
    write_txid(w, 0x80, transactionId);
    w.field_uint(0x81, static_cast<std::uint64_t>(reason));
    return tlv::Writer::wrap(tag::CancelSessionRequest, w.bytes());
}

CancelSessionRequest CancelSessionRequest::decode(ByteSpan data) {
    tlv::Reader r(tlv::unwrap(tag::CancelSessionRequest, data));
    CancelSessionRequest v;
    v.transactionId = read_txid(r, 0x80);
    try {
        v.reason = cancel_reason_from_int(static_cast<std::int64_t>(r.expect_uint(0x81)));
    } catch (const BadMessage& e) {
        throw tlv::MalformedTlv(e.what());
    }
    r.finish();
    return v;
}

Bytes EuiccCancelSessionSigned::encode() const {
    tlv::Writer w;
    write_txid(w, 0x80, transactionId);
    w.field_text(0x81, smdpOid);
    w.field_uint(0x82, static_cast<std::uint64_t>(reason));
    return tlv::Writer::wrap(tag::EuiccCancelSessionSigned, w.bytes());
}

EuiccCancelSessionSigned EuiccCancelSessionSigned::decode(ByteSpan data) {
    tlv::Reader r(tlv::unwrap(tag::EuiccCancelSessionSigned, data));
    EuiccCancelSessionSigned v;
    v.transactionId = read_txid(r, 0x80);
    v.smdpOid = r.expect_text(0x81);
    try {
        v.reason = cancel_reason_from_int(static_cast<std::int64_t>(r.expect_uint(0x82)));
    } catch (const BadMessage& e) {
        throw tlv::MalformedTlv(e.what());
    }
    r.finish();
    return v;
}

Bytes CancelSessionResponse::encode() const {
    tlv::Writer w;
    if (ok()) {
        const auto& o = std::get<CancelSessionResponseOk>(result);
        tlv::Writer inner;
        inner.field(0x80, o.euiccCancelSessionSigned.encode());
        inner.field(0x81, as_span(o.euiccCancelSessionSignature));
        w.field(0x80, inner.bytes());
    } else {
        w.field_uint(0x81, static_cast<std::uint64_t>(std::get<CancelSessionRespError>(result)));
    }
    return tlv::Writer::wrap(tag::CancelSessionResponse, w.bytes());
}

CancelSessionResponse CancelSessionResponse::decode(ByteSpan data) {
    tlv::Reader r(tlv::unwrap(tag::CancelSessionResponse, data));
    CancelSessionResponse v;
    if (auto okBody = r.optional(0x80)) {
        tlv::Reader inner(*okBody);
        CancelSessionResponseOk o;
        o.euiccCancelSessionSigned = EuiccCancelSessionSigned::decode(inner.expect(0x80));
        o.euiccCancelSessionSignature = to_array<64>(inner.expect(0x81));
        inner.finish();
        v.result = o;
    } else {
        try {
            v.result =
                cancel_resp_error_from_int(static_cast<std::int64_t>(r.expect_uint(0x81)));
        } catch (const BadMessage& e) {
            throw tlv::MalformedTlv(e.what());
        }
    }
    r.finish();
    return v;
}

Bytes EimConfigurationData::encode() const {
    tlv::Writer w;
    w.field_text(0x80, eimId);
    w.field(0x81, as_span(eimPublicKey));
    w.field_text(0x82, eimAddress);
    return tlv::Writer::wrap(tag::EimConfigurationData, w.bytes());
}

EimConfigurationData EimConfigurationData::decode(ByteSpan data) {
    tlv::Reader r(tlv::unwrap(tag::EimConfigurationData, data));
    EimConfigurationData v;
    v.eimId = r.expect_text(0x80);
    v.eimPublicKey = to_array<32>(r.expect(0x81));
    v.eimAddress = r.expect_text(0x82);
    r.finish();
    return v;
}

Bytes EimOperation::encode() const {
    tlv::Writer w;
    w.field_uint(0x80, static_cast<std::uint64_t>(kind));
    if (config) w.field(0x81, config->encode());
    return tlv::Writer::wrap(tag::EimOperation, w.bytes());
}

EimOperation EimOperation::decode(ByteSpan data) {
    tlv::Reader r(tlv::unwrap(tag::EimOperation, data));
    EimOperation v;
    std::uint64_t kind = r.expect_uint(0x80);
    if (kind > 2) throw tlv::MalformedTlv("bad eim operation kind");
    v.kind = static_cast<EimOperationKind>(kind);
    if (auto cfg = r.optional(0x81)) v.config = EimConfigurationData::decode(*cfg);
    if (v.kind != EimOperationKind::removeConfig && !v.config) {
        throw tlv::MalformedTlv("operation requires configuration data");
    }
    r.finish();
    return v;
}

Bytes SignedEimOperation::encode() const {
    tlv::Writer w;
    w.field(0x80, operation.encode());
    w.field(0x81, as_span(signature));
    return tlv::Writer::wrap(tag::SignedEimOperation, w.bytes());
}

SignedEimOperation SignedEimOperation::decode(ByteSpan data) {
    tlv::Reader r(tlv::unwrap(tag::SignedEimOperation, data));
    SignedEimOperation v;
    v.operation = EimOperation::decode(r.expect(0x80));
    v.signature = to_array<64>(r.expect(0x81));
    r.finish();
    return v;
}

std::string ActivationCode::render() const {
    std::string out = "LPA:" + std::to_string(version) + "$" + smdpAddress + "$" + matchingId;
    if (!oid.empty()) out += "$" + oid;
    return out;
}

ActivationCode ActivationCode::parse(const std::string& text) {
    if (text.rfind("LPA:", 0) != 0) throw BadActivationCode("missing LPA: prefix");
    std::string rest = text.substr(4);
    std::vector<std::string> parts;
    std::size_t pos = 0;
    while (true) {
        std::size_t dollar = rest.find('$', pos);
        if (dollar == std::string::npos) {
            parts.push_back(rest.substr(pos));
            break;
        }
        parts.push_back(rest.substr(pos, dollar - pos));
        pos = dollar + 1;
    }
    if (parts.size() < 3 || parts.size() > 4) throw BadActivationCode("wrong field count");
    ActivationCode ac;
    if (parts[0].empty() ||
        !std::all_of(parts[0].begin(), parts[0].end(), [](char c) { return c >= '0' && c <= '9'; }))
        throw BadActivationCode("bad version");
    ac.version = std::stoull(parts[0]);
    ac.smdpAddress = parts[1];
    ac.matchingId = parts[2];
    if (ac.smdpAddress.empty()) throw BadActivationCode("empty address");
    if (ac.matchingId.empty()) throw BadActivationCode("empty matchingId");
    if (parts.size() == 4) {
        if (parts[3].empty()) throw BadActivationCode("empty oid section");
        ac.oid = parts[3];
    }
    return ac;
}

Bytes ActivationCode::encode() const {
    tlv::Writer w;
    w.field_uint(0x80, version);
    w.field_text(0x81, smdpAddress);
    w.field_text(0x82, matchingId);
    if (!oid.empty()) w.field_text(0x83, oid);
    return tlv::Writer::wrap(tag::ActivationCode, w.bytes());
}

ActivationCode ActivationCode::decode(ByteSpan data) {
    tlv::Reader r(tlv::unwrap(tag::ActivationCode, data));
    ActivationCode v;
    v.version = r.expect_uint(0x80);
    v.smdpAddress = r.expect_text(0x81);
    v.matchingId = r.expect_text(0x82);
    if (auto oid = r.optional(0x83)) {
        if (oid->empty()) throw tlv::MalformedTlv("empty optional oid");
        v.oid = std::string(reinterpret_cast<const char*>(oid->data()), oid->size());
    }
    r.finish();
    return v;
}

Octet32 compute_hash_cc(const std::string& confirmationCode, const TransactionId& transactionId) {
    if (confirmationCode.empty()) throw EmptyCode("confirmation code must not be empty");
    Octet32 inner = crypto::sha256(as_span(confirmationCode));
    Bytes buf;
    append(buf, as_span(inner));
    append(buf, as_span(transactionId.id));
    return crypto::sha256(buf);
}

// ---------------------------------------------------------------------------
// FlowReport
// ---------------------------------------------------------------------------

const char* outcome_name(FlowReport::Outcome o) {
    switch (o) {
        case FlowReport::Outcome::installed: return "installed";
        case FlowReport::Outcome::cancelled: return "cancelled";
        case FlowReport::Outcome::error: return "error";
        case FlowReport::Outcome::authenticated: return "authenticated";
        case FlowReport::Outcome::eimConfigured: return "eimConfigured";
    }
    return "?";
}

FlowReport::Outcome outcome_from_name(const std::string& name) {
    for (auto o : {FlowReport::Outcome::installed, FlowReport::Outcome::cancelled,
                   FlowReport::Outcome::error, FlowReport::Outcome::authenticated,
                   FlowReport::Outcome::eimConfigured}) {
        if (name == outcome_name(o)) return o;
    }
    throw BadMessage("unknown outcome " + name);
}

FlowReport FlowReport::make_installed(TransactionId txid) {
    FlowReport r;
    r.outcome = Outcome::installed;
    r.transactionId = txid;
    return r;
}

FlowReport FlowReport::make_cancelled(CancelSessionReason reason, TransactionId txid) {
    FlowReport r;
    r.outcome = Outcome::cancelled;
    r.cancelReason = reason;
    r.transactionId = txid;
    return r;
}

FlowReport FlowReport::make_error(std::string stage, std::int64_t code, std::string name) {
    FlowReport r;
    r.outcome = Outcome::error;
    r.errorStage = std::move(stage);
    r.errorCode = code;
    r.errorName = std::move(name);
    return r;
}

json FlowReport::to_json() const {
    json j;
    j["outcome"] = outcome_name(outcome);
    if (cancelReason) j["cancelReason"] = static_cast<int>(*cancelReason);
    if (outcome == Outcome::error) {
        j["errorStage"] = errorStage;
        j["errorCode"] = errorCode;
        j["errorName"] = errorName;
    }
    if (transactionId) j["transactionId"] = transactionId->hex();
    if (!transcriptRef.empty()) j["transcriptRef"] = transcriptRef;
    return j;
}

FlowReport FlowReport::from_json(const json& j) {
    JsonView v(j);
    FlowReport r;
    r.outcome = outcome_from_name(v.get_string("outcome"));
    if (v.find("cancelReason")) r.cancelReason = cancel_reason_from_int(v.get_int("cancelReason"));
    if (r.outcome == Outcome::error) {
        r.errorStage = v.get_string("errorStage");
        r.errorCode = v.get_int("errorCode");
        r.errorName = v.get_string("errorName");
    }
    if (v.find("transactionId")) r.transactionId = v.get_txid("transactionId");
    if (v.find("transcriptRef")) r.transcriptRef = v.get_string("transcriptRef");
    v.done();
    return r;
}

Bytes FlowReport::encode() const {
    tlv::Writer w;
    w.field_uint(0x80, static_cast<std::uint64_t>(outcome));
    if (cancelReason) w.field_uint(0x81, static_cast<std::uint64_t>(*cancelReason));
    if (outcome == Outcome::error) {
        w.field_text(0x82, errorStage);
        w.field_uint(0x83, static_cast<std::uint64_t>(errorCode));
        w.field_text(0x84, errorName);
    }
    if (transactionId) write_txid(w, 0x85, *transactionId);
    if (!transcriptRef.empty()) w.field_text(0x86, transcriptRef);
    return tlv::Writer::wrap(tag::FlowReport, w.bytes());
}

FlowReport FlowReport::decode(ByteSpan data) {
    tlv::Reader r(tlv::unwrap(tag::FlowReport, data));
    FlowReport v;
    std::uint64_t o = r.expect_uint(0x80);
    if (o > 4) throw tlv::MalformedTlv("bad outcome");
    v.outcome = static_cast<Outcome>(o);
    if (auto reason = r.optional(0x81)) {
        try {
            v.cancelReason = cancel_reason_from_int(
                static_cast<std::int64_t>(tlv::decode_uint(*reason)));
        } catch (const BadMessage& e) {
            throw tlv::MalformedTlv(e.what());
        }
    }
    if (v.outcome == Outcome::error) {
        v.errorStage = r.expect_text(0x82);
        v.errorCode = static_cast<std::int64_t>(r.expect_uint(0x83));
        v.errorName = r.expect_text(0x84);
    }
    if (auto txid = r.optional(0x85)) {
        TransactionId t;
        t.id = to_array<16>(*txid);
        v.transactionId = t;
    }
    if (auto ref = r.optional(0x86)) {
        if (ref->empty()) throw tlv::MalformedTlv("empty optional transcriptRef");
        v.transcriptRef = std::string(reinterpret_cast<const char*>(ref->data()), ref->size());
    }
    r.finish();
    return v;
}

// ---------------------------------------------------------------------------
// Strict JSON helpers
// ---------------------------------------------------------------------------

JsonView::JsonView(const json& j) : j_(j) {
    if (!j.is_object()) throw BadMessage("body must be a JSON object");
}

const json& JsonView::get(const char* key) {
    auto it = j_.find(key);
    if (it == j_.end()) throw BadMessage(std::string("missing field ") + key);
    used_.push_back(key);
    return *it;
}

const json* JsonView::find(const char* key) {
    auto it = j_.find(key);
    if (it == j_.end()) return nullptr;
    used_.push_back(key);
    return &*it;
}

std::string JsonView::get_string(const char* key) {
    const json& v = get(key);
    if (!v.is_string()) throw BadMessage(std::string(key) + " must be a string");
    return v.get<std::string>();
}

std::int64_t JsonView::get_int(const char* key) {
    const json& v = get(key);
    if (!v.is_number_integer()) throw BadMessage(std::string(key) + " must be an integer");
    return v.get<std::int64_t>();
}

bool JsonView::get_bool(const char* key) {
    const json& v = get(key);
    if (!v.is_boolean()) throw BadMessage(std::string(key) + " must be a boolean");
    return v.get<bool>();
}

Bytes JsonView::get_b64(const char* key) {
    try {
        return from_base64(get_string(key));
    } catch (const Base64Error& e) {
        throw BadMessage(std::string(key) + ": " + e.what());
    }
}

Bytes JsonView::get_b64(const char* key, std::size_t expectedSize) {
    Bytes raw = get_b64(key);
    if (raw.size() != expectedSize) throw BadMessage(std::string(key) + ": wrong length");
    return raw;
}

TransactionId JsonView::get_txid(const char* key) { return TransactionId::from_hex(get_string(key)); }

std::vector<Bytes> JsonView::get_b64_list(const char* key) {
    const json& v = get(key);
    if (!v.is_array()) throw BadMessage(std::string(key) + " must be an array");
    std::vector<Bytes> out;
    for (const auto& item : v) {
        if (!item.is_string()) throw BadMessage(std::string(key) + " items must be strings");
        try {
            out.push_back(from_base64(item.get<std::string>()));
        } catch (const Base64Error& e) {
            throw BadMessage(std::string(key) + ": " + e.what());
        }
    }
    return out;
}

std::optional<Bytes> JsonView::find_b64(const char* key, std::size_t expectedSize) {
    if (find(key) == nullptr) return std::nullopt;
    used_.pop_back();  // get_b64 re-marks it
    Bytes raw = get_b64(key);
    if (raw.size() != expectedSize) throw BadMessage(std::string(key) + ": wrong length");
    return raw;
}

void JsonView::done() {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
        if (std::find(used_.begin(), used_.end(), it.key()) == used_.end()) {
            throw BadMessage("unknown field " + it.key());
        }
    }
}

json ok_header() {
    return json{{"header", {{"functionExecutionStatus", {{"status", "Executed-Success"}}}}}};
}

json failed_header() {
    return json{{"header", {{"functionExecutionStatus", {{"status", "Failed"}}}}}};
}

bool read_header(JsonView& v) {
    const json& h = v.get("header");
    if (!h.is_object() || h.size() != 1) throw BadMessage("bad header");
    auto fes = h.find("functionExecutionStatus");
    if (fes == h.end() || !fes->is_object() || fes->size() != 1) throw BadMessage("bad header");
    auto status = fes->find("status");
    if (status == fes->end() || !status->is_string()) throw BadMessage("bad header");
    std::string s = status->get<std::string>();
    if (s == "Executed-Success") return true;
    if (s == "Failed") return false;
    throw BadMessage("unknown execution status " + s);
}

// ---------------------------------------------------------------------------
// Wire messages
// ---------------------------------------------------------------------------

namespace {

json cert_list_to_json(const std::vector<pki::Certificate>& certs) {
    json arr = json::array();
    for (const auto& c : certs) arr.push_back(to_base64(as_span(c.encode())));
    return arr;
}

std::vector<pki::Certificate> cert_list_from_b64(const std::vector<Bytes>& raws) {
    std::vector<pki::Certificate> out;
    for (const auto& raw : raws) out.push_back(pki::Certificate::decode(as_span(raw)));
    return out;
}

json crl_list_to_json(const std::vector<pki::Crl>& crls) {
    json arr = json::array();
    for (const auto& c : crls) arr.push_back(to_base64(as_span(c.encode())));
    return arr;
}

std::vector<pki::Crl> crl_list_from_b64(const std::vector<Bytes>& raws) {
    std::vector<pki::Crl> out;
    for (const auto& raw : raws) out.push_back(pki::Crl::decode(as_span(raw)));
    return out;
}

}  // namespace

json InitiateAuthenticationRequest::to_json() const {
    json j;
    j["euiccChallenge"] = b64_fixed(as_span(euiccChallenge));
    j["euiccInfo1"] = b64_tlv(euiccInfo1);
    j["smdpAddress"] = smdpAddress;
    Bytes cap{lpaRspCapability.to_byte()};
    j["lpaRspCapability"] = to_base64(cap);
    return j;
}

InitiateAuthenticationRequest InitiateAuthenticationRequest::from_json(const json& j) {
    JsonView v(j);
    InitiateAuthenticationRequest r;
    r.euiccChallenge = to_array<16>(as_span(v.get_b64("euiccChallenge", 16)));
    r.euiccInfo1 = EuiccInfo1::decode(as_span(v.get_b64("euiccInfo1")));
    r.smdpAddress = v.get_string("smdpAddress");
    Bytes cap = v.get_b64("lpaRspCapability", 1);
    r.lpaRspCapability = RspCapability::from_byte(cap[0]);
    v.done();
    return r;
}

json InitiateAuthenticationOk::to_json() const {
    json j = ok_header();
    j["transactionId"] = transactionId.hex();
    j["serverSigned1"] = b64_tlv(serverSigned1);
    j["serverSignature1"] = b64_fixed(as_span(serverSignature1));
    j["euiccCiPKIdToBeUsed"] = b64_fixed(as_span(euiccCiPKIdToBeUsed.id));
    j["serverCertificate"] = b64_tlv(serverCertificate);
    j["otherCertsInChain"] = cert_list_to_json(otherCertsInChain);
    if (!crlList.empty()) j["crlList"] = crl_list_to_json(crlList);
    return j;
}

InitiateAuthenticationOk InitiateAuthenticationOk::from_json(const json& j) {
    JsonView v(j);
    if (!read_header(v)) throw BadMessage("ok message with Failed header");
    InitiateAuthenticationOk r;
    r.transactionId = v.get_txid("transactionId");
    r.serverSigned1 = ServerSigned1::decode(as_span(v.get_b64("serverSigned1")));
    r.serverSignature1 = to_array<64>(as_span(v.get_b64("serverSignature1", 64)));
    r.euiccCiPKIdToBeUsed = pki::PublicKeyId::from_bytes(as_span(v.get_b64("euiccCiPKIdToBeUsed", 20)));
    r.serverCertificate = pki::Certificate::decode(as_span(v.get_b64("serverCertificate")));
    r.otherCertsInChain = cert_list_from_b64(v.get_b64_list("otherCertsInChain"));
    if (v.find("crlList")) {
        const json& arr = j.at("crlList");
        if (!arr.is_array()) throw BadMessage("crlList must be an array");
        std::vector<Bytes> raws;
        for (const auto& item : arr) {
            if (!item.is_string()) throw BadMessage("crlList items must be strings");
            raws.push_back(from_base64(item.get<std::string>()));
        }
        r.crlList = crl_list_from_b64(raws);
    }
    v.done();
    return r;
}

json InitiateAuthenticationResponse::to_json() const {
    if (ok()) return std::get<InitiateAuthenticationOk>(result).to_json();
    json j = failed_header();
    j["initiateAuthenticationError"] = std::get<std::string>(result);
    return j;
}

InitiateAuthenticationResponse InitiateAuthenticationResponse::from_json(const json& j) {
    JsonView probe(j);
    bool success = read_header(probe);
    InitiateAuthenticationResponse r;
    if (success) {
        r.result = InitiateAuthenticationOk::from_json(j);
    } else {
        std::string code = probe.get_string("initiateAuthenticationError");
        if (code != "invalidSmdpAddress" && code != "noCommonRoot") {
            throw BadMessage("unknown initiateAuthenticationError " + code);
        }
        probe.done();
        r.result = code;
    }
    return r;
}

json AuthenticateServerRequest::to_json() const {
    json j;
    j["serverSigned1"] = b64_tlv(serverSigned1);
    j["serverSignature1"] = b64_fixed(as_span(serverSignature1));
    if (euiccCiPKIdToBeUsed) j["euiccCiPKIdToBeUsed"] = b64_fixed(as_span(euiccCiPKIdToBeUsed->id));
    j["serverCertificate"] = b64_tlv(serverCertificate);
    j["ctxParams1"] = b64_tlv(ctxParams1);
    j["otherCertsInChain"] = cert_list_to_json(otherCertsInChain);
    if (!crlList.empty()) j["crlList"] = crl_list_to_json(crlList);
    return j;
}

AuthenticateServerRequest AuthenticateServerRequest::from_json(const json& j) {
    JsonView v(j);
    AuthenticateServerRequest r;
    r.serverSigned1 = ServerSigned1::decode(as_span(v.get_b64("serverSigned1")));
    r.serverSignature1 = to_array<64>(as_span(v.get_b64("serverSignature1", 64)));
    if (auto raw = v.find_b64("euiccCiPKIdToBeUsed", 20)) {
        r.euiccCiPKIdToBeUsed = pki::PublicKeyId::from_bytes(as_span(*raw));
    }
    r.serverCertificate = pki::Certificate::decode(as_span(v.get_b64("serverCertificate")));
    r.ctxParams1 = CtxParams1::decode(as_span(v.get_b64("ctxParams1")));
    r.otherCertsInChain = cert_list_from_b64(v.get_b64_list("otherCertsInChain"));
    if (v.find("crlList")) {
        const json& arr = j.at("crlList");
        if (!arr.is_array()) throw BadMessage("crlList must be an array");
        std::vector<Bytes> raws;
        for (const auto& item : arr) {
            if (!item.is_string()) throw BadMessage("crlList items must be strings");
            raws.push_back(from_base64(item.get<std::string>()));
        }
        r.crlList = crl_list_from_b64(raws);
    }
    v.done();
    return r;
}

json AuthenticateResponseOk::to_json() const {
    json inner;
    inner["euiccSigned1"] = b64_tlv(euiccSigned1);
    inner["euiccSignature1"] = b64_fixed(as_span(euiccSignature1));
    inner["euiccCertificate"] = b64_tlv(euiccCertificate);
    inner["nextCertInChain"] = b64_tlv(nextCertInChain);
    inner["otherCertsInChain"] = cert_list_to_json(otherCertsInChain);
    json j = ok_header();
    j["authenticateResponseOk"] = inner;
    return j;
}

AuthenticateResponseOk AuthenticateResponseOk::from_json(const json& j) {
    JsonView v(j);
    AuthenticateResponseOk r;
    r.euiccSigned1 = EuiccSigned1::decode(as_span(v.get_b64("euiccSigned1")));
    r.euiccSignature1 = to_array<64>(as_span(v.get_b64("euiccSignature1", 64)));
    r.euiccCertificate = pki::Certificate::decode(as_span(v.get_b64("euiccCertificate")));
    r.nextCertInChain = pki::Certificate::decode(as_span(v.get_b64("nextCertInChain")));
    r.otherCertsInChain = cert_list_from_b64(v.get_b64_list("otherCertsInChain"));
    v.done();
    return r;
}

json AuthenticateServerResponse::to_json() const {
    if (ok()) return std::get<AuthenticateResponseOk>(result).to_json();
    const auto& e = std::get<AuthenticateResponseError>(result);
    json j = failed_header();
    j["authenticateResponseError"] = {
        {"transactionId", e.transactionId.hex()},
        {"authenticateErrorCode", static_cast<int>(e.authenticateErrorCode)},
    };
    return j;
}

AuthenticateServerResponse AuthenticateServerResponse::from_json(const json& j) {
    JsonView v(j);
    bool success = read_header(v);
    AuthenticateServerResponse r;
    if (success) {
        const json& inner = v.get("authenticateResponseOk");
        r.result = AuthenticateResponseOk::from_json(inner);
        v.done();
    } else {
        const json& e = v.get("authenticateResponseError");
        JsonView ev(e);
        AuthenticateResponseError err;
        err.transactionId = ev.get_txid("transactionId");
        err.authenticateErrorCode = authenticate_error_from_int(ev.get_int("authenticateErrorCode"));
        ev.done();
        v.done();
        r.result = err;
    }
    return r;
}

json AuthenticateClientRequest::to_json() const {
    json j;
    j["transactionId"] = transactionId.hex();
    j["euiccSigned1"] = b64_tlv(euiccSigned1);
    j["euiccSignature1"] = b64_fixed(as_span(euiccSignature1));
    j["euiccCertificate"] = b64_tlv(euiccCertificate);
    j["nextCertInChain"] = b64_tlv(nextCertInChain);
    j["otherCertsInChain"] = cert_list_to_json(otherCertsInChain);
    return j;
}

AuthenticateClientRequest AuthenticateClientRequest::from_json(const json& j) {
    JsonView v(j);
    AuthenticateClientRequest r;
    r.transactionId = v.get_txid("transactionId");
    r.euiccSigned1 = EuiccSigned1::decode(as_span(v.get_b64("euiccSigned1")));
    r.euiccSignature1 = to_array<64>(as_span(v.get_b64("euiccSignature1", 64)));
    r.euiccCertificate = pki::Certificate::decode(as_span(v.get_b64("euiccCertificate")));
    r.nextCertInChain = pki::Certificate::decode(as_span(v.get_b64("nextCertInChain")));
    r.otherCertsInChain = cert_list_from_b64(v.get_b64_list("otherCertsInChain"));
    v.done();
    return r;
}

json AuthenticateClientOk::to_json() const {
    json j = ok_header();
    j["transactionId"] = transactionId.hex();
    if (profileMetadata) j["profileMetadata"] = b64_tlv(*profileMetadata);
    if (smdpSigned2) j["smdpSigned2"] = b64_tlv(*smdpSigned2);
    if (smdpSignature2) j["smdpSignature2"] = b64_fixed(as_span(*smdpSignature2));
    if (smdpCertificate) j["smdpCertificate"] = b64_tlv(*smdpCertificate);
    return j;
}

AuthenticateClientOk AuthenticateClientOk::from_json(const json& j) {
    JsonView v(j);
    if (!read_header(v)) throw BadMessage("ok message with Failed header");
    AuthenticateClientOk r;
    r.transactionId = v.get_txid("transactionId");
    if (v.find("profileMetadata")) {
        r.profileMetadata = ProfileMetadata::decode(as_span(v.get_b64("profileMetadata")));
    }
    if (v.find("smdpSigned2")) r.smdpSigned2 = SmdpSigned2::decode(as_span(v.get_b64("smdpSigned2")));
    if (auto raw = v.find_b64("smdpSignature2", 64)) r.smdpSignature2 = to_array<64>(as_span(*raw));
    if (v.find("smdpCertificate")) {
        r.smdpCertificate = pki::Certificate::decode(as_span(v.get_b64("smdpCertificate")));
    }
    v.done();
    return r;
}

json AuthenticateClientResponse::to_json() const {
    if (ok()) return std::get<AuthenticateClientOk>(result).to_json();
    json j = failed_header();
    j["authenticateClientError"] = static_cast<int>(std::get<AuthenticateClientError>(result));
    return j;
}

AuthenticateClientResponse AuthenticateClientResponse::from_json(const json& j) {
    JsonView v(j);
    bool success = read_header(v);
    AuthenticateClientResponse r;
    if (success) {
        r.result = AuthenticateClientOk::from_json(j);
    } else {
        r.result = authenticate_client_error_from_int(v.get_int("authenticateClientError"));
        v.done();
    }
    return r;
}

json PrepareDownloadRequest::to_json() const {
    json j;
    j["smdpSigned2"] = b64_tlv(smdpSigned2);
    j["smdpSignature2"] = b64_fixed(as_span(smdpSignature2));
    if (hashCc) j["hashCc"] = b64_fixed(as_span(*hashCc));
    j["smdpCertificate"] = b64_tlv(smdpCertificate);
    return j;
}

PrepareDownloadRequest PrepareDownloadRequest::from_json(const json& j) {
    JsonView v(j);
    PrepareDownloadRequest r;
    r.smdpSigned2 = SmdpSigned2::decode(as_span(v.get_b64("smdpSigned2")));
    r.smdpSignature2 = to_array<64>(as_span(v.get_b64("smdpSignature2", 64)));
    if (auto raw = v.find_b64("hashCc", 32)) r.hashCc = to_array<32>(as_span(*raw));
    r.smdpCertificate = pki::Certificate::decode(as_span(v.get_b64("smdpCertificate")));
    v.done();
    return r;
}

json PrepareDownloadResponse::to_json() const {
    if (ok()) {
        const auto& o = std::get<PrepareDownloadResponseOk>(result);
        json j = ok_header();
        j["downloadResponseOk"] = {
            {"euiccSigned2", b64_tlv(o.euiccSigned2)},
            {"euiccSignature2", b64_fixed(as_span(o.euiccSignature2))},
        };
        return j;
    }
    const auto& e = std::get<PrepareDownloadResponseError>(result);
    json j = failed_header();
    j["downloadResponseError"] = {
        {"transactionId", e.transactionId.hex()},
        {"downloadErrorCode", static_cast<int>(e.downloadErrorCode)},
    };
    return j;
}

PrepareDownloadResponse PrepareDownloadResponse::from_json(const json& j) {
    JsonView v(j);
    bool success = read_header(v);
    PrepareDownloadResponse r;
    if (success) {
        const json& inner = v.get("downloadResponseOk");
        JsonView iv(inner);
        PrepareDownloadResponseOk o;
        o.euiccSigned2 = EuiccSigned2::decode(as_span(iv.get_b64("euiccSigned2")));
        o.euiccSignature2 = to_array<64>(as_span(iv.get_b64("euiccSignature2", 64)));
        iv.done();
        r.result = o;
    } else {
        const json& inner = v.get("downloadResponseError");
        JsonView iv(inner);
        PrepareDownloadResponseError e;
        e.transactionId = iv.get_txid("transactionId");
        e.downloadErrorCode = download_error_from_int(iv.get_int("downloadErrorCode"));
        iv.done();
        r.result = e;
    }
    v.done();
    return r;
}

Bytes PrepareDownloadResponse::encode() const {
    tlv::Writer w;
    if (ok()) {
        const auto& o = std::get<PrepareDownloadResponseOk>(result);
        tlv::Writer inner;
        inner.field(0x80, o.euiccSigned2.encode());
        inner.field(0x81, as_span(o.euiccSignature2));
        w.field(0x80, inner.bytes());
    } else {
        const auto& e = std::get<PrepareDownloadResponseError>(result);
        tlv::Writer inner;
        write_txid(inner, 0x80, e.transactionId);
        inner.field_uint(0x81, static_cast<std::uint64_t>(e.downloadErrorCode));
        w.field(0x81, inner.bytes());
    }
    return tlv::Writer::wrap(tag::PrepareDownloadResponse, w.bytes());
}

PrepareDownloadResponse PrepareDownloadResponse::decode(ByteSpan data) {
    tlv::Reader r(tlv::unwrap(tag::PrepareDownloadResponse, data));
    PrepareDownloadResponse v;
    if (auto okBody = r.optional(0x80)) {
        tlv::Reader inner(*okBody);
        PrepareDownloadResponseOk o;
        o.euiccSigned2 = EuiccSigned2::decode(inner.expect(0x80));
        o.euiccSignature2 = to_array<64>(inner.expect(0x81));
        inner.finish();
        v.result = o;
    } else {
        tlv::Reader inner(r.expect(0x81));
        PrepareDownloadResponseError e;
        e.transactionId = read_txid(inner, 0x80);
        try {
            e.downloadErrorCode =
                download_error_from_int(static_cast<std::int64_t>(inner.expect_uint(0x81)));
        } catch (const BadMessage& ex) {
            throw tlv::MalformedTlv(ex.what());
        }
        inner.finish();
        v.result = e;
    }
    r.finish();
    return v;
}

json GetBoundProfilePackageRequest::to_json() const {
    json j;
    j["transactionId"] = transactionId.hex();
    j["prepareDownloadResponse"] = to_base64(as_span(prepareDownloadResponse.encode()));
    return j;
}

GetBoundProfilePackageRequest GetBoundProfilePackageRequest::from_json(const json& j) {
    JsonView v(j);
    GetBoundProfilePackageRequest r;
    r.transactionId = v.get_txid("transactionId");
    r.prepareDownloadResponse =
        PrepareDownloadResponse::decode(as_span(v.get_b64("prepareDownloadResponse")));
    v.done();
    return r;
}

json GetBoundProfilePackageResponse::to_json() const {
    if (ok()) {
        const auto& o = std::get<GetBoundProfilePackageOk>(result);
        json j = ok_header();
        j["transactionId"] = o.transactionId.hex();
        j["boundProfilePackage"] = b64_tlv(o.boundProfilePackage);
        return j;
    }
    json j = failed_header();
    j["getBoundProfilePackageError"] =
        static_cast<int>(std::get<GetBoundProfilePackageError>(result));
    return j;
}

GetBoundProfilePackageResponse GetBoundProfilePackageResponse::from_json(const json& j) {
    JsonView v(j);
    bool success = read_header(v);
    GetBoundProfilePackageResponse r;
    if (success) {
        GetBoundProfilePackageOk o;
        o.transactionId = v.get_txid("transactionId");
        o.boundProfilePackage = BoundProfilePackage::decode(as_span(v.get_b64("boundProfilePackage")));
        r.result = o;
    } else {
        r.result = get_bpp_error_from_int(v.get_int("getBoundProfilePackageError"));
    }
    v.done();
    return r;
}

json HandleNotificationRequest::to_json() const {
    json j;
    j["profileInstallationResult"] = b64_tlv(profileInstallationResult);
    return j;
}

HandleNotificationRequest HandleNotificationRequest::from_json(const json& j) {
    JsonView v(j);
    HandleNotificationRequest r;
    r.profileInstallationResult =
        ProfileInstallationResult::decode(as_span(v.get_b64("profileInstallationResult")));
    v.done();
    return r;
}

json HandleNotificationResponse::to_json() const {
    if (acknowledged) return ok_header();
    json j = failed_header();
    j["handleNotificationError"] = error;
    return j;
}

HandleNotificationResponse HandleNotificationResponse::from_json(const json& j) {
    JsonView v(j);
    HandleNotificationResponse r;
    r.acknowledged = read_header(v);
    if (!r.acknowledged) r.error = v.get_string("handleNotificationError");
    v.done();
    return r;
}

json LoadBppSegmentRequest::to_json() const {
    json j;
    j["bppCommandId"] = static_cast<int>(bppCommandId);
    j["isLastSegment"] = isLastSegment;
    j["segment"] = to_base64(segment);
    return j;
}

LoadBppSegmentRequest LoadBppSegmentRequest::from_json(const json& j) {
    JsonView v(j);
    LoadBppSegmentRequest r;
    r.bppCommandId = bpp_command_from_int(v.get_int("bppCommandId"));
    r.isLastSegment = v.get_bool("isLastSegment");
    r.segment = v.get_b64("segment");
    v.done();
    return r;
}

json LoadBppSegmentResponse::to_json() const {
    json j = ok_header();
    if (profileInstallationResult) {
        j["profileInstallationResult"] = b64_tlv(*profileInstallationResult);
    } else {
        j["interimAck"] = true;
    }
    return j;
}

LoadBppSegmentResponse LoadBppSegmentResponse::from_json(const json& j) {
    JsonView v(j);
    if (!read_header(v)) throw BadMessage("segment response with Failed header");
    LoadBppSegmentResponse r;
    if (v.find("profileInstallationResult")) {
        r.profileInstallationResult =
            ProfileInstallationResult::decode(as_span(v.get_b64("profileInstallationResult")));
    } else {
        if (!v.get_bool("interimAck")) throw BadMessage("interimAck must be true");
    }
    v.done();
    return r;
}

json RemoveNotificationRequest::to_json() const {
    json j;
    j["seqNumber"] = seqNumber;
    return j;
}

RemoveNotificationRequest RemoveNotificationRequest::from_json(const json& j) {
    JsonView v(j);
    RemoveNotificationRequest r;
    std::int64_t n = v.get_int("seqNumber");
    if (n < 0) throw BadMessage("seqNumber must be non-negative");
    r.seqNumber = static_cast<std::uint64_t>(n);
    v.done();
    return r;
}

json RemoveNotificationResponse::to_json() const {
    if (removed) {
        json j = ok_header();
        j["removed"] = true;
        return j;
    }
    json j = failed_header();
    j["removeNotificationError"] = "unknownSeqNumber";
    return j;
}

RemoveNotificationResponse RemoveNotificationResponse::from_json(const json& j) {
    JsonView v(j);
    RemoveNotificationResponse r;
    if (read_header(v)) {
        if (!v.get_bool("removed")) throw BadMessage("removed must be true");
        r.removed = true;
    } else {
        std::string e = v.get_string("removeNotificationError");
        if (e != "unknownSeqNumber") throw BadMessage("unknown removeNotificationError " + e);
        r.removed = false;
    }
    v.done();
    return r;
}

json cancel_session_request_to_json(const CancelSessionRequest& req) {
    json j;
    j["transactionId"] = req.transactionId.hex();
    j["reason"] = static_cast<int>(req.reason);
    return j;
}

CancelSessionRequest cancel_session_request_from_json(const json& j) {
    JsonView v(j);
    CancelSessionRequest r;
    r.transactionId = v.get_txid("transactionId");
    r.reason = cancel_reason_from_int(v.get_int("reason"));
    v.done();
    return r;
}

json cancel_session_response_to_json(const CancelSessionResponse& resp) {
    if (resp.ok()) {
        const auto& o = std::get<CancelSessionResponseOk>(resp.result);
        json j = ok_header();
        j["cancelSessionResponseOk"] = {
            {"euiccCancelSessionSigned", b64_tlv(o.euiccCancelSessionSigned)},
            {"euiccCancelSessionSignature", b64_fixed(as_span(o.euiccCancelSessionSignature))},
        };
        return j;
    }
    json j = failed_header();
    j["cancelSessionResponseError"] =
        static_cast<int>(std::get<CancelSessionRespError>(resp.result));
    return j;
}

CancelSessionResponse cancel_session_response_from_json(const json& j) {
    JsonView v(j);
    CancelSessionResponse r;
    if (read_header(v)) {
        const json& inner = v.get("cancelSessionResponseOk");
        JsonView iv(inner);
        CancelSessionResponseOk o;
        o.euiccCancelSessionSigned =
            EuiccCancelSessionSigned::decode(as_span(iv.get_b64("euiccCancelSessionSigned")));
        o.euiccCancelSessionSignature =
            to_array<64>(as_span(iv.get_b64("euiccCancelSessionSignature", 64)));
        iv.done();
        r.result = o;
    } else {
        r.result = cancel_resp_error_from_int(v.get_int("cancelSessionResponseError"));
    }
    v.done();
    return r;
}

const char* eim_reject_reason_name(EimConfigRejectReason r) {
    switch (r) {
        case EimConfigRejectReason::alreadyAssociated: return "alreadyAssociated";
        case EimConfigRejectReason::badSignature: return "badSignature";
        case EimConfigRejectReason::noAssociation: return "noAssociation";
    }
    return "?";
}

EimConfigRejectReason eim_reject_reason_from_name(const std::string& name) {
    for (auto r : {EimConfigRejectReason::alreadyAssociated, EimConfigRejectReason::badSignature,
                   EimConfigRejectReason::noAssociation}) {
        if (name == eim_reject_reason_name(r)) return r;
    }
    throw BadMessage("unknown eim reject reason " + name);
}

json EimConfigResult::to_json() const {
    if (ok) {
        json j = ok_header();
        j["eimConfigResult"] = "ok";
        return j;
    }
    json j = failed_header();
    j["eimConfigError"] = eim_reject_reason_name(*reason);
    return j;
}

EimConfigResult EimConfigResult::from_json(const json& j) {
    JsonView v(j);
    EimConfigResult r;
    r.ok = read_header(v);
    if (r.ok) {
        if (v.get_string("eimConfigResult") != "ok") throw BadMessage("bad eimConfigResult");
    } else {
        r.reason = eim_reject_reason_from_name(v.get_string("eimConfigError"));
    }
    v.done();
    return r;
}

// --- ESipa ---

json EsipaGetAuthInputsRequest::to_json() const { return json::object(); }

EsipaGetAuthInputsRequest EsipaGetAuthInputsRequest::from_json(const json& j) {
    JsonView v(j);
    v.done();
    return {};
}

Bytes EsipaGetAuthInputsRequest::encode() const {
    return tlv::Writer::wrap(tag::EsipaGetAuthInputsRequest, {});
}

EsipaGetAuthInputsRequest EsipaGetAuthInputsRequest::decode(ByteSpan data) {
    tlv::Reader r(tlv::unwrap(tag::EsipaGetAuthInputsRequest, data));
    r.finish();
    return {};
}

json EsipaGetAuthInputsResponse::to_json() const {
    json j = ok_header();
    j["euiccChallenge"] = b64_fixed(as_span(euiccChallenge));
    j["euiccInfo1"] = b64_tlv(euiccInfo1);
    return j;
}

EsipaGetAuthInputsResponse EsipaGetAuthInputsResponse::from_json(const json& j) {
    JsonView v(j);
    if (!read_header(v)) throw BadMessage("ok message with Failed header");
    EsipaGetAuthInputsResponse r;
    r.euiccChallenge = to_array<16>(as_span(v.get_b64("euiccChallenge", 16)));
    r.euiccInfo1 = EuiccInfo1::decode(as_span(v.get_b64("euiccInfo1")));
    v.done();
    return r;
}

Bytes EsipaGetAuthInputsResponse::encode() const {
    tlv::Writer w;
    w.field(0x80, as_span(euiccChallenge));
    w.field(0x81, euiccInfo1.encode());
    return tlv::Writer::wrap(tag::EsipaGetAuthInputsResponse, w.bytes());
}

EsipaGetAuthInputsResponse EsipaGetAuthInputsResponse::decode(ByteSpan data) {
    tlv::Reader r(tlv::unwrap(tag::EsipaGetAuthInputsResponse, data));
    EsipaGetAuthInputsResponse v;
    v.euiccChallenge = to_array<16>(r.expect(0x80));
    v.euiccInfo1 = EuiccInfo1::decode(r.expect(0x81));
    r.finish();
    return v;
}

json EsipaAuthenticateRequest::to_json() const {
    json j;
    j["matchingId"] = matchingId;
    j["serverSigned1"] = b64_tlv(serverSigned1);
    j["serverSignature1"] = b64_fixed(as_span(serverSignature1));
    if (euiccCiPKIdToBeUsed) j["euiccCiPKIdToBeUsed"] = b64_fixed(as_span(euiccCiPKIdToBeUsed->id));
    j["serverCertificate"] = b64_tlv(serverCertificate);
    j["otherCertsInChain"] = cert_list_to_json(otherCertsInChain);
    if (!crlList.empty()) j["crlList"] = crl_list_to_json(crlList);
    return j;
}

EsipaAuthenticateRequest EsipaAuthenticateRequest::from_json(const json& j) {
    JsonView v(j);
    EsipaAuthenticateRequest r;
    r.matchingId = v.get_string("matchingId");
    r.serverSigned1 = ServerSigned1::decode(as_span(v.get_b64("serverSigned1")));
    r.serverSignature1 = to_array<64>(as_span(v.get_b64("serverSignature1", 64)));
    if (auto raw = v.find_b64("euiccCiPKIdToBeUsed", 20)) {
        r.euiccCiPKIdToBeUsed = pki::PublicKeyId::from_bytes(as_span(*raw));
    }
    r.serverCertificate = pki::Certificate::decode(as_span(v.get_b64("serverCertificate")));
    r.otherCertsInChain = cert_list_from_b64(v.get_b64_list("otherCertsInChain"));
    if (v.find("crlList")) {
        const json& arr = j.at("crlList");
        if (!arr.is_array()) throw BadMessage("crlList must be an array");
        std::vector<Bytes> raws;
        for (const auto& item : arr) {
            if (!item.is_string()) throw BadMessage("crlList items must be strings");
            raws.push_back(from_base64(item.get<std::string>()));
        }
        r.crlList = crl_list_from_b64(raws);
    }
    v.done();
    return r;
}

Bytes EsipaAuthenticateRequest::encode() const {
    tlv::Writer w;
    w.field_text(0x80, matchingId);
    w.field(0x81, serverSigned1.encode());
    w.field(0x82, as_span(serverSignature1));
    if (euiccCiPKIdToBeUsed) w.field(0x83, as_span(euiccCiPKIdToBeUsed->id));
    w.field(0x84, serverCertificate.encode());
    tlv::Writer certs;
    for (const auto& c : otherCertsInChain) certs.raw(c.encode());
    w.field(0x85, certs.bytes());
    tlv::Writer crls;
    for (const auto& c : crlList) crls.raw(c.encode());
    w.field(0x86, crls.bytes());
    return tlv::Writer::wrap(tag::EsipaAuthenticateRequest, w.bytes());
}

EsipaAuthenticateRequest EsipaAuthenticateRequest::decode(ByteSpan data) {
    tlv::Reader r(tlv::unwrap(tag::EsipaAuthenticateRequest, data));
    EsipaAuthenticateRequest v;
    v.matchingId = r.expect_text(0x80);
    v.serverSigned1 = ServerSigned1::decode(r.expect(0x81));
    v.serverSignature1 = to_array<64>(r.expect(0x82));
    if (auto id = r.optional(0x83)) v.euiccCiPKIdToBeUsed = pki::PublicKeyId::from_bytes(*id);
    v.serverCertificate = pki::Certificate::decode(r.expect(0x84));
    tlv::Reader certs(r.expect(0x85));
    while (!certs.at_end()) {
        v.otherCertsInChain.push_back(pki::Certificate::decode(certs.expect_raw(tag::Certificate)));
    }
    tlv::Reader crls(r.expect(0x86));
    while (!crls.at_end()) v.crlList.push_back(pki::Crl::decode(crls.expect_raw(tag::Crl)));
    r.finish();
    return v;
}

json EsipaAuthenticateResponse::to_json() const {
    AuthenticateServerResponse proxy;
    proxy.result = result;
    return proxy.to_json();
}

EsipaAuthenticateResponse EsipaAuthenticateResponse::from_json(const json& j) {
    EsipaAuthenticateResponse r;
    r.result = AuthenticateServerResponse::from_json(j).result;
    return r;
}

Bytes EsipaAuthenticateResponse::encode() const {
    tlv::Writer w;
    if (ok()) {
        const auto& o = std::get<AuthenticateResponseOk>(result);
        tlv::Writer inner;
        inner.field(0x80, o.euiccSigned1.encode());
        inner.field(0x81, as_span(o.euiccSignature1));
        inner.field(0x82, o.euiccCertificate.encode());
        inner.field(0x83, o.nextCertInChain.encode());
        tlv::Writer certs;
        for (const auto& c : o.otherCertsInChain) certs.raw(c.encode());
        inner.field(0x84, certs.bytes());
        w.field(0x80, inner.bytes());
    } else {
        const auto& e = std::get<AuthenticateResponseError>(result);
        tlv::Writer inner;
        write_txid(inner, 0x80, e.transactionId);
        inner.field_uint(0x81, static_cast<std::uint64_t>(e.authenticateErrorCode));
        w.field(0x81, inner.bytes());
    }
    return tlv::Writer::wrap(tag::EsipaAuthenticateResponse, w.bytes());
}

EsipaAuthenticateResponse EsipaAuthenticateResponse::decode(ByteSpan data) {
    tlv::Reader r(tlv::unwrap(tag::EsipaAuthenticateResponse, data));
    EsipaAuthenticateResponse v;
    if (auto okBody = r.optional(0x80)) {
        tlv::Reader inner(*okBody);
        AuthenticateResponseOk o;
        o.euiccSigned1 = EuiccSigned1::decode(inner.expect(0x80));
        o.euiccSignature1 = to_array<64>(inner.expect(0x81));
        o.euiccCertificate = pki::Certificate::decode(inner.expect(0x82));
        o.nextCertInChain = pki::Certificate::decode(inner.expect(0x83));
        tlv::Reader certs(inner.expect(0x84));
        while (!certs.at_end()) {
            o.otherCertsInChain.push_back(pki::Certificate::decode(certs.expect_raw(tag::Certificate)));
        }
        inner.finish();
        v.result = o;
    } else {
        tlv::Reader inner(r.expect(0x81));
        AuthenticateResponseError e;
        e.transactionId = read_txid(inner, 0x80);
        try {
            e.authenticateErrorCode =
                authenticate_error_from_int(static_cast<std::int64_t>(inner.expect_uint(0x81)));
        } catch (const BadMessage& ex) {
            throw tlv::MalformedTlv(ex.what());
        }
        inner.finish();
        v.result = e;
    }
    r.finish();
    return v;
}

json EsipaPrepareDownloadRequest::to_json() const {
    json j;
    j["profileMetadata"] = b64_tlv(profileMetadata);
    j["smdpSigned2"] = b64_tlv(smdpSigned2);
    j["smdpSignature2"] = b64_fixed(as_span(smdpSignature2));
    j["smdpCertificate"] = b64_tlv(smdpCertificate);
    return j;
}

EsipaPrepareDownloadRequest EsipaPrepareDownloadRequest::from_json(const json& j) {
    JsonView v(j);
    EsipaPrepareDownloadRequest r;
    r.profileMetadata = ProfileMetadata::decode(as_span(v.get_b64("profileMetadata")));
    r.smdpSigned2 = SmdpSigned2::decode(as_span(v.get_b64("smdpSigned2")));
    r.smdpSignature2 = to_array<64>(as_span(v.get_b64("smdpSignature2", 64)));
    r.smdpCertificate = pki::Certificate::decode(as_span(v.get_b64("smdpCertificate")));
    v.done();
    return r;
}

Bytes EsipaPrepareDownloadRequest::encode() const {
    tlv::Writer w;
    w.field(0x80, profileMetadata.encode());
    w.field(0x81, smdpSigned2.encode());
    w.field(0x82, as_span(smdpSignature2));
    w.field(0x83, smdpCertificate.encode());
    return tlv::Writer::wrap(tag::EsipaPrepareDownloadRequest, w.bytes());
}

EsipaPrepareDownloadRequest EsipaPrepareDownloadRequest::decode(ByteSpan data) {
    tlv::Reader r(tlv::unwrap(tag::EsipaPrepareDownloadRequest, data));
    EsipaPrepareDownloadRequest v;
    v.profileMetadata = ProfileMetadata::decode(r.expect(0x80));
    v.smdpSigned2 = SmdpSigned2::decode(r.expect(0x81));
    v.smdpSignature2 = to_array<64>(r.expect(0x82));
    v.smdpCertificate = pki::Certificate::decode(r.expect(0x83));
    r.finish();
    return v;
}

json EsipaPrepareDownloadResponse::to_json() const {
    if (result.index() == 0) {
        PrepareDownloadResponse proxy;
        proxy.result = std::get<PrepareDownloadResponseOk>(result);
        return proxy.to_json();
    }
    if (result.index() == 1) {
        PrepareDownloadResponse proxy;
        proxy.result = std::get<PrepareDownloadResponseError>(result);
        return proxy.to_json();
    }
    json j = failed_header();
    j["cancelled"] = {{"reason", static_cast<int>(std::get<EsipaCancelled>(result).reason)}};
    return j;
}

EsipaPrepareDownloadResponse EsipaPrepareDownloadResponse::from_json(const json& j) {
    EsipaPrepareDownloadResponse r;
    if (j.contains("cancelled")) {
        JsonView v(j);
        if (read_header(v)) throw BadMessage("cancelled with ok header");
        const json& c = v.get("cancelled");
        JsonView cv(c);
        EsipaCancelled e;
        e.reason = cancel_reason_from_int(cv.get_int("reason"));
        cv.done();
        v.done();
        r.result = e;
        return r;
    }
    auto inner = PrepareDownloadResponse::from_json(j);
    if (inner.ok()) {
        r.result = std::get<PrepareDownloadResponseOk>(inner.result);
    } else {
        r.result = std::get<PrepareDownloadResponseError>(inner.result);
    }
    return r;
}

Bytes EsipaPrepareDownloadResponse::encode() const {
    tlv::Writer w;
    if (result.index() == 0 || result.index() == 1) {
        PrepareDownloadResponse proxy;
        if (result.index() == 0) {
            proxy.result = std::get<PrepareDownloadResponseOk>(result);
        } else {
            proxy.result = std::get<PrepareDownloadResponseError>(result);
        }
        w.field(0x80, proxy.encode());
    } else {
        w.field_uint(0x81, static_cast<std::uint64_t>(std::get<EsipaCancelled>(result).reason));
    }
    return tlv::Writer::wrap(tag::EsipaPrepareDownloadResponse, w.bytes());
}

EsipaPrepareDownloadResponse EsipaPrepareDownloadResponse::decode(ByteSpan data) {
    tlv::Reader r(tlv::unwrap(tag::EsipaPrepareDownloadResponse, data));
    EsipaPrepareDownloadResponse v;
    if (auto inner = r.optional(0x80)) {
        auto pd = PrepareDownloadResponse::decode(*inner);
        if (pd.ok()) {
            v.result = std::get<PrepareDownloadResponseOk>(pd.result);
        } else {
            v.result = std::get<PrepareDownloadResponseError>(pd.result);
        }
    } else {
        EsipaCancelled e;
        try {
            e.reason = cancel_reason_from_int(static_cast<std::int64_t>(r.expect_uint(0x81)));
        } catch (const BadMessage& ex) {
            throw tlv::MalformedTlv(ex.what());
        }
        v.result = e;
    }
    r.finish();
    return v;
}

json EsipaLoadBppRequest::to_json() const {
    json j;
    j["boundProfilePackage"] = b64_tlv(boundProfilePackage);
    return j;
}

EsipaLoadBppRequest EsipaLoadBppRequest::from_json(const json& j) {
    JsonView v(j);
    EsipaLoadBppRequest r;
    r.boundProfilePackage = BoundProfilePackage::decode(as_span(v.get_b64("boundProfilePackage")));
    v.done();
    return r;
}

Bytes EsipaLoadBppRequest::encode() const {
    tlv::Writer w;
    w.field(0x80, boundProfilePackage.encode());
    return tlv::Writer::wrap(tag::EsipaLoadBppRequest, w.bytes());
}

EsipaLoadBppRequest EsipaLoadBppRequest::decode(ByteSpan data) {
    tlv::Reader r(tlv::unwrap(tag::EsipaLoadBppRequest, data));
    EsipaLoadBppRequest v;
    v.boundProfilePackage = BoundProfilePackage::decode(r.expect(0x80));
    r.finish();
    return v;
}

json EsipaLoadBppResponse::to_json() const {
    if (ok()) {
        json j = ok_header();
        j["profileInstallationResult"] = b64_tlv(std::get<ProfileInstallationResult>(result));
        return j;
    }
    json j = failed_header();
    j["cancelled"] = {{"reason", static_cast<int>(std::get<EsipaCancelled>(result).reason)}};
    return j;
}

EsipaLoadBppResponse EsipaLoadBppResponse::from_json(const json& j) {
    JsonView v(j);
    EsipaLoadBppResponse r;
    if (read_header(v)) {
        r.result =
            ProfileInstallationResult::decode(as_span(v.get_b64("profileInstallationResult")));
    } else {
        const json& c = v.get("cancelled");
        JsonView cv(c);
        EsipaCancelled e;
        e.reason = cancel_reason_from_int(cv.get_int("reason"));
        cv.done();
        r.result = e;
    }
    v.done();
    return r;
}

Bytes EsipaLoadBppResponse::encode() const {
    tlv::Writer w;
    if (ok()) {
        w.field(0x80, std::get<ProfileInstallationResult>(result).encode());
    } else {
        w.field_uint(0x81, static_cast<std::uint64_t>(std::get<EsipaCancelled>(result).reason));
    }
    return tlv::Writer::wrap(tag::EsipaLoadBppResponse, w.bytes());
}

EsipaLoadBppResponse EsipaLoadBppResponse::decode(ByteSpan data) {
    tlv::Reader r(tlv::unwrap(tag::EsipaLoadBppResponse, data));
    EsipaLoadBppResponse v;
    if (auto pir = r.optional(0x80)) {
        v.result = ProfileInstallationResult::decode(*pir);
    } else {
        EsipaCancelled e;
        try {
            e.reason = cancel_reason_from_int(static_cast<std::int64_t>(r.expect_uint(0x81)));
        } catch (const BadMessage& ex) {
            throw tlv::MalformedTlv(ex.what());
        }
        v.result = e;
    }
    r.finish();
    return v;
}

json EsipaRemoveNotificationRequest::to_json() const {
    json j;
    j["seqNumber"] = seqNumber;
    return j;
}

EsipaRemoveNotificationRequest EsipaRemoveNotificationRequest::from_json(const json& j) {
    JsonView v(j);
    EsipaRemoveNotificationRequest r;
    std::int64_t n = v.get_int("seqNumber");
    if (n < 0) throw BadMessage("seqNumber must be non-negative");
    r.seqNumber = static_cast<std::uint64_t>(n);
    v.done();
    return r;
}

Bytes EsipaRemoveNotificationRequest::encode() const {
    tlv::Writer w;
    w.field_uint(0x80, seqNumber);
    return tlv::Writer::wrap(tag::EsipaRemoveNotificationRequest, w.bytes());
}

EsipaRemoveNotificationRequest EsipaRemoveNotificationRequest::decode(ByteSpan data) {
    tlv::Reader r(tlv::unwrap(tag::EsipaRemoveNotificationRequest, data));
    EsipaRemoveNotificationRequest v;
    v.seqNumber = r.expect_uint(0x80);
    r.finish();
    return v;
}

json EsipaRemoveNotificationResponse::to_json() const {
    RemoveNotificationResponse proxy;
    proxy.removed = removed;
    return proxy.to_json();
}

EsipaRemoveNotificationResponse EsipaRemoveNotificationResponse::from_json(const json& j) {
    EsipaRemoveNotificationResponse r;
    r.removed = RemoveNotificationResponse::from_json(j).removed;
    return r;
}

Bytes EsipaRemoveNotificationResponse::encode() const {
    tlv::Writer w;
    w.field_bool(0x80, removed);
    return tlv::Writer::wrap(tag::EsipaRemoveNotificationResponse, w.bytes());
}

EsipaRemoveNotificationResponse EsipaRemoveNotificationResponse::decode(ByteSpan data) {
    tlv::Reader r(tlv::unwrap(tag::EsipaRemoveNotificationResponse, data));
    EsipaRemoveNotificationResponse v;
    v.removed = r.expect_bool(0x80);
    r.finish();
    return v;
}

json EsipaPushAcRequest::to_json() const {
    json j;
    j["activationCode"] = activationCode;
    return j;
}

EsipaPushAcRequest EsipaPushAcRequest::from_json(const json& j) {
    JsonView v(j);
    EsipaPushAcRequest r;
    r.activationCode = v.get_string("activationCode");
    v.done();
    return r;
}

Bytes EsipaPushAcRequest::encode() const {
    tlv::Writer w;
    w.field_text(0x80, activationCode);
    return tlv::Writer::wrap(tag::EsipaPushAcRequest, w.bytes());
}

EsipaPushAcRequest EsipaPushAcRequest::decode(ByteSpan data) {
    tlv::Reader r(tlv::unwrap(tag::EsipaPushAcRequest, data));
    EsipaPushAcRequest v;
    v.activationCode = r.expect_text(0x80);
    r.finish();
    return v;
}

json EsipaPushAcResponse::to_json() const {
    json j = ok_header();
    j["flowReport"] = flowReport.to_json();
    return j;
}

EsipaPushAcResponse EsipaPushAcResponse::from_json(const json& j) {
    JsonView v(j);
    if (!read_header(v)) throw BadMessage("push response with Failed header");
    EsipaPushAcResponse r;
    r.flowReport = FlowReport::from_json(v.get("flowReport"));
    v.done();
    return r;
}

Bytes EsipaPushAcResponse::encode() const {
    tlv::Writer w;
    w.field(0x80, flowReport.encode());
    return tlv::Writer::wrap(tag::EsipaPushAcResponse, w.bytes());
}

EsipaPushAcResponse EsipaPushAcResponse::decode(ByteSpan data) {
    tlv::Reader r(tlv::unwrap(tag::EsipaPushAcResponse, data));
    EsipaPushAcResponse v;
    v.flowReport = FlowReport::decode(r.expect(0x80));
    r.finish();
    return v;
}

json EsipaEimConfigRequest::to_json() const {
    json j;
    j["signedEimOperation"] = b64_tlv(signedEimOperation);
    return j;
}

EsipaEimConfigRequest EsipaEimConfigRequest::from_json(const json& j) {
    JsonView v(j);
    EsipaEimConfigRequest r;
    r.signedEimOperation = SignedEimOperation::decode(as_span(v.get_b64("signedEimOperation")));
    v.done();
    return r;
}

Bytes EsipaEimConfigRequest::encode() const {
    tlv::Writer w;
    w.field(0x80, signedEimOperation.encode());
    return tlv::Writer::wrap(tag::EsipaEimConfigRequest, w.bytes());
}

EsipaEimConfigRequest EsipaEimConfigRequest::decode(ByteSpan data) {
    tlv::Reader r(tlv::unwrap(tag::EsipaEimConfigRequest, data));
    EsipaEimConfigRequest v;
    v.signedEimOperation = SignedEimOperation::decode(r.expect(0x80));
    r.finish();
    return v;
}

json EsipaEimConfigResponse::to_json() const {
    EimConfigResult proxy;
    proxy.ok = ok;
    proxy.reason = reason;
    return proxy.to_json();
}

EsipaEimConfigResponse EsipaEimConfigResponse::from_json(const json& j) {
    auto inner = EimConfigResult::from_json(j);
    EsipaEimConfigResponse r;
    r.ok = inner.ok;
    r.reason = inner.reason;
    return r;
}

Bytes EsipaEimConfigResponse::encode() const {
    tlv::Writer w;
    w.field_bool(0x80, ok);
    if (reason) w.field_uint(0x81, static_cast<std::uint64_t>(*reason));
    return tlv::Writer::wrap(tag::EsipaEimConfigResponse, w.bytes());
}

EsipaEimConfigResponse EsipaEimConfigResponse::decode(ByteSpan data) {
    tlv::Reader r(tlv::unwrap(tag::EsipaEimConfigResponse, data));
    EsipaEimConfigResponse v;
    v.ok = r.expect_bool(0x80);
    if (auto reason = r.optional(0x81)) {
        std::uint64_t x = tlv::decode_uint(*reason);
        if (x > 2) throw tlv::MalformedTlv("bad reject reason");
        v.reason = static_cast<EimConfigRejectReason>(x);
    }
    r.finish();
    return v;
}

}  // namespace rsplab::msg

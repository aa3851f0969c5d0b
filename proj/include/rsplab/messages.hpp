#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "rsplab/pki.hpp"
#include "rsplab/tags.hpp"
#include "rsplab/tlv.hpp"

namespace rsplab::msg {

using nlohmann::json;

/// JSON body violates the message schema (missing/unknown field, bad value).
struct BadMessage : std::runtime_error {
    explicit BadMessage(const std::string& what) : std::runtime_error(what) {}
};

struct BadActivationCode : std::runtime_error {
    explicit BadActivationCode(const std::string& what) : std::runtime_error(what) {}
};

struct EmptyCode : std::runtime_error {
    explicit EmptyCode(const std::string& what) : std::runtime_error(what) {}
};

// ---------------------------------------------------------------------------
// Enumerations. Wire values match the protocol's published numbers exactly;
// decoders reject anything outside the listed values.
// ---------------------------------------------------------------------------

enum class AuthenticateErrorCode : std::uint8_t {
    invalidCertificate = 1,
    invalidSignature = 2,
    unsupportedCurve = 3,
    noSession = 4,
    invalidOid = 5,
    euiccChallengeMismatch = 6,
    ciPKUnknown = 7,
    transactionIdError = 8,
    missingCrl = 9,
    invalidCrlSignature = 10,
    revokedCert = 11,
    invalidCertOrCrlTime = 12,
    invalidCertOrCrlConfiguration = 13,
    invalidIccid = 14,
    undefinedError = 127,
};

enum class CancelSessionReason : std::uint8_t {
    endUserRejection = 0,
    postponed = 1,
    timeout = 2,
    pprNotAllowed = 3,
    metadataMismatch = 4,
    loadBppExecutionError = 5,
    sessionAborted = 16,
    enterpriseProfilesNotSupported = 17,
    enterpriseRulesNotAllowed = 18,
    enterpriseProfileNotAllowed = 19,
    enterpriseOidMismatch = 20,
    enterpriseRulesError = 21,
    enterpriseProfilesOnly = 22,
    lprNotSupported = 23,
    lprNetworkDataNotAllowed = 24,
    emptyProfileOrSpName = 25,
    rpmDisabled = 27,
    invalidRpmPackage = 28,
    loadRpmPackageError = 29,
    undefinedReason = 127,
};

enum class CancelSessionRespError : std::uint8_t {
    invalidTransactionId = 5,
    undefinedError = 127,
};

enum class AuthenticateClientError : std::uint8_t {
    eumCertificateInvalid = 1,
    eumCertificateExpired = 2,
    euiccCertificateInvalid = 3,
    euiccCertificateExpired = 4,
    euiccSignatureInvalid = 5,
    matchingIdRefused = 6,
    eidMismatch = 7,
    noEligibleProfile = 8,
    ciPKUnknown = 9,
    invalidTransactionId = 10,
    insufficientMemory = 11,
    ciPKMismatch = 12,
    euiccRspCapabilityHasChanged = 13,
    lpaRspCapabilityHasChanged = 14,
    deviceChangeNotSupported = 15,
    deviceChangeNotAllowed = 16,
    iccidUnknown = 17,
    invalidInputData = 124,
    missingInputData = 125,
    functionProviderBusy = 126,
    undefinedError = 127,
};

enum class DownloadErrorCode : std::uint8_t {
    invalidCertificate = 1,
    invalidSignature = 2,
    noSession = 4,
    invalidTransactionId = 5,
    undefinedError = 127,
};

enum class GetBoundProfilePackageError : std::uint8_t {
    euiccSignatureInvalid = 1,
    confirmationCodeMissing = 2,
    confirmationCodeRefused = 3,
    confirmationCodeRetriesExceeded = 4,
    bppRebindingRefused = 5,
    downloadOrderExpired = 6,
    invalidTransactionId = 95,
    invalidInputData = 124,
    missingInputData = 125,
    functionProviderBusy = 126,
    undefinedError = 127,
};

enum class BppCommandId : std::uint8_t {
    initialiseSecureChannel = 0,
    configureIsdp = 1,
    storeMetadata = 2,
    storeMetadata2 = 3,
    replaceSessionKeys = 4,
    loadProfileElements = 5,
};

enum class ErrorReason : std::uint8_t {
    incorrectInputValues = 1,
    invalidSignature = 2,
    invalidTransactionId = 3,
    unsupportedCrtValues = 4,
    unsupportedRemoteOperationType = 5,
    unsupportedProfileClass = 6,
    bspStructureError = 7,
    bspSecurityError = 8,
    installFailedDueToIccidAlreadyExistsOnEuicc = 9,
    installFailedDueToInsufficientMemoryForProfile = 10,
    installFailedDueToInterruption = 11,
    installFailedDueToPEProcessingError = 12,
    installFailedDueToDataMismatch = 13,
    testProfileInstallFailedDueToInvalidNaaKey = 14,
    pprNotAllowed = 15,
    enterpriseProfilesNotSupported = 17,
    enterpriseRulesNotAllowed = 18,
    enterpriseProfileNotAllowed = 19,
    enterpriseOidMismatch = 20,
    enterpriseRulesError = 21,
    enterpriseProfilesOnly = 22,
    lprNotSupported = 23,
    unknownTlvInMetadata = 26,
    installFailedDueToUnknownError = 127,
};

AuthenticateErrorCode authenticate_error_from_int(std::int64_t v);
CancelSessionReason cancel_reason_from_int(std::int64_t v);
CancelSessionRespError cancel_resp_error_from_int(std::int64_t v);
AuthenticateClientError authenticate_client_error_from_int(std::int64_t v);
DownloadErrorCode download_error_from_int(std::int64_t v);
GetBoundProfilePackageError get_bpp_error_from_int(std::int64_t v);
BppCommandId bpp_command_from_int(std::int64_t v);
ErrorReason error_reason_from_int(std::int64_t v);

// ---------------------------------------------------------------------------
// Data types
// ---------------------------------------------------------------------------

struct TransactionId {
    Octet16 id{};

    std::string hex() const { return to_hex(as_span(id)); }
    static TransactionId from_hex(const std::string& text);

    auto operator<=>(const TransactionId&) const = default;
};

struct RspCapability {
    bool crlStaplingV3Support = false;
    bool euiccCiUpdateSupport = false;
    bool cancelForEmptySpnPnSupport = false;
    bool lprSupport = false;

    std::uint8_t to_byte() const;
    static RspCapability from_byte(std::uint8_t b);

    bool operator==(const RspCapability&) const = default;
};

struct PprSet {
    bool ppr1 = false;
    bool ppr2 = false;

    bool any() const { return ppr1 || ppr2; }
    /// True when every rule set here also appears in `allowed`.
    bool subset_of(const PprSet& allowed) const {
        return (!ppr1 || allowed.ppr1) && (!ppr2 || allowed.ppr2);
    }
    std::uint8_t to_byte() const;
    static PprSet from_byte(std::uint8_t b);

    bool operator==(const PprSet&) const = default;
};

struct EuiccInfo1 {
    std::vector<pki::PublicKeyId> verificationKeyIds;  // euiccCiPKIdListForVerification
    std::vector<pki::PublicKeyId> signingKeyIds;       // euiccCiPKIdListForSigning
    RspCapability capability;                          // euiccRspCapability

    Bytes encode() const;
    static EuiccInfo1 decode(ByteSpan data);
    bool operator==(const EuiccInfo1&) const = default;
};

struct SvnVersion {
    std::uint8_t major = 0;
    std::uint8_t minor = 0;
    std::uint8_t patch = 0;
    bool operator==(const SvnVersion&) const = default;
};

struct EuiccInfo2 {
    EuiccInfo1 info1;
    SvnVersion svn;
    std::uint64_t freeNonVolatileMemory = 0;
    std::uint64_t installedProfileCount = 0;

    Bytes encode() const;
    static EuiccInfo2 decode(ByteSpan data);
    bool operator==(const EuiccInfo2&) const = default;
};

struct ServerSigned1 {
    TransactionId transactionId;
    Octet16 euiccChallenge{};
    std::string serverAddress;
    Octet16 serverChallenge{};

    Bytes encode() const;
    static ServerSigned1 decode(ByteSpan data);
    bool operator==(const ServerSigned1&) const = default;
};

struct DeviceInfo {
    std::string tac;  // 8 decimal digits
    RspCapability deviceCapabilities;

    Bytes encode() const;
    static DeviceInfo decode(ByteSpan data);
    bool operator==(const DeviceInfo&) const = default;
};

enum class OperationType : std::uint8_t { profileDownload = 0, rpm = 1 };

struct CtxParams1 {
    std::string matchingId;
    DeviceInfo deviceInfo;
    OperationType operationType = OperationType::profileDownload;

    Bytes encode() const;
    static CtxParams1 decode(ByteSpan data);
    bool operator==(const CtxParams1&) const = default;
};

struct EuiccSigned1 {
    TransactionId transactionId;
    std::string serverAddress;
    Octet16 serverChallenge{};
    EuiccInfo2 euiccInfo2;
    CtxParams1 ctxParams1;

    Bytes encode() const;
    static EuiccSigned1 decode(ByteSpan data);
    bool operator==(const EuiccSigned1&) const = default;
};

struct SmdpSigned2 {
    TransactionId transactionId;
    bool ccRequiredFlag = false;
    std::optional<Octet32> bppEuiccOtpk;
    bool rpmPending = false;

    Bytes encode() const;
    static SmdpSigned2 decode(ByteSpan data);
    bool operator==(const SmdpSigned2&) const = default;
};

struct EuiccSigned2 {
    TransactionId transactionId;
    Octet32 euiccOtpk{};
    std::optional<Octet32> hashCc;

    Bytes encode() const;
    static EuiccSigned2 decode(ByteSpan data);
    bool operator==(const EuiccSigned2&) const = default;
};

struct ProfileMetadata {
    Iccid iccid{};
    std::string profileName;
    std::string serviceProviderName;
    PprSet pprs;
    bool lprConfigPresent = false;

    Bytes encode() const;
    static ProfileMetadata decode(ByteSpan data);
    bool operator==(const ProfileMetadata&) const = default;
};

struct InitialiseSecureChannel {
    TransactionId transactionId;
    Octet32 smdpOtpkKa{};
    Octet64 signature{};  // by SK.DPpb.SIG over tbs_bytes()

    Bytes tbs_bytes() const;
    Bytes encode() const;
    static InitialiseSecureChannel decode(ByteSpan data);
    bool operator==(const InitialiseSecureChannel&) const = default;
};

/// Payload plus a MAC under the session key. Payloads are capped at 1024
/// bytes so realistic profiles always need more than one transfer.
struct SealedSegment {
    Bytes payload;
    Octet16 mac{};

    static constexpr std::size_t kMaxPayload = 1024;

    Bytes encode() const;
    static SealedSegment decode(ByteSpan data);
    bool operator==(const SealedSegment&) const = default;
};

struct BoundProfilePackage {
    InitialiseSecureChannel initialiseSecureChannel;
    SealedSegment configureIsdp;
    SealedSegment storeMetadata;
    std::vector<SealedSegment> loadProfileElements;  // at least one

    Bytes encode() const;
    static BoundProfilePackage decode(ByteSpan data);
    bool operator==(const BoundProfilePackage&) const = default;
};

struct NotificationMetadata {
    std::uint64_t seqNumber = 0;
    Iccid iccid{};

    Bytes encode() const;
    static NotificationMetadata decode(ByteSpan data);
    bool operator==(const NotificationMetadata&) const = default;
};

struct SuccessResult {
    Bytes isdpAid;  // 5..16 bytes

    Bytes encode() const;
    static SuccessResult decode(ByteSpan data);
    bool operator==(const SuccessResult&) const = default;
};

struct ErrorResult {
    BppCommandId bppCommandId = BppCommandId::initialiseSecureChannel;
    ErrorReason errorReason = ErrorReason::installFailedDueToUnknownError;
    std::optional<Bytes> ppiResponse;

    Bytes encode() const;
    static ErrorResult decode(ByteSpan data);
    bool operator==(const ErrorResult&) const = default;
};

struct ProfileInstallationResultData {
    TransactionId transactionId;
    NotificationMetadata notificationMetadata;
    std::string smdpOid;
    std::variant<SuccessResult, ErrorResult> finalResult;

    bool success() const { return std::holds_alternative<SuccessResult>(finalResult); }

    Bytes encode() const;
    static ProfileInstallationResultData decode(ByteSpan data);
    bool operator==(const ProfileInstallationResultData&) const = default;
};

struct ProfileInstallationResult {
    ProfileInstallationResultData data;
    Octet64 euiccSignPIR{};  // over data.encode()

    Bytes encode() const;
    static ProfileInstallationResult decode(ByteSpan data);
    bool operator==(const ProfileInstallationResult&) const = default;
};

struct CancelSessionRequest {
    TransactionId transactionId;
    CancelSessionReason reason = CancelSessionReason::undefinedReason;

    Bytes encode() const;
    static CancelSessionRequest decode(ByteSpan data);
    bool operator==(const CancelSessionRequest&) const = default;
};

struct EuiccCancelSessionSigned {
    TransactionId transactionId;
    std::string smdpOid;
    CancelSessionReason reason = CancelSessionReason::undefinedReason;

    Bytes encode() const;
    static EuiccCancelSessionSigned decode(ByteSpan data);
    bool operator==(const EuiccCancelSessionSigned&) const = default;
};

struct CancelSessionResponseOk {
    EuiccCancelSessionSigned euiccCancelSessionSigned;
    Octet64 euiccCancelSessionSignature{};
    bool operator==(const CancelSessionResponseOk&) const = default;
};

struct CancelSessionResponse {
    std::variant<CancelSessionResponseOk, CancelSessionRespError> result;

    bool ok() const { return std::holds_alternative<CancelSessionResponseOk>(result); }

    Bytes encode() const;
    static CancelSessionResponse decode(ByteSpan data);
    bool operator==(const CancelSessionResponse&) const = default;
};

struct EimConfigurationData {
    std::string eimId;
    Octet32 eimPublicKey{};
    std::string eimAddress;

    Bytes encode() const;
    static EimConfigurationData decode(ByteSpan data);
    bool operator==(const EimConfigurationData&) const = default;
};

enum class EimOperationKind : std::uint8_t { addConfig = 0, removeConfig = 1, replaceConfig = 2 };

struct EimOperation {
    EimOperationKind kind = EimOperationKind::addConfig;
    std::optional<EimConfigurationData> config;  // required for add/replace

    Bytes encode() const;
    static EimOperation decode(ByteSpan data);
    bool operator==(const EimOperation&) const = default;
};

struct SignedEimOperation {
    EimOperation operation;
    Octet64 signature{};  // by the eIM key over operation.encode()

    Bytes encode() const;
    static SignedEimOperation decode(ByteSpan data);
    bool operator==(const SignedEimOperation&) const = default;
};

/// `LPA:<version>$<smdpAddress>$<matchingId>[$<oid>]`
struct ActivationCode {
    std::uint64_t version = 1;
    std::string smdpAddress;
    std::string matchingId;
    std::string oid;  // empty = absent

    std::string render() const;
    static ActivationCode parse(const std::string& text);

    Bytes encode() const;
    static ActivationCode decode(ByteSpan data);
    bool operator==(const ActivationCode&) const = default;
};

/// SHA-256( SHA-256(confirmationCode) || transactionId ).
Octet32 compute_hash_cc(const std::string& confirmationCode, const TransactionId& transactionId);

// ---------------------------------------------------------------------------
// Flow outcome shared by the LPA, the eIM and the CLI
// ---------------------------------------------------------------------------

struct FlowReport {
    enum class Outcome { installed, cancelled, error, authenticated, eimConfigured };

    Outcome outcome = Outcome::error;
    std::optional<CancelSessionReason> cancelReason;
    std::string errorStage;
    std::int64_t errorCode = 0;
    std::string errorName;
    std::optional<TransactionId> transactionId;
    std::string transcriptRef;

    static FlowReport make_installed(TransactionId txid);
    static FlowReport make_cancelled(CancelSessionReason reason, TransactionId txid);
    static FlowReport make_error(std::string stage, std::int64_t code, std::string name);

    json to_json() const;
    static FlowReport from_json(const json& j);
    Bytes encode() const;
    static FlowReport decode(ByteSpan data);
    bool operator==(const FlowReport&) const = default;
};

const char* outcome_name(FlowReport::Outcome o);
FlowReport::Outcome outcome_from_name(const std::string& name);

// ---------------------------------------------------------------------------
// Strict JSON helpers (unknown fields are rejected everywhere)
// ---------------------------------------------------------------------------

class JsonView {
public:
    explicit JsonView(const json& j);

    const json& get(const char* key);
    const json* find(const char* key);

    std::string get_string(const char* key);
    std::int64_t get_int(const char* key);
    bool get_bool(const char* key);
    Bytes get_b64(const char* key);
    Bytes get_b64(const char* key, std::size_t expectedSize);
    TransactionId get_txid(const char* key);
    std::vector<Bytes> get_b64_list(const char* key);
    std::optional<Bytes> find_b64(const char* key, std::size_t expectedSize);

    /// Throws BadMessage if any key was never consumed.
    void done();

private:
    const json& j_;
    std::vector<std::string> used_;
};

json ok_header();
json failed_header();
/// True = Executed-Success, false = Failed; throws BadMessage on anything else.
bool read_header(JsonView& v);

// ---------------------------------------------------------------------------
// Wire messages. ES9+/ES10b bodies are JSON; ESipa bodies additionally have
// a compact TLV form for devices that speak it.
// ---------------------------------------------------------------------------

struct InitiateAuthenticationRequest {
    Octet16 euiccChallenge{};
    EuiccInfo1 euiccInfo1;
    std::string smdpAddress;
    RspCapability lpaRspCapability;

    json to_json() const;
    static InitiateAuthenticationRequest from_json(const json& j);
    bool operator==(const InitiateAuthenticationRequest&) const = default;
};

struct InitiateAuthenticationOk {
    TransactionId transactionId;
    ServerSigned1 serverSigned1;
    Octet64 serverSignature1{};
    pki::PublicKeyId euiccCiPKIdToBeUsed;
    pki::Certificate serverCertificate;
    std::vector<pki::Certificate> otherCertsInChain;
    std::vector<pki::Crl> crlList;

    json to_json() const;
    static InitiateAuthenticationOk from_json(const json& j);
    bool operator==(const InitiateAuthenticationOk&) const = default;
};

struct InitiateAuthenticationResponse {
    std::variant<InitiateAuthenticationOk, std::string> result;  // error = symbolic name

    bool ok() const { return result.index() == 0; }

    json to_json() const;
    static InitiateAuthenticationResponse from_json(const json& j);
};

struct AuthenticateServerRequest {
    ServerSigned1 serverSigned1;
    Octet64 serverSignature1{};
    std::optional<pki::PublicKeyId> euiccCiPKIdToBeUsed;
    pki::Certificate serverCertificate;
    CtxParams1 ctxParams1;
    std::vector<pki::Certificate> otherCertsInChain;
    std::vector<pki::Crl> crlList;

    json to_json() const;
    static AuthenticateServerRequest from_json(const json& j);
    bool operator==(const AuthenticateServerRequest&) const = default;
};

struct AuthenticateResponseOk {
    EuiccSigned1 euiccSigned1;
    Octet64 euiccSignature1{};
    pki::Certificate euiccCertificate;
    pki::Certificate nextCertInChain;
    std::vector<pki::Certificate> otherCertsInChain;

    json to_json() const;
    static AuthenticateResponseOk from_json(const json& j);
    bool operator==(const AuthenticateResponseOk&) const = default;
};

struct AuthenticateResponseError {
    TransactionId transactionId;
    AuthenticateErrorCode authenticateErrorCode = AuthenticateErrorCode::undefinedError;
    bool operator==(const AuthenticateResponseError&) const = default;
};

struct AuthenticateServerResponse {
    std::variant<AuthenticateResponseOk, AuthenticateResponseError> result;

    bool ok() const { return result.index() == 0; }

    json to_json() const;
    static AuthenticateServerResponse from_json(const json& j);
};

struct AuthenticateClientRequest {
    TransactionId transactionId;
    EuiccSigned1 euiccSigned1;
    Octet64 euiccSignature1{};
    pki::Certificate euiccCertificate;
    pki::Certificate nextCertInChain;
    std::vector<pki::Certificate> otherCertsInChain;

    json to_json() const;
    static AuthenticateClientRequest from_json(const json& j);
    bool operator==(const AuthenticateClientRequest&) const = default;
};

struct AuthenticateClientOk {
    TransactionId transactionId;
    std::optional<ProfileMetadata> profileMetadata;
    std::optional<SmdpSigned2> smdpSigned2;
    std::optional<Octet64> smdpSignature2;
    std::optional<pki::Certificate> smdpCertificate;  // CERT.DPpb.SIG

    /// True when only the TransactionID came back.
    bool bare() const { return !profileMetadata && !smdpSigned2; }

    json to_json() const;
    static AuthenticateClientOk from_json(const json& j);
    bool operator==(const AuthenticateClientOk&) const = default;
};

struct AuthenticateClientResponse {
    std::variant<AuthenticateClientOk, AuthenticateClientError> result;

    bool ok() const { return result.index() == 0; }

    json to_json() const;
    static AuthenticateClientResponse from_json(const json& j);
};

struct PrepareDownloadRequest {
    SmdpSigned2 smdpSigned2;
    Octet64 smdpSignature2{};
    std::optional<Octet32> hashCc;
    pki::Certificate smdpCertificate;

    json to_json() const;
    static PrepareDownloadRequest from_json(const json& j);
    bool operator==(const PrepareDownloadRequest&) const = default;
};

struct PrepareDownloadResponseOk {
    EuiccSigned2 euiccSigned2;
    Octet64 euiccSignature2{};
    bool operator==(const PrepareDownloadResponseOk&) const = default;
};

struct PrepareDownloadResponseError {
    TransactionId transactionId;
    DownloadErrorCode downloadErrorCode = DownloadErrorCode::undefinedError;
    bool operator==(const PrepareDownloadResponseError&) const = default;
};

struct PrepareDownloadResponse {
    std::variant<PrepareDownloadResponseOk, PrepareDownloadResponseError> result;

    bool ok() const { return result.index() == 0; }

    json to_json() const;
    static PrepareDownloadResponse from_json(const json& j);
    // Forwarded opaquely inside GetBoundProfilePackageRequest.
    Bytes encode() const;
    static PrepareDownloadResponse decode(ByteSpan data);
    bool operator==(const PrepareDownloadResponse&) const = default;
};

struct GetBoundProfilePackageRequest {
    TransactionId transactionId;
    PrepareDownloadResponse prepareDownloadResponse;

    json to_json() const;
    static GetBoundProfilePackageRequest from_json(const json& j);
    bool operator==(const GetBoundProfilePackageRequest&) const = default;
};

struct GetBoundProfilePackageOk {
    TransactionId transactionId;
    BoundProfilePackage boundProfilePackage;
    bool operator==(const GetBoundProfilePackageOk&) const = default;
};

struct GetBoundProfilePackageResponse {
    std::variant<GetBoundProfilePackageOk, GetBoundProfilePackageError> result;

    bool ok() const { return result.index() == 0; }

    json to_json() const;
    static GetBoundProfilePackageResponse from_json(const json& j);
};

struct HandleNotificationRequest {
    ProfileInstallationResult profileInstallationResult;

    json to_json() const;
    static HandleNotificationRequest from_json(const json& j);
    bool operator==(const HandleNotificationRequest&) const = default;
};

struct HandleNotificationResponse {
    bool acknowledged = true;
    std::string error;  // set when not acknowledged

    json to_json() const;
    static HandleNotificationResponse from_json(const json& j);
};

// --- ES10b ---

struct LoadBppSegmentRequest {
    BppCommandId bppCommandId = BppCommandId::initialiseSecureChannel;
    bool isLastSegment = false;
    Bytes segment;  // TLV of InitialiseSecureChannel or SealedSegment

    json to_json() const;
    static LoadBppSegmentRequest from_json(const json& j);
    bool operator==(const LoadBppSegmentRequest&) const = default;
};

struct LoadBppSegmentResponse {
    std::optional<ProfileInstallationResult> profileInstallationResult;  // absent = interim ack

    json to_json() const;
    static LoadBppSegmentResponse from_json(const json& j);
};

struct RemoveNotificationRequest {
    std::uint64_t seqNumber = 0;

    json to_json() const;
    static RemoveNotificationRequest from_json(const json& j);
};

struct RemoveNotificationResponse {
    bool removed = false;  // false = unknownSeqNumber

    json to_json() const;
    static RemoveNotificationResponse from_json(const json& j);
};

json cancel_session_request_to_json(const CancelSessionRequest& req);
CancelSessionRequest cancel_session_request_from_json(const json& j);
json cancel_session_response_to_json(const CancelSessionResponse& resp);
CancelSessionResponse cancel_session_response_from_json(const json& j);

enum class EimConfigRejectReason { alreadyAssociated, badSignature, noAssociation };

const char* eim_reject_reason_name(EimConfigRejectReason r);
EimConfigRejectReason eim_reject_reason_from_name(const std::string& name);

struct EimConfigResult {
    bool ok = false;
    std::optional<EimConfigRejectReason> reason;

    json to_json() const;
    static EimConfigResult from_json(const json& j);
};

// --- ESipa ---

enum class EsipaMode { jsonEnvelope, compactTlv };

struct EsipaGetAuthInputsRequest {
    json to_json() const;
    static EsipaGetAuthInputsRequest from_json(const json& j);
    Bytes encode() const;
    static EsipaGetAuthInputsRequest decode(ByteSpan data);
    bool operator==(const EsipaGetAuthInputsRequest&) const = default;
};

struct EsipaGetAuthInputsResponse {
    Octet16 euiccChallenge{};
    EuiccInfo1 euiccInfo1;

    json to_json() const;
    static EsipaGetAuthInputsResponse from_json(const json& j);
    Bytes encode() const;
    static EsipaGetAuthInputsResponse decode(ByteSpan data);
    bool operator==(const EsipaGetAuthInputsResponse&) const = default;
};

struct EsipaAuthenticateRequest {
    std::string matchingId;  // supplied by the eIM from the activation code
    ServerSigned1 serverSigned1;
    Octet64 serverSignature1{};
    std::optional<pki::PublicKeyId> euiccCiPKIdToBeUsed;
    pki::Certificate serverCertificate;
    std::vector<pki::Certificate> otherCertsInChain;
    std::vector<pki::Crl> crlList;

    json to_json() const;
    static EsipaAuthenticateRequest from_json(const json& j);
    Bytes encode() const;
    static EsipaAuthenticateRequest decode(ByteSpan data);
    bool operator==(const EsipaAuthenticateRequest&) const = default;
};

struct EsipaAuthenticateResponse {
    std::variant<AuthenticateResponseOk, AuthenticateResponseError> result;

    bool ok() const { return result.index() == 0; }

    json to_json() const;
    static EsipaAuthenticateResponse from_json(const json& j);
    Bytes encode() const;
    static EsipaAuthenticateResponse decode(ByteSpan data);
};

struct EsipaPrepareDownloadRequest {
    ProfileMetadata profileMetadata;
    SmdpSigned2 smdpSigned2;
    Octet64 smdpSignature2{};
    pki::Certificate smdpCertificate;

    json to_json() const;
    static EsipaPrepareDownloadRequest from_json(const json& j);
    Bytes encode() const;
    static EsipaPrepareDownloadRequest decode(ByteSpan data);
    bool operator==(const EsipaPrepareDownloadRequest&) const = default;
};

struct EsipaCancelled {
    CancelSessionReason reason = CancelSessionReason::undefinedReason;
    bool operator==(const EsipaCancelled&) const = default;
};

struct EsipaPrepareDownloadResponse {
    std::variant<PrepareDownloadResponseOk, PrepareDownloadResponseError, EsipaCancelled> result;

    bool ok() const { return result.index() == 0; }

    json to_json() const;
    static EsipaPrepareDownloadResponse from_json(const json& j);
    Bytes encode() const;
    static EsipaPrepareDownloadResponse decode(ByteSpan data);
};

struct EsipaLoadBppRequest {
    BoundProfilePackage boundProfilePackage;

    json to_json() const;
    static EsipaLoadBppRequest from_json(const json& j);
    Bytes encode() const;
    static EsipaLoadBppRequest decode(ByteSpan data);
    bool operator==(const EsipaLoadBppRequest&) const = default;
};

struct EsipaLoadBppResponse {
    std::variant<ProfileInstallationResult, EsipaCancelled> result;

    bool ok() const { return result.index() == 0; }

    json to_json() const;
    static EsipaLoadBppResponse from_json(const json& j);
    Bytes encode() const;
    static EsipaLoadBppResponse decode(ByteSpan data);
};

struct EsipaRemoveNotificationRequest {
    std::uint64_t seqNumber = 0;

    json to_json() const;
    static EsipaRemoveNotificationRequest from_json(const json& j);
    Bytes encode() const;
    static EsipaRemoveNotificationRequest decode(ByteSpan data);
    bool operator==(const EsipaRemoveNotificationRequest&) const = default;
};

struct EsipaRemoveNotificationResponse {
    bool removed = false;

    json to_json() const;
    static EsipaRemoveNotificationResponse from_json(const json& j);
    Bytes encode() const;
    static EsipaRemoveNotificationResponse decode(ByteSpan data);
    bool operator==(const EsipaRemoveNotificationResponse&) const = default;
};

struct EsipaPushAcRequest {
    std::string activationCode;

    json to_json() const;
    static EsipaPushAcRequest from_json(const json& j);
    Bytes encode() const;
    static EsipaPushAcRequest decode(ByteSpan data);
    bool operator==(const EsipaPushAcRequest&) const = default;
};

struct EsipaPushAcResponse {
    FlowReport flowReport;

    json to_json() const;
    static EsipaPushAcResponse from_json(const json& j);
    Bytes encode() const;
    static EsipaPushAcResponse decode(ByteSpan data);
};

struct EsipaEimConfigRequest {
    SignedEimOperation signedEimOperation;

    json to_json() const;
    static EsipaEimConfigRequest from_json(const json& j);
    Bytes encode() const;
    static EsipaEimConfigRequest decode(ByteSpan data);
    bool operator==(const EsipaEimConfigRequest&) const = default;
};

struct EsipaEimConfigResponse {
    bool ok = false;
    std::optional<EimConfigRejectReason> reason;

    json to_json() const;
    static EsipaEimConfigResponse from_json(const json& j);
    Bytes encode() const;
    static EsipaEimConfigResponse decode(ByteSpan data);
};

// Endpoint paths. ES9+ names are fixed; the rest are this lab's convention.
namespace endpoint {
inline constexpr const char* kInitiateAuthentication = "/gsma/rsp2/es9plus/initiateAuthentication";
inline constexpr const char* kAuthenticateClient = "/gsma/rsp2/es9plus/authenticateClient";
inline constexpr const char* kGetBoundProfilePackage = "/gsma/rsp2/es9plus/getBoundProfilePackage";
inline constexpr const char* kHandleNotification = "/gsma/rsp2/es9plus/handleNotification";

inline constexpr const char* kGetEuiccInfo1 = "/es10b/getEuiccInfo1";
inline constexpr const char* kGetEuiccChallenge = "/es10b/getEuiccChallenge";
inline constexpr const char* kAuthenticateServer = "/es10b/authenticateServer";
inline constexpr const char* kPrepareDownload = "/es10b/prepareDownload";
inline constexpr const char* kLoadBoundProfilePackage = "/es10b/loadBoundProfilePackage";
inline constexpr const char* kCancelSession = "/es10b/cancelSession";
inline constexpr const char* kRemoveNotificationFromList = "/es10b/removeNotificationFromList";
inline constexpr const char* kGetRat = "/es10b/getRat";
inline constexpr const char* kGetProfilesInfo = "/es10c/getProfilesInfo";
inline constexpr const char* kAddEimConfig = "/es10b/addEimConfiguration";
inline constexpr const char* kProcessEimOperation = "/es10b/processEimOperation";
inline constexpr const char* kRemoveEimConfig = "/es10b/removeEimConfiguration";

inline constexpr const char* kEsipaGetAuthInputs = "/esipa/getAuthInputs";
inline constexpr const char* kEsipaAuthenticate = "/esipa/authenticate";
inline constexpr const char* kEsipaPrepareDownload = "/esipa/prepareDownload";
inline constexpr const char* kEsipaLoadBpp = "/esipa/loadBoundProfilePackage";
inline constexpr const char* kEsipaRemoveNotification = "/esipa/removeNotification";
inline constexpr const char* kEsipaPushAc = "/esipa/pushActivationCode";
inline constexpr const char* kEsipaEimConfig = "/esipa/eimConfiguration";
}  // namespace endpoint

}  // namespace rsplab::msg

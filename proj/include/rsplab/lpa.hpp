#pragma once

#include <functional>
#include <memory>

#include "rsplab/harness.hpp"
#include "rsplab/messages.hpp"

namespace rsplab {

enum class Consent { accept, reject, postpone };

struct LpaConfig {
    std::optional<pki::PublicKeyId> allowedRootId;
    std::optional<std::string> defaultSmdpAddress;
    std::function<Consent(const msg::ProfileMetadata&)> consentHook =
        [](const msg::ProfileMetadata&) { return Consent::accept; };
    bool timeCheckEnabled = true;
    msg::RspCapability capability;
    /// What the SM-DP+ supports; provisioned knowledge (it is not carried
    /// on the wire).
    msg::RspCapability serverCapability;
    std::string tac = "35290611";
    std::optional<std::string> confirmationCode;
};

/// Pre-resolved SM-DS variant: the discovery exchange itself is out of
/// scope, the record it would have produced is supplied directly.
struct SmdsSource {
    std::string smdpAddress;
    std::string matchingId;
};

struct DefaultSmdpSource {};

using DownloadSource = std::variant<msg::ActivationCode, DefaultSmdpSource, SmdsSource>;

/// Everything a completed common mutual authentication leaves behind.
struct AuthSession {
    msg::TransactionId transactionId;
    std::string smdpAddress;
    msg::EuiccInfo1 euiccInfo1;
    msg::EuiccInfo2 euiccInfo2;  // as signed into euiccSigned1
    msg::RspCapability serverCapability;
    pki::Certificate euiccCertificate;
    msg::AuthenticateClientOk clientOk;
};

struct PeerCapabilities {
    msg::RspCapability euicc;
    msg::RspCapability server;
    msg::RspCapability lpa;
};

/// The four install-permission checks run on Profile Metadata before any
/// download, in listed order; first violation wins.
std::optional<msg::CancelSessionReason> check_profile_rules(
    const msg::ProfileMetadata& metadata, const std::vector<msg::PprSet>& ratPermitted,
    std::size_t installedProfileCount, const PeerCapabilities& caps);

/// Raised by exchange helpers when a peer answers with an error status or
/// the transport gives up; run_* turns it into a FlowReport.
struct StageError : std::runtime_error {
    StageError(std::string stage_, std::int64_t code_, std::string name_)
        : std::runtime_error(stage_ + ": " + name_),
          stage(std::move(stage_)),
          code(code_),
          name(std::move(name_)) {}

    std::string stage;
    std::int64_t code;
    std::string name;
};

/// Sends one JSON request and returns the parsed response body, mapping
/// transport failures and Failed-header envelope errors to StageError.
msg::json exchange_json(sim::Transport& transport, const std::string& toAddress,
                        const std::string& endpoint, const msg::json& body, const char* stage);

class Lpa {
public:
    Lpa(LpaConfig config, sim::Transport& transport, std::string euiccAddress);

    std::variant<AuthSession, msg::FlowReport> run_common_mutual_auth(
        const std::string& smdpAddress, const std::string& matchingId,
        msg::OperationType operationType, const std::string& expectedOid);

    msg::FlowReport run_profile_download(const DownloadSource& source);

    std::size_t consent_calls() const { return consentCalls_; }
    const std::vector<std::string>& notes() const { return notes_; }

private:
    msg::FlowReport cancel_session(const msg::TransactionId& txid,
                                   msg::CancelSessionReason reason,
                                   const pki::Certificate& euiccCert);
    msg::FlowReport download_with(const std::string& smdpAddress, const std::string& matchingId,
                                  const std::string& expectedOid, bool viaSmds);

    LpaConfig config_;
    sim::Transport& transport_;
    std::string euiccAddress_;
    std::size_t consentCalls_ = 0;
    std::vector<std::string> notes_;
};

}  // namespace rsplab

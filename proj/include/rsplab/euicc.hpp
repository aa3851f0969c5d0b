#pragma once

#include <deque>
#include <memory>

#include "rsplab/harness.hpp"
#include "rsplab/messages.hpp"
#include "rsplab/rng.hpp"

namespace rsplab {

struct InstalledProfile {
    enum class State { disabled, enabled };

    Iccid iccid{};
    msg::ProfileMetadata metadata;
    State state = State::disabled;
    Bytes isdpAid;
};

struct PendingNotification {
    std::uint64_t seqNumber = 0;
    msg::ProfileInstallationResult result;
};

/// EID as this lab derives it: hex of SHA-256(leaf public key), first 16 bytes.
std::string derive_eid(const Octet32& euiccPublicKey);

struct EuiccConfig {
    std::string address = "euicc:dev-1";
    msg::RspCapability capability;
    std::vector<msg::PprSet> ratPermitted;  // empty = no PPR allowed
    std::uint64_t freeNonVolatileMemory = 4 * 1024 * 1024;
    msg::SvnVersion svn{3, 0, 0};
};

/// eUICC emulator. One in-flight operation at a time; the harness serializes
/// calls, so there is no internal locking.
class Euicc : public sim::Actor {
public:
    Euicc(EuiccConfig config, crypto::SigKeyPair keys, std::vector<pki::Certificate> certChain,
          pki::TrustStore store, std::shared_ptr<sim::Clock> clock, DeterministicRng rng);

    // --- ES10b operations ---
    msg::EuiccInfo1 get_euicc_info1() const;
    Octet16 get_euicc_challenge();
    msg::AuthenticateServerResponse authenticate_server(const msg::AuthenticateServerRequest& req);
    msg::PrepareDownloadResponse prepare_download(const msg::PrepareDownloadRequest& req);
    msg::LoadBppSegmentResponse load_bpp_segment(const msg::LoadBppSegmentRequest& req);
    msg::CancelSessionResponse cancel_session(const msg::CancelSessionRequest& req);
    bool remove_notification(std::uint64_t seqNumber);

    // --- eIM configuration ---
    msg::EimConfigResult eim_add_config(const msg::EimConfigurationData& data);
    msg::EimConfigResult eim_process_signed_op(const msg::SignedEimOperation& op);
    msg::EimConfigResult eim_remove_config();

    // --- fixture / inspection ---
    const std::string& address() const { return config_.address; }
    std::string eid() const { return derive_eid(keys_.publicKey); }
    const std::vector<pki::Certificate>& cert_chain() const { return certChain_; }
    const std::vector<InstalledProfile>& profiles() const { return profiles_; }
    const std::vector<PendingNotification>& notifications() const { return notifications_; }
    const std::optional<msg::EimConfigurationData>& eim_config() const { return eimConfig_; }
    pki::TrustStore& trust_store() { return store_; }
    std::uint64_t next_seq_number() const { return nextSeqNumber_; }
    msg::EuiccInfo2 build_euicc_info2() const;
    void install_fixture_profile(const msg::ProfileMetadata& metadata);

    Bytes handle(const Bytes& requestEnvelope) override;

private:
    struct Session {
        Octet16 euiccChallenge{};
        bool challengeConsumed = false;
        std::optional<msg::TransactionId> transactionId;
        std::optional<pki::Certificate> serverAuthCert;  // CERT.XXauth.SIG
        std::optional<pki::Certificate> serverPbCert;    // CERT.DPpb.SIG
        std::optional<crypto::KaKeyPair> otKeyPair;
        std::optional<Octet32> sessionKey;
        bool crlStaplingUsed = false;
        msg::BppCommandId expected = msg::BppCommandId::initialiseSecureChannel;
        std::optional<msg::ProfileMetadata> stagedMetadata;
        bool bppFailed = false;
    };

    std::optional<msg::AuthenticateErrorCode> check_server_chain_and_staples(
        const msg::AuthenticateServerRequest& req, std::vector<pki::Certificate>& fullChain);
    msg::ProfileInstallationResult finish_with_error(msg::BppCommandId command,
                                                     msg::ErrorReason reason);
    msg::ProfileInstallationResult finish_with_success();
    msg::ProfileInstallationResult sign_result(msg::ProfileInstallationResultData data);
    bool mac_ok(msg::BppCommandId command, const msg::SealedSegment& segment) const;
    pki::PublicKeyId own_root_id() const;

    EuiccConfig config_;
    crypto::SigKeyPair keys_;
    std::vector<pki::Certificate> certChain_;  // leaf first, then issuers
    pki::TrustStore store_;
    std::shared_ptr<sim::Clock> clock_;
    DeterministicRng rng_;

    std::vector<InstalledProfile> profiles_;
    std::vector<PendingNotification> notifications_;
    std::uint64_t nextSeqNumber_ = 1;
    std::optional<msg::EimConfigurationData> eimConfig_;
    std::optional<Session> session_;
    // Unconsumed one-time key pairs, oldest first; capped at 4 (LRU eviction).
    std::deque<crypto::KaKeyPair> storedOtKeys_;
};

}  // namespace rsplab

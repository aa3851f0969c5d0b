#pragma once

#include <functional>
#include <memory>

#include "rsplab/harness.hpp"
#include "rsplab/messages.hpp"
#include "rsplab/rng.hpp"

namespace rsplab {

struct ProfileOrder {
    enum class State { released, downloaded, installed, error };

    std::string matchingId;
    Iccid iccid{};
    std::string eid;  // empty = not linked
    State state = State::released;
    std::uint32_t downloadAttempts = 0;
    std::uint32_t maxAttempts = 3;
    bool ccRequired = false;
    std::string confirmationCode;
    std::uint32_t ccAttempts = 0;
    msg::ProfileMetadata metadata;
    bool expired = false;
    bool terminated = false;
    bool viaSmds = false;
    std::string requesterId;  // functionRequesterIdentifier of the confirm-order
    std::string callId;       // functionCallIdentifier of the confirm-order

    struct BoundBpp {
        std::string eid;
        Octet32 euiccOtpk{};
        msg::BoundProfilePackage bpp;
    };
    std::optional<BoundBpp> boundBpp;
};

const char* order_state_name(ProfileOrder::State s);

struct Es2Notification {
    std::string notificationEvent;
    std::string notificationEventStatus;  // Executed-Success | Failed
    std::string notificationReceiverIdentifier;
    std::string notificationIdentifier;
    std::string detail;
};

struct SmdpConfig {
    std::string address = "smdp.example.com";
    std::string oid = "1.3.6.1.4.1.54321.1";
    msg::RspCapability capability;
    bool rejectAllEligibility = false;
};

/// SM-DP+ engine: one session per TransactionID, an order book keyed by
/// MatchingID, and an append-only operator notification log.
class Smdp : public sim::Actor {
public:
    Smdp(SmdpConfig config, crypto::SigKeyPair dpauthKeys, pki::Certificate dpauthCert,
         crypto::SigKeyPair dppbKeys, pki::Certificate dppbCert, pki::TrustStore store,
         std::shared_ptr<sim::Clock> clock, DeterministicRng rng);

    void add_order(ProfileOrder order);

    msg::InitiateAuthenticationResponse initiate_authentication(
        const msg::InitiateAuthenticationRequest& req);
    msg::AuthenticateClientResponse authenticate_client(const msg::AuthenticateClientRequest& req);
    msg::GetBoundProfilePackageResponse get_bound_profile_package(
        const msg::GetBoundProfilePackageRequest& req);
    msg::HandleNotificationResponse handle_notification(const msg::HandleNotificationRequest& req);
    void delete_ds_event(const std::string& matchingId);

    /// Replaceable eligibility predicate run during the download phase.
    void set_eligibility(std::function<bool(const msg::DeviceInfo&, const msg::EuiccInfo2&)> f) {
        eligibility_ = std::move(f);
    }

    const std::string& address() const { return config_.address; }
    const pki::Certificate& dpauth_cert() const { return dpauthCert_; }
    const pki::Certificate& dppb_cert() const { return dppbCert_; }
    const ProfileOrder* find_order(const std::string& matchingId) const;
    const std::vector<Es2Notification>& operator_log() const { return operatorLog_; }
    const std::vector<std::string>& ds_event_log() const { return dsEventLog_; }
    pki::TrustStore& trust_store() { return store_; }
    /// Distinct log for the root-update branch that this server refuses.
    const std::vector<std::string>& auth_log() const { return authLog_; }

    Bytes handle(const Bytes& requestEnvelope) override;

private:
    enum class Stage { initiated, clientAuthenticated, bppIssued, closed };

    struct Session {
        msg::TransactionId transactionId;
        Octet16 serverChallenge{};
        msg::EuiccInfo1 euiccInfo1;
        msg::RspCapability lpaCapability;
        pki::PublicKeyId euiccCiPKIdToBeUsed;
        Stage stage = Stage::initiated;
        std::optional<pki::Certificate> euiccCert;
        std::string eid;
        std::string matchingId;
    };

    ProfileOrder* order_for(const std::string& matchingId, const std::string& eid);
    msg::BoundProfilePackage build_bpp(const ProfileOrder& order, const Octet32& euiccOtpk,
                                       const msg::TransactionId& txid);
    void notify_operator(const ProfileOrder& order, bool success, const std::string& detail);

    SmdpConfig config_;
    crypto::SigKeyPair dpauthKeys_;
    pki::Certificate dpauthCert_;
    crypto::SigKeyPair dppbKeys_;
    pki::Certificate dppbCert_;
    pki::TrustStore store_;
    std::shared_ptr<sim::Clock> clock_;
    DeterministicRng rng_;

    std::map<std::string, ProfileOrder> orders_;     // keyed by matchingId
    std::map<std::string, Session> sessions_;        // keyed by transactionId hex
    std::vector<Es2Notification> operatorLog_;
    std::vector<std::string> dsEventLog_;
    std::vector<std::string> authLog_;
    std::function<bool(const msg::DeviceInfo&, const msg::EuiccInfo2&)> eligibility_;
};

}  // namespace rsplab

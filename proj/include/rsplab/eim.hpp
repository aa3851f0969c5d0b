#pragma once

#include "rsplab/lpa.hpp"

namespace rsplab {

/// Device-side IoT Profile Assistant. A thin adapter over the client flow
/// steps: the eIM drives it over ESipa, it drives its local eUICC over
/// ES10b. Consent is implicit (no UI on the device).
class Ipa : public sim::Actor {
public:
    Ipa(std::string deviceId, std::string euiccAddress, LpaConfig config,
        sim::Transport& transport, msg::EsipaMode mode);

    const std::string& device_id() const { return deviceId_; }
    msg::EsipaMode mode() const { return mode_; }

    Bytes handle(const Bytes& requestEnvelope) override;

private:
    msg::EsipaGetAuthInputsResponse get_auth_inputs();
    msg::EsipaAuthenticateResponse do_authenticate(const msg::EsipaAuthenticateRequest& req);
    msg::EsipaPrepareDownloadResponse do_prepare(const msg::EsipaPrepareDownloadRequest& req);
    msg::EsipaLoadBppResponse do_load(const msg::EsipaLoadBppRequest& req);
    msg::EsipaRemoveNotificationResponse do_remove(std::uint64_t seqNumber);
    msg::EsipaEimConfigResponse do_eim_config(const msg::EsipaEimConfigRequest& req);
    void cancel(msg::CancelSessionReason reason);

    std::string deviceId_;
    std::string euiccAddress_;
    LpaConfig config_;
    sim::Transport& transport_;
    msg::EsipaMode mode_;

    // Per-flow state between the relay stages.
    std::optional<msg::EuiccInfo1> euiccInfo1_;
    std::optional<msg::TransactionId> transactionId_;
    std::optional<pki::Certificate> euiccCertificate_;
    std::optional<msg::ProfileMetadata> consentedMetadata_;
    std::optional<std::uint64_t> signedProfileCount_;
};

struct EimDevice {
    std::string deviceId;
    std::string ipaAddress;
    msg::EsipaMode mode = msg::EsipaMode::jsonEnvelope;
    msg::RspCapability capability;  // what the device will put into ctxParams1
};

struct EimConfig {
    std::string eimId = "eim-1";
    std::string eimAddress = "eim.example.com";
};

/// eSIM IoT remote Manager: signs configuration operations, pushes
/// activation codes, and relays/re-encodes the indirect download. It holds
/// no protocol secrets beyond its own signing key; the signed payloads it
/// forwards are never re-built, only re-framed.
class Eim {
public:
    Eim(EimConfig config, crypto::SigKeyPair keys, sim::Transport& transport);

    void register_device(EimDevice device);

    msg::FlowReport push_activation_code(const std::string& deviceId, const std::string& acText);
    msg::FlowReport assisted_download(const std::string& deviceId, const msg::ActivationCode& ac);
    msg::SignedEimOperation sign_eim_operation(const msg::EimOperation& op) const;
    msg::EsipaEimConfigResponse send_config_operation(const std::string& deviceId,
                                                      const msg::SignedEimOperation& op);

    msg::EimConfigurationData configuration_data() const;
    const Octet32& public_key() const { return keys_.publicKey; }

private:
    const EimDevice* device(const std::string& deviceId) const;
    /// One ESipa round trip, encoded per the device's transport mode.
    template <typename Req, typename Resp>
    Resp esipa_call(const EimDevice& dev, const char* endpoint, const Req& req, const char* stage);

    EimConfig config_;
    crypto::SigKeyPair keys_;
    sim::Transport& transport_;
    std::map<std::string, EimDevice> devices_;
};

}  // namespace rsplab

#pragma once

#include <cstdint>

// Type tags for the TLV wire format, one per encodable type. Field tags
// inside a struct body are 0x80 + declaration index. The full table is
// documented in docs/wire_format.md; keep the two in sync.
namespace rsplab::tag {

inline constexpr std::uint8_t PublicKeyId = 0x01;
inline constexpr std::uint8_t Certificate = 0x02;
inline constexpr std::uint8_t Crl = 0x03;
inline constexpr std::uint8_t KeyPairRecord = 0x04;
inline constexpr std::uint8_t PkiFixture = 0x05;
inline constexpr std::uint8_t TransactionId = 0x06;
inline constexpr std::uint8_t EuiccInfo1 = 0x07;
inline constexpr std::uint8_t EuiccInfo2 = 0x08;
inline constexpr std::uint8_t ServerSigned1 = 0x09;
inline constexpr std::uint8_t DeviceInfo = 0x0A;
inline constexpr std::uint8_t CtxParams1 = 0x0B;
inline constexpr std::uint8_t EuiccSigned1 = 0x0C;
inline constexpr std::uint8_t SmdpSigned2 = 0x0D;
inline constexpr std::uint8_t EuiccSigned2 = 0x0E;
inline constexpr std::uint8_t ProfileMetadata = 0x0F;
inline constexpr std::uint8_t InitialiseSecureChannel = 0x10;
inline constexpr std::uint8_t SealedSegment = 0x11;
inline constexpr std::uint8_t BoundProfilePackage = 0x12;
inline constexpr std::uint8_t NotificationMetadata = 0x13;
inline constexpr std::uint8_t SuccessResult = 0x14;
inline constexpr std::uint8_t ErrorResult = 0x15;
inline constexpr std::uint8_t ProfileInstallationResultData = 0x16;
inline constexpr std::uint8_t ProfileInstallationResult = 0x17;
inline constexpr std::uint8_t CancelSessionRequest = 0x18;
inline constexpr std::uint8_t EuiccCancelSessionSigned = 0x19;
inline constexpr std::uint8_t CancelSessionResponse = 0x1A;
inline constexpr std::uint8_t EimConfigurationData = 0x1B;
inline constexpr std::uint8_t EimOperation = 0x1C;
inline constexpr std::uint8_t SignedEimOperation = 0x1D;
inline constexpr std::uint8_t ActivationCode = 0x1E;
inline constexpr std::uint8_t FlowReport = 0x1F;
inline constexpr std::uint8_t PrepareDownloadResponse = 0x20;

// ESipa wire messages (compact TLV transport mode).
inline constexpr std::uint8_t EsipaGetAuthInputsRequest = 0x30;
inline constexpr std::uint8_t EsipaGetAuthInputsResponse = 0x31;
inline constexpr std::uint8_t EsipaAuthenticateRequest = 0x32;
inline constexpr std::uint8_t EsipaAuthenticateResponse = 0x33;
inline constexpr std::uint8_t EsipaPrepareDownloadRequest = 0x34;
inline constexpr std::uint8_t EsipaPrepareDownloadResponse = 0x35;
inline constexpr std::uint8_t EsipaLoadBppRequest = 0x36;
inline constexpr std::uint8_t EsipaLoadBppResponse = 0x37;
inline constexpr std::uint8_t EsipaRemoveNotificationRequest = 0x38;
inline constexpr std::uint8_t EsipaRemoveNotificationResponse = 0x39;
inline constexpr std::uint8_t EsipaPushAcRequest = 0x3A;
inline constexpr std::uint8_t EsipaPushAcResponse = 0x3B;
inline constexpr std::uint8_t EsipaEimConfigRequest = 0x3C;
inline constexpr std::uint8_t EsipaEimConfigResponse = 0x3D;

}  // namespace rsplab::tag

#pragma once

#include "rsplab/bytes.hpp"

namespace rsplab::crypto {

/// Signing key pair. privateKey is the 32-byte seed; the expanded form is
/// derived on demand, so fixtures only ever persist 32+32 bytes.
struct SigKeyPair {
    Octet32 publicKey{};
    Octet32 privateKey{};

    bool operator==(const SigKeyPair&) const = default;
};

/// Key-agreement pair (same curve family as the signing scheme).
struct KaKeyPair {
    Octet32 publicKey{};
    Octet32 privateKey{};

    bool operator==(const KaKeyPair&) const = default;
};

SigKeyPair generate_keypair(const Octet32& seed);
Octet64 sign(const Octet32& privateKey, ByteSpan message);
bool verify(const Octet32& publicKey, ByteSpan message, const Octet64& signature);

KaKeyPair generate_ka_keypair(const Octet32& seed);
Octet32 ka_shared_secret(const Octet32& privateKey, const Octet32& peerPublicKey);

Octet32 sha256(ByteSpan data);

/// HMAC-SHA-256 truncated to 16 bytes.
Octet16 hmac16(const Octet32& key, ByteSpan data);

}  // namespace rsplab::crypto

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "rsplab/crypto.hpp"
#include "rsplab/tlv.hpp"

namespace rsplab::pki {

using crypto::SigKeyPair;
using KeyPair = crypto::SigKeyPair;

/// Subject Key Identifier: first 20 bytes of SHA-256 over the raw public key.
struct PublicKeyId {
    Octet20 id{};

    static PublicKeyId from_public_key(const Octet32& publicKey);
    static PublicKeyId from_bytes(ByteSpan raw);

    std::string hex() const { return to_hex(as_span(id)); }
    auto operator<=>(const PublicKeyId&) const = default;
};

enum class CertRole : std::uint8_t {
    ci = 0,
    eum = 1,
    euicc = 2,
    dpauth = 3,
    dppb = 4,
    dsauth = 5,
    eim = 6,
};

const char* role_name(CertRole role);

struct Certificate {
    std::uint64_t serial = 0;
    std::string subjectName;
    CertRole role = CertRole::ci;
    Octet32 subjectPublicKey{};
    PublicKeyId subjectKeyId;
    PublicKeyId authorityKeyId;
    std::int64_t notBefore = 0;
    std::int64_t notAfter = 0;
    std::string oid;  // empty = absent; set for dpauth/dppb
    bool hasCrlDistributionPoint = false;
    Octet64 signature{};

    bool self_signed() const { return subjectKeyId == authorityKeyId; }

    /// TLV of every field before the signature; this is what gets signed.
    Bytes tbs_bytes() const;
    Bytes encode() const;
    static Certificate decode(ByteSpan data);

    bool operator==(const Certificate&) const = default;
};

struct Crl {
    PublicKeyId issuerKeyId;
    std::int64_t thisUpdate = 0;
    std::int64_t nextUpdate = 0;
    std::vector<std::uint64_t> revokedSerials;  // kept sorted, unique
    Octet64 signature{};

    bool covers(std::uint64_t serial) const;

    Bytes tbs_bytes() const;
    Bytes encode() const;
    static Crl decode(ByteSpan data);

    bool operator==(const Crl&) const = default;
};

/// Trust anchors plus every certificate/CRL an actor knows. The clock is a
/// plain field: tests move it, nothing reads wall time.
struct TrustStore {
    std::set<PublicKeyId> rootKeyIds;
    std::map<PublicKeyId, Certificate> certsByKeyId;
    std::map<PublicKeyId, Crl> crlsByIssuer;
    std::int64_t now = 0;

    void add_root(const Certificate& rootCert);
    void add_cert(const Certificate& cert);
    /// Keeps the CRL with the highest thisUpdate per issuer.
    void add_crl(const Crl& crl);
    const Crl* crl_for(const PublicKeyId& issuer) const;
};

enum class ChainInvalidReason { badSignature, untrustedRoot, revoked, expired };

const char* chain_invalid_reason_name(ChainInvalidReason reason);

struct ChainResult {
    bool valid = false;
    ChainInvalidReason reason = ChainInvalidReason::badSignature;

    static ChainResult ok() { return {true, ChainInvalidReason::badSignature}; }
    static ChainResult invalid(ChainInvalidReason r) { return {false, r}; }
};

/// Validates leaf against the store: per-link signatures, termination at a
/// trusted root, revocation via the store's CRLs, expiry at store.now.
/// `chain` holds intermediates in leaf-to-root order; links missing from it
/// are resolved from the store.
ChainResult validate_chain(const Certificate& leaf, const std::vector<Certificate>& chain,
                           const TrustStore& store);

struct RoleViolation : std::runtime_error {
    explicit RoleViolation(const std::string& what) : std::runtime_error(what) {}
};

struct CertTemplate {
    std::uint64_t serial = 0;
    std::string subjectName;
    CertRole role = CertRole::ci;
    Octet32 subjectPublicKey{};
    std::int64_t notBefore = 0;
    std::int64_t notAfter = 0;
    std::string oid;
    bool hasCrlDistributionPoint = false;
};

/// Self-signed root when issuerCert is null (role ci only).
Certificate issue_certificate(const KeyPair& issuerKeys, const Certificate* issuerCert,
                              const CertTemplate& tpl);

Crl issue_crl(const KeyPair& issuerKeys, const Certificate& issuerCert, std::int64_t thisUpdate,
              std::int64_t nextUpdate, std::vector<std::uint64_t> revokedSerials);

}  // namespace rsplab::pki

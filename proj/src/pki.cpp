#include "rsplab/pki.hpp"

#include <algorithm>

#include "rsplab/tags.hpp"

namespace rsplab::pki {

PublicKeyId PublicKeyId::from_public_key(const Octet32& publicKey) {
    Octet32 digest = crypto::sha256(as_span(publicKey));
    PublicKeyId out;
    std::copy(digest.begin(), digest.begin() + 20, out.id.begin());
    return out;
}

PublicKeyId PublicKeyId::from_bytes(ByteSpan raw) {
    PublicKeyId out;
    out.id = to_array<20>(raw);
    return out;
}

const char* role_name(CertRole role) {
    switch (role) {
        case CertRole::ci: return "ci";
        case CertRole::eum: return "eum";
        case CertRole::euicc: return "euicc";
        case CertRole::dpauth: return "dpauth";
        case CertRole::dppb: return "dppb";
        case CertRole::dsauth: return "dsauth";
        case CertRole::eim: return "eim";
    }
    return "?";
}

Bytes Certificate::tbs_bytes() const {
    tlv::Writer w;
    w.field_uint(0x80, serial);
    w.field_text(0x81, subjectName);
    w.field_uint(0x82, static_cast<std::uint64_t>(role));
    w.field(0x83, as_span(subjectPublicKey));
    w.field(0x84, as_span(subjectKeyId.id));
    w.field(0x85, as_span(authorityKeyId.id));
    w.field_uint(0x86, static_cast<std::uint64_t>(notBefore));
    w.field_uint(0x87, static_cast<std::uint64_t>(notAfter));
    if (!oid.empty()) w.field_text(0x88, oid);
    w.field_bool(0x89, hasCrlDistributionPoint);
    return w.take();
}

Bytes Certificate::encode() const {
    Bytes body = tbs_bytes();
    tlv::Writer w;
    w.raw(body);
    w.field(0x8A, as_span(signature));
    return tlv::Writer::wrap(tag::Certificate, w.bytes());
}

Certificate Certificate::decode(ByteSpan data) {
    tlv::Reader r(tlv::unwrap(tag::Certificate, data));
    Certificate c;
    c.serial = r.expect_uint(0x80);
    c.subjectName = r.expect_text(0x81);
    std::uint64_t role = r.expect_uint(0x82);
    if (role > static_cast<std::uint64_t>(CertRole::eim)) throw tlv::MalformedTlv("bad role");
    c.role = static_cast<CertRole>(role);
    c.subjectPublicKey = to_array<32>(r.expect(0x83));
    c.subjectKeyId = PublicKeyId::from_bytes(r.expect(0x84));
    c.authorityKeyId = PublicKeyId::from_bytes(r.expect(0x85));
    c.notBefore = static_cast<std::int64_t>(r.expect_uint(0x86));
    c.notAfter = static_cast<std::int64_t>(r.expect_uint(0x87));
    if (auto oid = r.optional(0x88)) {
        c.oid = std::string(reinterpret_cast<const char*>(oid->data()), oid->size());
    }
    c.hasCrlDistributionPoint = r.expect_bool(0x89);
    c.signature = to_array<64>(r.expect(0x8A));
    r.finish();
    return c;
}

bool Crl::covers(std::uint64_t serial) const {
    return std::binary_search(revokedSerials.begin(), revokedSerials.end(), serial);
}

Bytes Crl::tbs_bytes() const {
    tlv::Writer w;
    w.field(0x80, as_span(issuerKeyId.id));
    w.field_uint(0x81, static_cast<std::uint64_t>(thisUpdate));
    w.field_uint(0x82, static_cast<std::uint64_t>(nextUpdate));
    tlv::Writer serials;
    for (std::uint64_t s : revokedSerials) serials.field_uint(0x80, s);
    w.field(0x83, serials.bytes());
    return w.take();
}

Bytes Crl::encode() const {
    tlv::Writer w;
    w.raw(tbs_bytes());
    w.field(0x84, as_span(signature));
    return tlv::Writer::wrap(tag::Crl, w.bytes());
}

Crl Crl::decode(ByteSpan data) {
    tlv::Reader r(tlv::unwrap(tag::Crl, data));
    Crl crl;
    crl.issuerKeyId = PublicKeyId::from_bytes(r.expect(0x80));
    crl.thisUpdate = static_cast<std::int64_t>(r.expect_uint(0x81));
    crl.nextUpdate = static_cast<std::int64_t>(r.expect_uint(0x82));
    tlv::Reader serials(r.expect(0x83));
    std::uint64_t prev = 0;
    bool first = true;
    while (!serials.at_end()) {
        std::uint64_t s = serials.expect_uint(0x80);
        if (!first && s <= prev) throw tlv::MalformedTlv("serials not strictly increasing");
        crl.revokedSerials.push_back(s);
        prev = s;
        first = false;
    }
    crl.signature = to_array<64>(r.expect(0x84));
    r.finish();
    return crl;
}

void TrustStore::add_root(const Certificate& rootCert) {
    rootKeyIds.insert(rootCert.subjectKeyId);
    certsByKeyId[rootCert.subjectKeyId] = rootCert;
}

void TrustStore::add_cert(const Certificate& cert) { certsByKeyId[cert.subjectKeyId] = cert; }

void TrustStore::add_crl(const Crl& crl) {
    auto it = crlsByIssuer.find(crl.issuerKeyId);
    if (it == crlsByIssuer.end() || it->second.thisUpdate < crl.thisUpdate) {
        crlsByIssuer[crl.issuerKeyId] = crl;
    }
}

const Crl* TrustStore::crl_for(const PublicKeyId& issuer) const {
    auto it = crlsByIssuer.find(issuer);
    return it == crlsByIssuer.end() ? nullptr : &it->second;
}

ChainResult validate_chain(const Certificate& leaf, const std::vector<Certificate>& chain,
                           const TrustStore& store) {
    // Resolve the full path leaf -> root, preferring supplied intermediates.
    std::vector<const Certificate*> path;
    path.push_back(&leaf);
    std::size_t chainIdx = 0;
    while (!path.back()->self_signed()) {
        const PublicKeyId& issuer = path.back()->authorityKeyId;
        const Certificate* next = nullptr;
        if (chainIdx < chain.size() && chain[chainIdx].subjectKeyId == issuer) {
            next = &chain[chainIdx++];
        } else {
            auto it = store.certsByKeyId.find(issuer);
            if (it != store.certsByKeyId.end()) next = &it->second;
        }
        if (next == nullptr) return ChainResult::invalid(ChainInvalidReason::untrustedRoot);
        path.push_back(next);
        if (path.size() > 8) return ChainResult::invalid(ChainInvalidReason::untrustedRoot);
    }

    // Condition 1: every link carries a valid signature by its issuer.
    for (std::size_t i = 0; i < path.size(); i++) {
        const Certificate* issuer = (i + 1 < path.size()) ? path[i + 1] : path[i];
        if (!crypto::verify(issuer->subjectPublicKey, path[i]->tbs_bytes(), path[i]->signature)) {
            return ChainResult::invalid(ChainInvalidReason::badSignature);
        }
    }

    // Condition 2: terminates at a trust anchor.
    if (!store.rootKeyIds.contains(path.back()->subjectKeyId)) {
        return ChainResult::invalid(ChainInvalidReason::untrustedRoot);
    }

    // Condition 3: no link revoked. A revoked intermediate rejects every
    // certificate below it because each link is checked on every call.
    auto find_by_key_id = [&](const PublicKeyId& keyId) -> const Certificate* {
        for (const Certificate* c : path) {
            if (c->subjectKeyId == keyId) return c;
        }
        auto it = store.certsByKeyId.find(keyId);
        return it == store.certsByKeyId.end() ? nullptr : &it->second;
    };
    for (const Certificate* cert : path) {
        const Crl* crl = store.crl_for(cert->authorityKeyId);
        if (crl == nullptr) continue;
        const Certificate* crlIssuer = find_by_key_id(crl->issuerKeyId);
        if (crlIssuer == nullptr) continue;
        if (!crypto::verify(crlIssuer->subjectPublicKey, crl->tbs_bytes(), crl->signature))
            continue;  // an unverifiable CRL proves nothing
        if (crl->covers(cert->serial)) return ChainResult::invalid(ChainInvalidReason::revoked);
    }

    // Condition 4: no link expired (or not yet valid) at the store clock.
    for (const Certificate* cert : path) {
        if (store.now < cert->notBefore || store.now > cert->notAfter) {
            return ChainResult::invalid(ChainInvalidReason::expired);
        }
    }

    return ChainResult::ok();
}

const char* chain_invalid_reason_name(ChainInvalidReason reason) {
    switch (reason) {
        case ChainInvalidReason::badSignature: return "badSignature";
        case ChainInvalidReason::untrustedRoot: return "untrustedRoot";
        case ChainInvalidReason::revoked: return "revoked";
        case ChainInvalidReason::expired: return "expired";
    }
    return "?";
}

Certificate issue_certificate(const KeyPair& issuerKeys, const Certificate* issuerCert,
                              const CertTemplate& tpl) {
    if (issuerCert == nullptr && tpl.role != CertRole::ci) {
        throw RoleViolation("only ci roots may be self-signed");
    }
    if (issuerCert != nullptr) {
        bool ok = false;
        switch (issuerCert->role) {
            case CertRole::ci:
                ok = tpl.role == CertRole::ci || tpl.role == CertRole::eum ||
                     tpl.role == CertRole::dpauth || tpl.role == CertRole::dppb ||
                     tpl.role == CertRole::dsauth || tpl.role == CertRole::eim;
                break;
            case CertRole::eum:
                ok = tpl.role == CertRole::euicc;
                break;
            default:
                ok = false;
        }
        if (!ok) {
            throw RoleViolation(std::string(role_name(issuerCert->role)) + " cannot issue " +
                                role_name(tpl.role));
        }
    }

    Certificate c;
    c.serial = tpl.serial;
    c.subjectName = tpl.subjectName;
    c.role = tpl.role;
    c.subjectPublicKey = tpl.subjectPublicKey;
    c.subjectKeyId = PublicKeyId::from_public_key(tpl.subjectPublicKey);
    c.authorityKeyId =
        issuerCert ? issuerCert->subjectKeyId : PublicKeyId::from_public_key(tpl.subjectPublicKey);
    c.notBefore = tpl.notBefore;
    c.notAfter = tpl.notAfter;
    c.oid = tpl.oid;
    c.hasCrlDistributionPoint = tpl.hasCrlDistributionPoint;
    c.signature = crypto::sign(issuerKeys.privateKey, c.tbs_bytes());
    return c;
}

Crl issue_crl(const KeyPair& issuerKeys, const Certificate& issuerCert, std::int64_t thisUpdate,
              std::int64_t nextUpdate, std::vector<std::uint64_t> revokedSerials) {
    std::sort(revokedSerials.begin(), revokedSerials.end());
    revokedSerials.erase(std::unique(revokedSerials.begin(), revokedSerials.end()),
                         revokedSerials.end());
    Crl crl;
    crl.issuerKeyId = issuerCert.subjectKeyId;
    crl.thisUpdate = thisUpdate;
    crl.nextUpdate = nextUpdate;
    crl.revokedSerials = std::move(revokedSerials);
    crl.signature = crypto::sign(issuerKeys.privateKey, crl.tbs_bytes());
    return crl;
}

}  // namespace rsplab::pki

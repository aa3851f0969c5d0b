#include "rsplab/crypto.hpp"

#include <sodium.h>

#include <mutex>
#include <stdexcept>

namespace rsplab::crypto {

namespace {

void ensure_sodium() {
    static std::once_flag once;
    std::call_once(once, [] {
        if (sodium_init() < 0) throw std::runtime_error("sodium_init failed");
    });
}

// Expanded ed25519 secret key (seed || public key).
std::array<std::uint8_t, crypto_sign_SECRETKEYBYTES> expand(const Octet32& seed) {
    std::array<std::uint8_t, crypto_sign_SECRETKEYBYTES> sk{};
    std::array<std::uint8_t, crypto_sign_PUBLICKEYBYTES> pk{};
    crypto_sign_seed_keypair(pk.data(), sk.data(), seed.data());
    return sk;
}

}  // namespace

SigKeyPair generate_keypair(const Octet32& seed) {
    ensure_sodium();
    static_assert(crypto_sign_PUBLICKEYBYTES == 32);
    static_assert(crypto_sign_SEEDBYTES == 32);
    SigKeyPair kp;
    std::array<std::uint8_t, crypto_sign_SECRETKEYBYTES> sk{};
    crypto_sign_seed_keypair(kp.publicKey.data(), sk.data(), seed.data());
    kp.privateKey = seed;
    return kp;
}

Octet64 sign(const Octet32& privateKey, ByteSpan message) {
    ensure_sodium();
    static_assert(crypto_sign_BYTES == 64);
    auto sk = expand(privateKey);
    Octet64 sig{};
    crypto_sign_detached(sig.data(), nullptr, message.data(), message.size(), sk.data());
    return sig;
}

bool verify(const Octet32& publicKey, ByteSpan message, const Octet64& signature) {
    ensure_sodium();
    return crypto_sign_verify_detached(signature.data(), message.data(), message.size(),
                                       publicKey.data()) == 0;
}

KaKeyPair generate_ka_keypair(const Octet32& seed) {
    ensure_sodium();
    static_assert(crypto_scalarmult_BYTES == 32);
    KaKeyPair kp;
    kp.privateKey = seed;
    crypto_scalarmult_base(kp.publicKey.data(), kp.privateKey.data());
    return kp;
}

Octet32 ka_shared_secret(const Octet32& privateKey, const Octet32& peerPublicKey) {
    ensure_sodium();
    Octet32 shared{};
    if (crypto_scalarmult(shared.data(), privateKey.data(), peerPublicKey.data()) != 0) {
        throw std::runtime_error("degenerate key agreement public key");
    }
    return shared;
}

Octet32 sha256(ByteSpan data) {
    ensure_sodium();
    static_assert(crypto_hash_sha256_BYTES == 32);
    Octet32 out{};
    crypto_hash_sha256(out.data(), data.data(), data.size());
    return out;
}

Octet16 hmac16(const Octet32& key, ByteSpan data) {
    ensure_sodium();
    std::array<std::uint8_t, crypto_auth_hmacsha256_BYTES> full{};
    crypto_auth_hmacsha256_state st;
    crypto_auth_hmacsha256_init(&st, key.data(), key.size());
    crypto_auth_hmacsha256_update(&st, data.data(), data.size());
    crypto_auth_hmacsha256_final(&st, full.data());
    Octet16 out{};
    std::copy(full.begin(), full.begin() + 16, out.begin());
    return out;
}

}  // namespace rsplab::crypto

#pragma once

#include <cstdint>
#include <string_view>

#include "rsplab/bytes.hpp"

namespace rsplab {

/// xoshiro256** seeded through splitmix64. Pure integer arithmetic, so
/// streams are identical on every platform. Not a CSPRNG; fixtures only.
class DeterministicRng {
public:
    explicit DeterministicRng(std::uint64_t seed) : seed_(seed) {
        std::uint64_t x = seed;
        for (auto& s : state_) s = splitmix64(x);
    }

    std::uint64_t next_u64() {
        std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
        std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    /// Uniform in [0, bound), bound > 0.
    std::uint64_t next_below(std::uint64_t bound) {
        std::uint64_t threshold = -bound % bound;
        for (;;) {
            std::uint64_t r = next_u64();
            if (r >= threshold) return r % bound;
        }
    }

    void fill(std::uint8_t* out, std::size_t n) {
        std::size_t i = 0;
        while (i < n) {
            std::uint64_t v = next_u64();
            for (int k = 0; k < 8 && i < n; k++, i++) {
                out[i] = static_cast<std::uint8_t>(v >> (8 * k));
            }
        }
    }

    Bytes bytes(std::size_t n) {
        Bytes out(n);
        fill(out.data(), n);
        return out;
    }

    Octet16 octet16() {
        Octet16 out{};
        fill(out.data(), out.size());
        return out;
    }

    Octet32 octet32() {
        Octet32 out{};
        fill(out.data(), out.size());
        return out;
    }

    /// Independent child stream; same (seed, label) always yields the same
    /// stream regardless of draws already made on the parent.
    DeterministicRng derive(std::string_view label) const {
        std::uint64_t h = 1469598103934665603ULL;  // FNV-1a
        for (char c : label) {
            h ^= static_cast<std::uint8_t>(c);
            h *= 1099511628211ULL;
        }
        std::uint64_t x = seed_ ^ h;
        return DeterministicRng(splitmix64(x));
    }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

    static std::uint64_t splitmix64(std::uint64_t& x) {
        std::uint64_t z = (x += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    std::uint64_t state_[4];
    std::uint64_t seed_;
};

}  // namespace rsplab

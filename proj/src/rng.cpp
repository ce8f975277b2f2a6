// SPDX-License-Identifier: Apache-2.0
#include "hhekit/rng.hpp"

#include <cmath>

#include "hhekit/errors.hpp"

namespace hhekit::rng {

Sampler::Sampler(std::span<const uint8_t> seed, std::string_view label) {
    stream_.absorb(seed);
    stream_.absorb(std::string_view("\x00", 1));
    stream_.absorb(label);
}

Sampler Sampler::from_hex(const std::string& hex_seed, std::string_view label) {
    auto bytes = parse_hex(hex_seed);
    return Sampler(bytes, label);
}

int Sampler::ternary() {
    uint64_t b = stream_.squeeze_bits(2);
    if (b == 2) return 1;
    if (b == 3) return -1;
    return 0;
}

uint64_t Sampler::u64() { return stream_.squeeze_u64(); }

double Sampler::canonical_double() {
    return static_cast<double>(stream_.squeeze_bits(53)) * 0x1p-53;
}

int Sampler::gaussian() {
    // Box-Muller on the XOF stream; the 6-sigma tail is resampled so the
    // output is bounded by kTailBound.
    for (;;) {
        double u1 = canonical_double();
        double u2 = canonical_double();
        if (u1 <= 0x1p-60) continue;
        double mag = kSigma * std::sqrt(-2.0 * std::log(u1));
        double z = mag * std::cos(2.0 * M_PI * u2);
        long r = std::lround(z);
        if (r >= -kTailBound && r <= kTailBound) return static_cast<int>(r);
    }
}

uint64_t Sampler::uniform_below(uint64_t bound) {
    if (bound == 0) throw ParameterError("uniform bound must be positive");
    if (bound == 1) return 0;
    unsigned bits = 64 - __builtin_clzll(bound - 1);
    for (;;) {
        uint64_t v = stream_.squeeze_bits(bits);
        if (v < bound) return v;
    }
}

std::vector<int> Sampler::ternary_vector(size_t n) {
    std::vector<int> v(n);
    for (auto& x : v) x = ternary();
    return v;
}

std::vector<int> Sampler::gaussian_vector(size_t n) {
    std::vector<int> v(n);
    for (auto& x : v) x = gaussian();
    return v;
}

std::vector<uint8_t> parse_hex(const std::string& hex) {
    if (hex.size() % 2 != 0) throw FormatError("hex string has odd length", hex.size());
    auto nibble = [&](char c, size_t pos) -> uint8_t {
        if (c >= '0' && c <= '9') return c - '0';
        if (c >= 'a' && c <= 'f') return c - 'a' + 10;
        if (c >= 'A' && c <= 'F') return c - 'A' + 10;
        throw FormatError("invalid hex digit", pos);
    };
    std::vector<uint8_t> out(hex.size() / 2);
    for (size_t i = 0; i < out.size(); ++i)
        out[i] = static_cast<uint8_t>(nibble(hex[2 * i], 2 * i) << 4) | nibble(hex[2 * i + 1], 2 * i + 1);
    return out;
}

std::string to_hex(std::span<const uint8_t> bytes) {
    static const char* digits = "0123456789abcdef";
    std::string s;
    s.reserve(bytes.size() * 2);
    for (uint8_t b : bytes) {
        s.push_back(digits[b >> 4]);
        s.push_back(digits[b & 0xf]);
    }
    return s;
}

}  // namespace hhekit::rng

// SPDX-License-Identifier: Apache-2.0
#include "hhekit/xof.hpp"

#include <cstring>

namespace hhekit::xof {

namespace {

constexpr uint64_t kRoundConstants[24] = {
    0x0000000000000001ULL, 0x0000000000008082ULL, 0x800000000000808aULL,
    0x8000000080008000ULL, 0x000000000000808bULL, 0x0000000080000001ULL,
    0x8000000080008081ULL, 0x8000000000008009ULL, 0x000000000000008aULL,
    0x0000000000000088ULL, 0x0000000080008009ULL, 0x000000008000000aULL,
    0x000000008000808bULL, 0x800000000000008bULL, 0x8000000000008089ULL,
    0x8000000000008003ULL, 0x8000000000008002ULL, 0x8000000000000080ULL,
    0x000000000000800aULL, 0x800000008000000aULL, 0x8000000080008081ULL,
    0x8000000000008080ULL, 0x0000000080000001ULL, 0x8000000080008008ULL,
};

constexpr int kRotation[24] = {1,  3,  6,  10, 15, 21, 28, 36, 45, 55, 2,  14,
                               27, 41, 56, 8,  25, 43, 62, 18, 39, 61, 20, 44};

constexpr int kPi[24] = {10, 7,  11, 17, 18, 3, 5,  16, 8,  21, 24, 4,
                         15, 23, 19, 13, 12, 2, 20, 14, 22, 9,  6,  1};

inline uint64_t rotl64(uint64_t x, int s) { return (x << s) | (x >> (64 - s)); }

void keccak_f1600(uint64_t a[25]) {
    for (int round = 0; round < 24; ++round) {
        // theta
        uint64_t c[5], d[5];
        for (int x = 0; x < 5; ++x)
            c[x] = a[x] ^ a[x + 5] ^ a[x + 10] ^ a[x + 15] ^ a[x + 20];
        for (int x = 0; x < 5; ++x) {
            d[x] = c[(x + 4) % 5] ^ rotl64(c[(x + 1) % 5], 1);
            for (int y = 0; y < 25; y += 5) a[x + y] ^= d[x];
        }
        // rho + pi
        uint64_t t = a[1];
        for (int i = 0; i < 24; ++i) {
            uint64_t tmp = a[kPi[i]];
            a[kPi[i]] = rotl64(t, kRotation[i]);
            t = tmp;
        }
        // chi
        for (int y = 0; y < 25; y += 5) {
            uint64_t row[5];
            for (int x = 0; x < 5; ++x) row[x] = a[y + x];
            for (int x = 0; x < 5; ++x)
                a[y + x] = row[x] ^ (~row[(x + 1) % 5] & row[(x + 2) % 5]);
        }
        // iota
        a[0] ^= kRoundConstants[round];
    }
}

inline void xor_byte(uint64_t* state, size_t pos, uint8_t b) {
    state[pos / 8] ^= static_cast<uint64_t>(b) << (8 * (pos % 8));
}

inline uint8_t get_byte(const uint64_t* state, size_t pos) {
    return static_cast<uint8_t>(state[pos / 8] >> (8 * (pos % 8)));
}

}  // namespace

void Shake128::permute() { keccak_f1600(state_); }

void Shake128::absorb(std::span<const uint8_t> data) {
    if (squeezing_) {
        // Re-seeding after squeeze is not supported; start a fresh instance instead.
        *this = Shake128();
    }
    for (uint8_t b : data) {
        xor_byte(state_, absorb_pos_++, b);
        if (absorb_pos_ == kRate) {
            permute();
            absorb_pos_ = 0;
        }
    }
}

void Shake128::absorb(std::string_view s) {
    absorb(std::span<const uint8_t>(reinterpret_cast<const uint8_t*>(s.data()), s.size()));
}

void Shake128::finalize_absorb() {
    xor_byte(state_, absorb_pos_, 0x1f);
    xor_byte(state_, kRate - 1, 0x80);
    permute();
    squeezing_ = true;
    squeeze_pos_ = 0;
}

void Shake128::squeeze(uint8_t* out, size_t len) {
    if (!squeezing_) finalize_absorb();
    for (size_t i = 0; i < len; ++i) {
        if (squeeze_pos_ == kRate) {
            permute();
            squeeze_pos_ = 0;
        }
        out[i] = get_byte(state_, squeeze_pos_++);
    }
}

std::vector<uint8_t> Shake128::squeeze(size_t len) {
    std::vector<uint8_t> out(len);
    squeeze(out.data(), len);
    return out;
}

uint64_t Shake128::squeeze_u64() {
    uint8_t b[8];
    squeeze(b, 8);
    uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(b[i]) << (8 * i);
    return v;
}

uint64_t Shake128::squeeze_bits(unsigned bits) {
    while (bit_count_ < bits) {
        uint8_t b;
        squeeze(&b, 1);
        bit_buf_ |= static_cast<uint64_t>(b) << bit_count_;
        bit_count_ += 8;
    }
    uint64_t v = bit_buf_ & ((uint64_t(1) << bits) - 1);
    bit_buf_ >>= bits;
    bit_count_ -= bits;
    return v;
}

std::vector<uint8_t> shake128(std::span<const uint8_t> seed, size_t out_len) {
    Shake128 x(seed);
    return x.squeeze(out_len);
}

}  // namespace hhekit::xof

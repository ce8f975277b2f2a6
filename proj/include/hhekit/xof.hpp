// SPDX-License-Identifier: Apache-2.0
#ifndef HHEKIT_XOF_HPP
#define HHEKIT_XOF_HPP

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace hhekit::xof {

// SHAKE-128 extendable-output function (FIPS 202). Absorb-then-squeeze;
// squeezing is incremental and the output stream is prefix-stable.
class Shake128 {
public:
    Shake128() = default;
    explicit Shake128(std::span<const uint8_t> seed) { absorb(seed); }

    void absorb(std::span<const uint8_t> data);
    void absorb(std::string_view s);
    void squeeze(uint8_t* out, size_t len);
    std::vector<uint8_t> squeeze(size_t len);

    uint64_t squeeze_u64();
    // Next `bits` (1..57) of the output stream, read LSB-first.
    uint64_t squeeze_bits(unsigned bits);

private:
    void permute();
    void finalize_absorb();

    static constexpr size_t kRate = 168;  // SHAKE-128 rate in bytes
    uint64_t state_[25] = {};
    size_t absorb_pos_ = 0;
    size_t squeeze_pos_ = 0;
    bool squeezing_ = false;
    uint64_t bit_buf_ = 0;
    unsigned bit_count_ = 0;
};

std::vector<uint8_t> shake128(std::span<const uint8_t> seed, size_t out_len);

}  // namespace hhekit::xof

#endif  // HHEKIT_XOF_HPP

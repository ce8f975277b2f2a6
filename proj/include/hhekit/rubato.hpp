// SPDX-License-Identifier: Apache-2.0
#ifndef HHEKIT_RUBATO_HPP
#define HHEKIT_RUBATO_HPP

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "hhekit/field.hpp"

namespace hhekit::rubato {

enum class Preset { k128S, k128M, k128L };

struct Params {
    Preset preset = Preset::k128S;
    unsigned lambda = 128;  // security bits
    unsigned v = 4;         // block side
    unsigned n = 16;        // v*v state words
    unsigned l = 12;        // keystream words per block
    unsigned log_t = 26;
    unsigned rounds = 5;
    field::RubatoModulus t;
    std::vector<uint64_t> m0;  // first column of the circulant mixing matrix

    static Params get(Preset p);
    static Params parse(const std::string& name);  // "128S" | "128M" | "128L"
};

using State = std::vector<uint64_t>;  // n residues, row-major v x v

struct RoundConstants {
    std::vector<State> rc;  // rounds+1 vectors of n words, each in [1, t)
};

// Deterministic constants from SHAKE-128 over nonce || LE64(counter); candidates
// are ceil(log t)-bit little-endian chunks, rejection drops 0 and values >= t.
RoundConstants derive_round_constants(std::span<const uint8_t> nonce, uint64_t counter,
                                      const Params& params);

// out[j] = x[j] + key[j]*rc[j] mod t
State ark(const State& x, const State& key, const State& rc, const Params& params);
// y[0] = x[0]; y[i] = x[i] + x[i-1]^2 mod t (original x, not updated values)
State feistel(const State& x, const Params& params);
// Each column (resp. row) vector replaced by M_v * vector over Z_t.
State mix_columns(const State& x, const Params& params);
State mix_rows(const State& x, const Params& params);

// l keystream words for one block. Structure: initial ark with rc[0], then
// rounds x (feistel, mix_rows, mix_columns, ark with rc[i]), then truncation
// to the first l words. with_noise adds the optional rounded-Gaussian mask
// drawn from the same nonce stream (off by default so runs are bit-stable).
std::vector<uint64_t> keystream(const State& key, std::span<const uint8_t> nonce, uint64_t counter,
                                const Params& params, bool with_noise = false);

// n key words derived from arbitrary key material by XOF rejection sampling.
State derive_key(std::span<const uint8_t> key_material, const Params& params);

// c[j] = encode_t(m[j]) + ks[j] mod t with encode_t(x) = round(x * 2^scale_bits)
// mapped into [0, t). Requires |m| <= l and |round(m*scale)| < t/2.
std::vector<uint64_t> se_encrypt(std::span<const double> msg, const State& key,
                                 std::span<const uint8_t> nonce, uint64_t counter,
                                 unsigned se_scale_bits, const Params& params);
std::vector<double> se_decrypt(std::span<const uint64_t> words, const State& key,
                               std::span<const uint8_t> nonce, uint64_t counter,
                               unsigned se_scale_bits, const Params& params);

}  // namespace hhekit::rubato

#endif  // HHEKIT_RUBATO_HPP

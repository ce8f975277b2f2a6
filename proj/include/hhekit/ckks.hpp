// SPDX-License-Identifier: Apache-2.0
#ifndef HHEKIT_CKKS_HPP
#define HHEKIT_CKKS_HPP

#include <complex>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <vector>

#include "hhekit/field.hpp"
#include "hhekit/transforms.hpp"

namespace hhekit::ckks {

struct EncodingParams {
    uint64_t n = 8192;         // ring degree
    size_t slots = 4096;       // message slot count L_m <= N/2
    unsigned scale_bits = 54;  // scale = 2^scale_bits, the nominal RNS base
    field::RnsBasis basis = field::RnsBasis::standard(3);
};

// One polynomial per RNS basis, all sharing a domain.
struct Plaintext {
    std::vector<transforms::Polynomial> rns;
};

struct Ciphertext {
    std::vector<transforms::Polynomial> ct0;
    std::vector<transforms::Polynomial> ct1;
    transforms::Domain domain = transforms::Domain::ntt;
    size_t level() const { return ct0.empty() ? 0 : ct0.size() - 1; }
};

struct KeyMaterial {
    std::vector<uint8_t> seed;
    std::vector<transforms::Polynomial> sk;   // ntt domain, per basis
    std::vector<transforms::Polynomial> pk0;  // ntt domain, per basis
    std::vector<transforms::Polynomial> pk1;
    // Signed secret/error vectors kept for noise-budget checks.
    std::vector<int> sk_signed;
};

// Explicit encryption randomness; zero() gives the degenerate sampler where
// ct = (pt, 0) exactly.
struct EncryptionRandomness {
    std::vector<int> v, e0, e1;
    static EncryptionRandomness zero(size_t n);
    static EncryptionRandomness from_seed(std::span<const uint8_t> seed, size_t n);
};

class Context {
public:
    explicit Context(EncodingParams params);

    const EncodingParams& params() const { return params_; }
    size_t basis_count() const { return params_.basis.primes.size(); }
    const field::PrimeSpec& prime(size_t i) const { return params_.basis.primes.at(i); }
    const transforms::NttTable& ntt_table(size_t basis) const;
    const transforms::FftTable& fft_table(size_t slots) const;  // cached per slot count
    unsigned coeff_shift() const { return params_.scale_bits - transforms::kFracBits; }

private:
    EncodingParams params_;
    std::vector<transforms::NttTable> ntt_tables_;
    // Lazily built per slot count; guarded so concurrent encode/decode is safe.
    mutable std::mutex fft_mutex_;
    mutable std::map<size_t, std::shared_ptr<transforms::FftTable>> fft_tables_;
};

// Packs msg (length <= slots) via the conjugate-symmetric embedding, scales by
// 2^scale_bits, rounds, and resizes into every basis. Coefficient domain.
Plaintext encode(std::span<const std::complex<double>> msg, const Context& ctx);
// Inverse of encode from basis 0; returns message_len slots (default: params slots).
std::vector<std::complex<double>> decode(const Plaintext& pt, const Context& ctx,
                                         size_t message_len = 0);

KeyMaterial keygen(std::span<const uint8_t> seed, const Context& ctx);

Ciphertext encrypt(const Plaintext& pt, const KeyMaterial& keys, const Context& ctx,
                   const EncryptionRandomness& rnd);
Ciphertext encrypt(const Plaintext& pt, const KeyMaterial& keys, const Context& ctx,
                   std::span<const uint8_t> randomness_seed);

// ct0 + ct1*sk over basis 0 only, returned in coefficient domain.
Plaintext decrypt(const Ciphertext& ct, const KeyMaterial& keys, const Context& ctx);

// Serialized form: magic, version, domain, N, basis count, q list, then
// per-basis ct0 || ct1 coefficients as 64-bit little-endian words.
void write_ciphertext(std::ostream& os, const Ciphertext& ct, const Context& ctx);
Ciphertext read_ciphertext(std::istream& is, const Context& ctx);

void write_keyfile(std::ostream& os, const KeyMaterial& keys, const Context& ctx);
KeyMaterial read_keyfile(std::istream& is, const Context& ctx);

}  // namespace hhekit::ckks

#endif  // HHEKIT_CKKS_HPP

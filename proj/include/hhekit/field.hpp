// SPDX-License-Identifier: Apache-2.0
#ifndef HHEKIT_FIELD_HPP
#define HHEKIT_FIELD_HPP

#include <cstdint>
#include <utility>
#include <vector>

namespace hhekit::field {

using u128 = unsigned __int128;

// An NTT-friendly prime q = 2^k - 2N*bnd + 1 together with the constants of
// its shift-add Barrett reduction: mu = floor(2^(2k)/q) = 2^k + delta - 1.
struct PrimeSpec {
    unsigned k = 0;            // bit width of q, k <= 54
    uint64_t ring_degree = 0;  // N, power of two
    uint64_t bnd = 0;          // small positive factor, bnd <= 2^10 - 1
    uint64_t q = 0;
    uint64_t delta = 0;
    uint64_t mu = 0;
    uint32_t delta_prime = 0;   // delta >> 12 when the low 12 bits are zero
    bool delta_aligned = false; // true iff delta % 2^12 == 0

    // Builds the spec and verifies every invariant (primality, mu/delta
    // identities, the width-1 interval). Throws ParameterError on violation.
    static PrimeSpec make(unsigned k, uint64_t ring_degree, uint64_t bnd);
    // Reconstructs (k, bnd) from a prime value known to be in the format.
    static PrimeSpec from_q(uint64_t q, uint64_t ring_degree);
};

// The interval (delta_low/q, delta_high/q) that pins delta; both bounds are
// returned as exact integer numerators over the common denominator q.
struct DeltaInterval {
    u128 lower_num;  // (bnd*2N - 1) * 2^k
    u128 upper_num;  // bnd*2N*(2^k - 1) + 1
    uint64_t denom;  // q
};

DeltaInterval delta_interval(unsigned k, uint64_t ring_degree, uint64_t bnd);

// (delta, mu) for q = 2^k - 2N*bnd + 1; requires q > 0.
std::pair<uint64_t, uint64_t> compute_delta(unsigned k, uint64_t ring_degree, uint64_t bnd);

// Deterministic Miller-Rabin, exact for all 64-bit inputs.
bool is_prime_u64(uint64_t n);

// All primes of the format with bnd in [1, 2^bnd_bits - 1], ascending bnd.
std::vector<PrimeSpec> find_rns_primes(unsigned k, uint64_t ring_degree, unsigned bnd_bits);

// x mod q for x < 2^(2k), computed with the shift-add decomposition of the
// two Barrett multiplies (by mu via delta, by q via bnd). At most two
// conditional subtractions at the end.
uint64_t barrett_reduce(u128 x, const PrimeSpec& spec);

uint64_t mod_add(uint64_t a, uint64_t b, const PrimeSpec& spec);
uint64_t mod_sub(uint64_t a, uint64_t b, const PrimeSpec& spec);
uint64_t mod_mul(uint64_t a, uint64_t b, const PrimeSpec& spec);
uint64_t mod_pow(uint64_t base, uint64_t exp, const PrimeSpec& spec);
uint64_t mod_inv(uint64_t a, const PrimeSpec& spec);
// Maps a signed value into [0, q).
uint64_t mod_from_signed(int64_t v, const PrimeSpec& spec);
// Centers a residue into (-q/2, q/2].
int64_t mod_to_signed(uint64_t v, const PrimeSpec& spec);

// Exact 54x54 -> 108 bit product assembled from three half-width partial
// multiplications (Karatsuba split at 27 bits).
u128 wide_mul_karatsuba(uint64_t a, uint64_t b);

// An ordered RNS basis of format primes, all within 2^-eta of the base scale.
struct RnsBasis {
    std::vector<PrimeSpec> primes;
    unsigned eta = 26;
    double base_scale = 0.0;  // nominal base q as a real scale

    size_t level_count() const { return primes.size(); }
    // levels primes at k=54, N=8192, smallest bnd first.
    static RnsBasis standard(size_t levels = 3);
};

// Prime modulus for the stream-cipher field Z_t, t < 2^26, with its own
// Barrett constants. The chosen moduli are themselves format primes so the
// same reduction path serves both fields.
struct RubatoModulus {
    PrimeSpec spec;
    uint64_t t() const { return spec.q; }
    unsigned log_t() const { return spec.k; }
};

}  // namespace hhekit::field

#endif  // HHEKIT_FIELD_HPP

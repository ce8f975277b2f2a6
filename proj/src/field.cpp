// SPDX-License-Identifier: Apache-2.0
#include "hhekit/field.hpp"

#include <bit>
#include <string>

#include "hhekit/errors.hpp"
#include "hhekit/instrument.hpp"

namespace hhekit::field {

namespace {

uint64_t pow_mod_u64(uint64_t base, uint64_t exp, uint64_t m) {
    u128 result = 1;
    u128 b = base % m;
    while (exp > 0) {
        if (exp & 1) result = result * b % m;
        b = b * b % m;
        exp >>= 1;
    }
    return static_cast<uint64_t>(result);
}

void check_format_params(unsigned k, uint64_t ring_degree) {
    if (k < 2 || k > 54) throw ParameterError("k must be in [2, 54]");
    if (ring_degree == 0 || !std::has_single_bit(ring_degree))
        throw ParameterError("ring degree must be a power of two");
}

}  // namespace

bool is_prime_u64(uint64_t n) {
    if (n < 2) return false;
    for (uint64_t p : {2ULL, 3ULL, 5ULL, 7ULL, 11ULL, 13ULL, 17ULL, 19ULL, 23ULL, 29ULL, 31ULL, 37ULL}) {
        if (n % p == 0) return n == p;
    }
    uint64_t d = n - 1;
    int r = std::countr_zero(d);
    d >>= r;
    // This witness set decides primality for every n < 2^64.
    for (uint64_t a : {2ULL, 3ULL, 5ULL, 7ULL, 11ULL, 13ULL, 17ULL, 19ULL, 23ULL, 29ULL, 31ULL, 37ULL}) {
        uint64_t x = pow_mod_u64(a, d, n);
        if (x == 1 || x == n - 1) continue;
        bool composite = true;
        for (int i = 1; i < r; ++i) {
            x = static_cast<uint64_t>(u128(x) * x % n);
            if (x == n - 1) {
                composite = false;
                break;
            }
        }
        if (composite) return false;
    }
    return true;
}

DeltaInterval delta_interval(unsigned k, uint64_t ring_degree, uint64_t bnd) {
    check_format_params(k, ring_degree);
    u128 two_n_bnd = u128(2) * ring_degree * bnd;
    u128 pow_k = u128(1) << k;
    if (two_n_bnd + 1 > pow_k) throw ParameterError("q = 2^k - 2N*bnd + 1 is not positive");
    uint64_t q = static_cast<uint64_t>(pow_k - two_n_bnd + 1);
    return DeltaInterval{
        (two_n_bnd - 1) << k,
        two_n_bnd * (pow_k - 1) + 1,
        q,
    };
}

std::pair<uint64_t, uint64_t> compute_delta(unsigned k, uint64_t ring_degree, uint64_t bnd) {
    DeltaInterval iv = delta_interval(k, ring_degree, bnd);
    // The open interval (lower/q, upper/q) has rational width exactly 1,
    // so it contains a single integer: floor(upper_num / q) when q does not
    // divide upper_num, which the identity mu = floor(2^2k / q) guarantees.
    u128 delta = iv.lower_num / iv.denom + 1;
    u128 mu = delta + (u128(1) << k) - 1;
    // Cross-check against the direct floor division.
    u128 mu_direct = (u128(1) << (2 * k)) / iv.denom;
    if (mu != mu_direct)
        throw ParameterError("delta interval disagrees with floor(2^2k/q)");
    return {static_cast<uint64_t>(delta), static_cast<uint64_t>(mu)};
}

PrimeSpec PrimeSpec::make(unsigned k, uint64_t ring_degree, uint64_t bnd) {
    check_format_params(k, ring_degree);
    if (bnd == 0 || bnd > 1023) throw ParameterError("bnd must be in [1, 2^10 - 1]");
    u128 pow_k = u128(1) << k;
    u128 two_n_bnd = u128(2) * ring_degree * bnd;
    if (two_n_bnd + 1 > pow_k) throw ParameterError("q is not positive");
    uint64_t q = static_cast<uint64_t>(pow_k - two_n_bnd + 1);
    if (!is_prime_u64(q)) throw ParameterError("q = " + std::to_string(q) + " is not prime");

    auto [delta, mu] = compute_delta(k, ring_degree, bnd);

    PrimeSpec spec;
    spec.k = k;
    spec.ring_degree = ring_degree;
    spec.bnd = bnd;
    spec.q = q;
    spec.delta = delta;
    spec.mu = mu;
    spec.delta_aligned = (delta & 0xfffULL) == 0;
    spec.delta_prime = spec.delta_aligned ? static_cast<uint32_t>(delta >> 12) : 0;

    // mu bracketing: q*mu < 2^2k and q*(mu+1) > 2^2k.
    u128 two_2k = u128(1) << (2 * k);
    if (!(u128(q) * mu < two_2k && u128(q) * (mu + 1) > two_2k))
        throw ParameterError("mu bracketing failed");
    if (q % (2 * ring_degree) != 1)
        throw ParameterError("q != 1 mod 2N");
    return spec;
}

PrimeSpec PrimeSpec::from_q(uint64_t q, uint64_t ring_degree) {
    if (q < 2) throw ParameterError("q too small");
    unsigned k = 64 - std::countl_zero(q);
    u128 pow_k = u128(1) << k;
    u128 gap = pow_k + 1 - q;
    uint64_t two_n = 2 * ring_degree;
    if (gap % two_n != 0) throw ParameterError("q does not match the 2^k - 2N*bnd + 1 format");
    return make(k, ring_degree, static_cast<uint64_t>(gap / two_n));
}

std::vector<PrimeSpec> find_rns_primes(unsigned k, uint64_t ring_degree, unsigned bnd_bits) {
    check_format_params(k, ring_degree);
    if (bnd_bits < 1 || bnd_bits > 10) throw ParameterError("bnd_bits must be in [1, 10]");
    std::vector<PrimeSpec> result;
    uint64_t bnd_max = (uint64_t(1) << bnd_bits) - 1;
    for (uint64_t bnd = 1; bnd <= bnd_max; ++bnd) {
        u128 two_n_bnd = u128(2) * ring_degree * bnd;
        if (two_n_bnd + 1 > (u128(1) << k)) break;
        uint64_t q = static_cast<uint64_t>((u128(1) << k) - two_n_bnd + 1);
        if (is_prime_u64(q)) result.push_back(PrimeSpec::make(k, ring_degree, bnd));
    }
    return result;
}

uint64_t barrett_reduce(u128 x, const PrimeSpec& spec) {
    if (spec.k < 64 && x >> (2 * spec.k))
        throw ContractError("barrett_reduce operand exceeds 2^2k");
    unsigned k = spec.k;
    u128 x1 = x >> k;
    // x1 * mu with mu = 2^k + delta - 1 decomposed into shift, delta-multiply, subtract.
    u128 y = (x1 << k) + x1 * spec.delta - x1;
    u128 s = y >> k;
    // s * q with q = 2^k - 2N*bnd + 1 decomposed the same way.
    u128 sq = (s << k) + s - s * (u128(2) * spec.ring_degree * spec.bnd);
    u128 r = x - sq;
    uint64_t corrections = 0;
    while (r >= spec.q) {
        r -= spec.q;
        ++corrections;
    }
    if (corrections > 2)
        throw SimulationError("barrett correction bound exceeded");
    auto& ctr = instrument::counters();
    if (corrections > ctr.barrett_corrections_max) ctr.barrett_corrections_max = corrections;
    return static_cast<uint64_t>(r);
}

uint64_t mod_add(uint64_t a, uint64_t b, const PrimeSpec& spec) {
    if (a >= spec.q || b >= spec.q) throw ContractError("mod_add operand out of range");
    uint64_t s = a + b;
    return s >= spec.q ? s - spec.q : s;
}

uint64_t mod_sub(uint64_t a, uint64_t b, const PrimeSpec& spec) {
    if (a >= spec.q || b >= spec.q) throw ContractError("mod_sub operand out of range");
    return a >= b ? a - b : a + spec.q - b;
}

u128 wide_mul_karatsuba(uint64_t a, uint64_t b) {
    constexpr unsigned half = 27;
    constexpr uint64_t mask = (uint64_t(1) << half) - 1;
    uint64_t a0 = a & mask, a1 = a >> half;
    uint64_t b0 = b & mask, b1 = b >> half;
    uint64_t p0 = a0 * b0;
    uint64_t p2 = a1 * b1;
    uint64_t pm = (a0 + a1) * (b0 + b1);
    instrument::counters().wide_mul_partials += 3;
    uint64_t p1 = pm - p0 - p2;
    return (u128(p2) << (2 * half)) + (u128(p1) << half) + p0;
}

uint64_t mod_mul(uint64_t a, uint64_t b, const PrimeSpec& spec) {
    if (a >= spec.q || b >= spec.q) throw ContractError("mod_mul operand out of range");
    return barrett_reduce(wide_mul_karatsuba(a, b), spec);
}

uint64_t mod_pow(uint64_t base, uint64_t exp, const PrimeSpec& spec) {
    uint64_t result = 1;
    uint64_t b = base % spec.q;
    while (exp > 0) {
        if (exp & 1) result = mod_mul(result, b, spec);
        b = mod_mul(b, b, spec);
        exp >>= 1;
    }
    return result;
}

uint64_t mod_inv(uint64_t a, const PrimeSpec& spec) {
    if (a == 0 || a >= spec.q) throw ContractError("mod_inv operand out of range");
    return mod_pow(a, spec.q - 2, spec);
}

uint64_t mod_from_signed(int64_t v, const PrimeSpec& spec) {
    int64_t r = v % static_cast<int64_t>(spec.q);
    if (r < 0) r += static_cast<int64_t>(spec.q);
    return static_cast<uint64_t>(r);
}

int64_t mod_to_signed(uint64_t v, const PrimeSpec& spec) {
    if (v >= spec.q) throw ContractError("residue out of range");
    return v > spec.q / 2 ? static_cast<int64_t>(v) - static_cast<int64_t>(spec.q)
                          : static_cast<int64_t>(v);
}

RnsBasis RnsBasis::standard(size_t levels) {
    auto primes = find_rns_primes(54, 8192, 10);
    if (primes.size() < levels) throw ParameterError("not enough format primes for basis");
    RnsBasis basis;
    basis.primes.assign(primes.begin(), primes.begin() + levels);
    basis.eta = 26;
    basis.base_scale = 18014398509481984.0;  // 2^54
    return basis;
}

}  // namespace hhekit::field

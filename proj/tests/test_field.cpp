// SPDX-License-Identifier: Apache-2.0
#include <cstdint>
#include <random>

#include "doctest.h"
#include "hhekit/errors.hpp"
#include "hhekit/field.hpp"
#include "hhekit/instrument.hpp"

using namespace hhekit;
using field::PrimeSpec;
using field::u128;

namespace {

// Trial-division oracle, independent of the Miller-Rabin path.
bool is_prime_trial(uint64_t n) {
    if (n < 2) return false;
    for (uint64_t d = 2; d * d <= n; ++d)
        if (n % d == 0) return false;
    return true;
}

PrimeSpec toy_spec() { return PrimeSpec::make(8, 4, 2); }  // q = 241

}  // namespace

TEST_CASE("compute_delta matches the floor-division oracle") {
    // Worked example: k=8, 2N=8, bnd=1 -> q=249 (composite, but delta is defined).
    auto [delta, mu] = field::compute_delta(8, 4, 1);
    CHECK(mu == 65536 / 249);
    CHECK(mu == 263);
    CHECK(delta == 8);

    std::mt19937_64 gen(7);
    for (int trial = 0; trial < 1000; ++trial) {
        unsigned k = 4 + gen() % 51;  // [4, 54]
        uint64_t n = uint64_t(1) << (1 + gen() % 5);
        uint64_t max_bnd = ((uint64_t(1) << k) - 2) / (2 * n);
        if (max_bnd == 0) continue;
        uint64_t bnd = 1 + gen() % std::min<uint64_t>(max_bnd, 1023);
        uint64_t q = (uint64_t(1) << k) - 2 * n * bnd + 1;
        auto [d, m] = field::compute_delta(k, n, bnd);
        u128 mu_oracle = (u128(1) << (2 * k)) / q;
        CHECK(m == static_cast<uint64_t>(mu_oracle));
        CHECK(d == static_cast<uint64_t>(mu_oracle) - (uint64_t(1) << k) + 1);
    }
}

TEST_CASE("delta interval has rational width exactly one") {
    std::mt19937_64 gen(11);
    for (int trial = 0; trial < 1000; ++trial) {
        unsigned k = 4 + gen() % 51;
        uint64_t n = uint64_t(1) << (1 + gen() % 5);
        uint64_t max_bnd = ((uint64_t(1) << k) - 2) / (2 * n);
        if (max_bnd == 0) continue;
        uint64_t bnd = 1 + gen() % std::min<uint64_t>(max_bnd, 1023);
        auto iv = field::delta_interval(k, n, bnd);
        CHECK(iv.upper_num - iv.lower_num == iv.denom);  // (d2 - d1) * q == q
        // delta is the unique integer strictly inside (lower/q, upper/q)
        auto [d, mu] = field::compute_delta(k, n, bnd);
        CHECK(u128(d) * iv.denom > iv.lower_num);
        CHECK(u128(d) * iv.denom < iv.upper_num);
    }
}

TEST_CASE("find_rns_primes agrees with the trial-division scan") {
    // k=8, N=4: q = 257 - 8*bnd, bnd in [1,7]; 249 is composite so bnd=1 is excluded.
    auto primes = field::find_rns_primes(8, 4, 3);
    std::vector<uint64_t> got_bnd;
    for (const auto& p : primes) got_bnd.push_back(p.bnd);

    std::vector<uint64_t> expect;
    for (uint64_t bnd = 1; bnd <= 7; ++bnd) {
        uint64_t q = 257 - 8 * bnd;
        if (is_prime_trial(q)) expect.push_back(bnd);
    }
    CHECK(got_bnd == expect);
    CHECK(std::find(got_bnd.begin(), got_bnd.end(), 1) == got_bnd.end());

    for (const auto& p : primes) {
        CHECK(p.q == 257 - 8 * p.bnd);
        CHECK(p.q % 8 == 1);
    }
}

TEST_CASE("find_rns_primes full scan at k=12 matches the oracle set") {
    auto primes = field::find_rns_primes(12, 8, 7);
    std::vector<uint64_t> got;
    for (const auto& p : primes) got.push_back(p.bnd);
    std::vector<uint64_t> expect;
    for (uint64_t bnd = 1; bnd <= 127; ++bnd) {
        uint64_t q = 4097 - 16 * bnd;
        if (is_prime_trial(q)) expect.push_back(bnd);
    }
    CHECK(got == expect);
}

TEST_CASE("find_rns_primes rejects bad parameters") {
    CHECK_THROWS_AS(field::find_rns_primes(1, 8192, 10), ParameterError);
    CHECK_THROWS_AS(field::find_rns_primes(55, 8192, 10), ParameterError);
    CHECK_THROWS_AS(field::find_rns_primes(54, 8191, 10), ParameterError);
    CHECK_THROWS_AS(field::find_rns_primes(54, 8192, 11), ParameterError);
}

TEST_CASE("barrett_reduce toy cases") {
    PrimeSpec s249;  // q = 249 is composite; build the spec fields by hand
    s249.k = 8;
    s249.ring_degree = 4;
    s249.bnd = 1;
    s249.q = 249;
    s249.delta = 8;
    s249.mu = 263;

    CHECK(field::barrett_reduce(0, s249) == 0);
    CHECK(field::barrett_reduce(42, s249) == 42);
    CHECK(field::barrett_reduce(1000, s249) == 4);  // 1000 - 4*249

    auto spec = toy_spec();
    CHECK(field::barrett_reduce(0, spec) == 0);
    for (uint64_t x = 0; x < spec.q; ++x) CHECK(field::barrett_reduce(x, spec) == x);
    CHECK_THROWS_AS(field::barrett_reduce(u128(1) << 16, spec), ContractError);
}

TEST_CASE("barrett_reduce exhaustive against division, k<=12") {
    auto primes = field::find_rns_primes(12, 8, 7);
    REQUIRE(!primes.empty());
    const auto spec = primes.front();
    instrument::reset();
    for (uint64_t x = 0; x < (uint64_t(1) << 24); ++x) {
        uint64_t want = x % spec.q;
        uint64_t got = field::barrett_reduce(x, spec);
        if (got != want) {
            REQUIRE(got == want);  // only report the first mismatch
        }
    }
    CHECK(instrument::counters().barrett_corrections_max <= 2);
}

TEST_CASE("barrett_reduce randomized at k=54") {
    auto basis = field::RnsBasis::standard(3);
    std::mt19937_64 gen(3);
    for (const auto& spec : basis.primes) {
        for (int i = 0; i < 20000; ++i) {
            u128 x = (u128(gen()) << 64 | gen()) % (u128(1) << 108);
            uint64_t want = static_cast<uint64_t>(x % spec.q);
            CHECK(field::barrett_reduce(x, spec) == want);
        }
    }
}

TEST_CASE("modular ops against the wide-division oracle") {
    auto spec = field::RnsBasis::standard(1).primes[0];
    std::mt19937_64 gen(13);
    CHECK(field::mod_mul(12345, 1, spec) == 12345);
    CHECK(field::mod_sub(0, 17, spec) == spec.q - 17);
    for (int i = 0; i < 100000; ++i) {
        uint64_t a = gen() % spec.q;
        uint64_t b = gen() % spec.q;
        CHECK(field::mod_mul(a, b, spec) == static_cast<uint64_t>(u128(a) * b % spec.q));
        CHECK(field::mod_add(a, b, spec) == (a + b) % spec.q);
        CHECK(field::mod_sub(a, b, spec) == (a + spec.q - b) % spec.q);
    }
    CHECK_THROWS_AS(field::mod_add(spec.q, 0, spec), ContractError);
    CHECK_THROWS_AS(field::mod_mul(spec.q, 0, spec), ContractError);
}

TEST_CASE("wide_mul_karatsuba equals schoolbook and uses three partials") {
    CHECK(field::wide_mul_karatsuba(0, 12345) == 0);
    CHECK(field::wide_mul_karatsuba(98765, 1) == 98765);

    instrument::reset();
    field::wide_mul_karatsuba(3, 5);
    CHECK(instrument::counters().wide_mul_partials == 3);

    std::mt19937_64 gen(17);
    for (int i = 0; i < 100000; ++i) {
        uint64_t a = gen() & ((uint64_t(1) << 54) - 1);
        uint64_t b = gen() & ((uint64_t(1) << 54) - 1);
        CHECK(field::wide_mul_karatsuba(a, b) == u128(a) * b);
    }
}

TEST_CASE("standard RNS basis respects the closeness bound") {
    auto basis = field::RnsBasis::standard(3);
    REQUIRE(basis.primes.size() == 3);
    double tol = std::ldexp(1.0, -int(basis.eta));
    for (const auto& p : basis.primes) {
        double ratio = basis.base_scale / static_cast<double>(p.q);
        CHECK(ratio > 1.0 - tol);
        CHECK(ratio < 1.0 + tol);
    }
    for (size_t i = 0; i < basis.primes.size(); ++i)
        for (size_t j = i + 1; j < basis.primes.size(); ++j)
            CHECK(basis.primes[i].q != basis.primes[j].q);
}

TEST_CASE("PrimeSpec::from_q reconstructs the format") {
    auto spec = PrimeSpec::from_q(67104769, 2048);
    CHECK(spec.k == 26);
    CHECK(spec.bnd == 1);
    auto spec2 = PrimeSpec::from_q(33550337, 2048);
    CHECK(spec2.k == 25);
    CHECK(spec2.bnd == 1);
}

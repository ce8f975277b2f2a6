// SPDX-License-Identifier: Apache-2.0
#include <complex>
#include <random>
#include <vector>

#include "doctest.h"
#include "hhekit/errors.hpp"
#include "hhekit/field.hpp"
#include "hhekit/transforms.hpp"

using namespace hhekit;
using transforms::Domain;
using transforms::FixedComplex;
using transforms::Polynomial;

namespace {

// O(N^2) schoolbook negacyclic convolution, the oracle for the NTT path.
std::vector<uint64_t> negacyclic_schoolbook(const std::vector<uint64_t>& a,
                                            const std::vector<uint64_t>& b,
                                            const field::PrimeSpec& spec) {
    size_t n = a.size();
    std::vector<field::u128> pos(n, 0), neg(n, 0);
    for (size_t i = 0; i < n; ++i) {
        if (a[i] == 0) continue;
        for (size_t j = 0; j < n; ++j) {
            field::u128 p = field::u128(a[i]) * b[j];
            size_t k = i + j;
            if (k < n)
                pos[k] += p % spec.q;
            else
                neg[k - n] += p % spec.q;
        }
    }
    std::vector<uint64_t> out(n);
    for (size_t k = 0; k < n; ++k) {
        uint64_t p = static_cast<uint64_t>(pos[k] % spec.q);
        uint64_t m = static_cast<uint64_t>(neg[k] % spec.q);
        out[k] = field::mod_sub(p, m, spec);
    }
    return out;
}

Polynomial random_poly(size_t n, const field::PrimeSpec& spec, std::mt19937_64& gen) {
    Polynomial p = Polynomial::zero(n);
    for (auto& c : p.coeffs) c = gen() % spec.q;
    return p;
}

std::vector<uint64_t> ntt_mul(const Polynomial& a, const Polynomial& b,
                              const transforms::NttTable& table) {
    auto fa = transforms::ntt(a, table);
    auto fb = transforms::ntt(b, table);
    auto prod = transforms::pointwise_mul(fa, fb, table.spec);
    return transforms::intt(prod, table).coeffs;
}

// Double-precision references of both transform variants.
std::vector<std::complex<double>> fwd_reference(const std::vector<std::complex<double>>& in,
                                                const transforms::FftTable& t, bool embed) {
    auto v = in;
    size_t n = v.size();
    unsigned bits = 0;
    while ((size_t(1) << bits) < n) ++bits;
    for (size_t i = 0; i < n; ++i) {
        size_t j = transforms::bit_reverse(i, bits);
        if (i < j) std::swap(v[i], v[j]);
    }
    for (size_t len = 2; len <= n; len <<= 1) {
        size_t lenh = len >> 1, lenq = len << 2;
        for (size_t i = 0; i < n; i += len) {
            for (size_t j = 0; j < lenh; ++j) {
                size_t orbit = embed ? t.rot[j] % lenq : (4 * j) % lenq;
                double ang = 2.0 * M_PI * double(orbit) / double(lenq);
                std::complex<double> w(std::cos(ang), std::sin(ang));
                auto u = v[i + j];
                auto x = v[i + j + lenh] * w;
                v[i + j] = u + x;
                v[i + j + lenh] = u - x;
            }
        }
    }
    return v;
}

std::vector<std::complex<double>> inv_reference(const std::vector<std::complex<double>>& in,
                                                const transforms::FftTable& t, bool embed) {
    auto v = in;
    size_t n = v.size();
    for (size_t len = n; len >= 2; len >>= 1) {
        size_t lenh = len >> 1, lenq = len << 2;
        for (size_t i = 0; i < n; i += len) {
            for (size_t j = 0; j < lenh; ++j) {
                size_t orbit = embed ? t.rot[j] % lenq : (4 * j) % lenq;
                double ang = 2.0 * M_PI * double((lenq - orbit) % lenq) / double(lenq);
                std::complex<double> w(std::cos(ang), std::sin(ang));
                auto u = v[i + j] + v[i + j + lenh];
                auto d = (v[i + j] - v[i + j + lenh]) * w;
                v[i + j] = u * 0.5;
                v[i + j + lenh] = d * 0.5;
            }
        }
    }
    unsigned bits = 0;
    while ((size_t(1) << bits) < n) ++bits;
    for (size_t i = 0; i < n; ++i) {
        size_t j = transforms::bit_reverse(i, bits);
        if (i < j) std::swap(v[i], v[j]);
    }
    return v;
}

std::vector<FixedComplex> to_fixed(const std::vector<std::complex<double>>& v) {
    std::vector<FixedComplex> out(v.size());
    for (size_t i = 0; i < v.size(); ++i) out[i] = FixedComplex::from_double(v[i]);
    return out;
}

double max_err(const std::vector<FixedComplex>& got, const std::vector<std::complex<double>>& want) {
    double m = 0;
    for (size_t i = 0; i < got.size(); ++i) m = std::max(m, std::abs(got[i].to_double() - want[i]));
    return m;
}

}  // namespace

TEST_CASE("ntt tables are self-validating") {
    auto spec = field::find_rns_primes(12, 8, 7).front();
    auto table = transforms::NttTable::make(spec, 8);
    CHECK(field::mod_pow(table.psi, 8, spec) == spec.q - 1);   // psi^n = -1
    CHECK(field::mod_pow(table.psi, 16, spec) == 1);           // psi^2n = 1

    auto big = field::RnsBasis::standard(1).primes[0];
    auto bt = transforms::NttTable::make(big, 8192);
    CHECK(field::mod_pow(bt.psi, 8192, big) == big.q - 1);
}

TEST_CASE("ntt impulse and round trip") {
    auto spec = field::find_rns_primes(12, 8, 7).front();
    auto table = transforms::NttTable::make(spec, 8);

    Polynomial delta0 = Polynomial::zero(8);
    delta0.coeffs[0] = 1;
    auto f = transforms::ntt(delta0, table);
    for (auto c : f.coeffs) CHECK(c == 1);
    CHECK(f.domain == Domain::ntt);

    std::mt19937_64 gen(5);
    for (int trial = 0; trial < 50; ++trial) {
        auto p = random_poly(8, spec, gen);
        auto back = transforms::intt(transforms::ntt(p, table), table);
        CHECK(back.coeffs == p.coeffs);
    }
    CHECK_THROWS_AS(transforms::ntt(f, table), StateError);
}

TEST_CASE("convolution theorem, exhaustive monomials at n=8") {
    auto spec = field::find_rns_primes(12, 8, 7).front();
    auto table = transforms::NttTable::make(spec, 8);
    // Every monomial pair exercises the full negacyclic wraparound sign pattern.
    for (size_t i = 0; i < 8; ++i) {
        for (size_t j = 0; j < 8; ++j) {
            for (uint64_t ca : {uint64_t(1), uint64_t(7), spec.q - 1}) {
                Polynomial a = Polynomial::zero(8), b = Polynomial::zero(8);
                a.coeffs[i] = ca;
                b.coeffs[j] = spec.q - 3;
                CHECK(ntt_mul(a, b, table) == negacyclic_schoolbook(a.coeffs, b.coeffs, spec));
            }
        }
    }
    std::mt19937_64 gen(23);
    for (int trial = 0; trial < 200; ++trial) {
        auto a = random_poly(8, spec, gen);
        auto b = random_poly(8, spec, gen);
        CHECK(ntt_mul(a, b, table) == negacyclic_schoolbook(a.coeffs, b.coeffs, spec));
    }
}

TEST_CASE("convolution theorem randomized at n=8192") {
    auto spec = field::RnsBasis::standard(1).primes[0];
    auto table = transforms::NttTable::make(spec, 8192);
    std::mt19937_64 gen(29);
    for (int trial = 0; trial < 3; ++trial) {
        auto a = random_poly(8192, spec, gen);
        auto b = random_poly(8192, spec, gen);
        CHECK(ntt_mul(a, b, table) == negacyclic_schoolbook(a.coeffs, b.coeffs, spec));
    }
}

TEST_CASE("ntt linearity") {
    auto spec = field::find_rns_primes(12, 8, 7).front();
    auto table = transforms::NttTable::make(spec, 8);
    std::mt19937_64 gen(31);
    for (int trial = 0; trial < 50; ++trial) {
        auto a = random_poly(8, spec, gen);
        auto b = random_poly(8, spec, gen);
        uint64_t alpha = gen() % spec.q, beta = gen() % spec.q;
        Polynomial lin = Polynomial::zero(8);
        for (size_t i = 0; i < 8; ++i)
            lin.coeffs[i] = field::mod_add(field::mod_mul(alpha, a.coeffs[i], spec),
                                           field::mod_mul(beta, b.coeffs[i], spec), spec);
        auto fa = transforms::ntt(a, table), fb = transforms::ntt(b, table);
        auto flin = transforms::ntt(lin, table);
        for (size_t i = 0; i < 8; ++i) {
            uint64_t want = field::mod_add(field::mod_mul(alpha, fa.coeffs[i], spec),
                                           field::mod_mul(beta, fb.coeffs[i], spec), spec);
            CHECK(flin.coeffs[i] == want);
        }
    }
}

TEST_CASE("pointwise ops match the scalar loop") {
    auto spec = field::find_rns_primes(12, 8, 7).front();
    std::mt19937_64 gen(37);
    auto a = random_poly(64, spec, gen);
    auto b = random_poly(64, spec, gen);
    auto acc = random_poly(64, spec, gen);

    auto zero = Polynomial::zero(64);
    CHECK(transforms::pointwise_add(a, zero, spec).coeffs == a.coeffs);
    Polynomial ones = Polynomial::zero(64);
    for (auto& c : ones.coeffs) c = 1;
    CHECK(transforms::pointwise_mul(a, ones, spec).coeffs == a.coeffs);

    auto mul = transforms::pointwise_mul(a, b, spec);
    auto add = transforms::pointwise_add(a, b, spec);
    auto mac = transforms::pointwise_mac(a, b, acc, spec);
    for (size_t i = 0; i < 64; ++i) {
        CHECK(mul.coeffs[i] == field::mod_mul(a.coeffs[i], b.coeffs[i], spec));
        CHECK(add.coeffs[i] == field::mod_add(a.coeffs[i], b.coeffs[i], spec));
        CHECK(mac.coeffs[i] ==
              field::mod_add(acc.coeffs[i], field::mod_mul(a.coeffs[i], b.coeffs[i], spec), spec));
    }

    Polynomial wrong = a;
    wrong.basis_index = 1;
    CHECK_THROWS_AS(transforms::pointwise_add(a, wrong, spec), StateError);
}

TEST_CASE("fixed fft of zero is zero, dc impulse is exact") {
    auto table = transforms::FftTable::make(16);
    std::vector<FixedComplex> zero(16);
    auto z = transforms::fft(zero, table);
    for (auto& c : z) {
        CHECK(c.re == 0);
        CHECK(c.im == 0);
    }

    // Constant input c: forward transform accumulates to (L*c, 0, ..., 0).
    double c = 1.0 / 64.0;
    std::vector<FixedComplex> constant(16, FixedComplex::from_double({c, 0}));
    auto f = transforms::fft(constant, table);
    CHECK(std::abs(f[0].to_double().real() - 16 * c) < 0x1p-20);
    for (size_t i = 1; i < 16; ++i) CHECK(std::abs(f[i].to_double()) < 0x1p-20);
}

TEST_CASE("single fixed transform tracks the double reference within 2^-20 at 4096") {
    auto table = transforms::FftTable::make(4096);
    std::mt19937_64 gen(41);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);

    std::vector<std::complex<double>> slots(4096);
    for (auto& s : slots) s = {unit(gen), unit(gen)};

    // Encode direction on unit-bounded inputs stays in range by construction.
    auto coeffs = to_fixed(slots);
    transforms::embed_ifft_inplace(coeffs, table);
    auto coeffs_ref = inv_reference(slots, table, true);
    CHECK(max_err(coeffs, coeffs_ref) < 0x1p-20);

    // Decode direction: compare against the reference run on the identical
    // (already quantized) input so only the transform's own error is measured.
    std::vector<std::complex<double>> coeffs_d(coeffs.size());
    for (size_t i = 0; i < coeffs.size(); ++i) coeffs_d[i] = coeffs[i].to_double();
    // Butterfly rounding errors double in power per accumulating stage, so the
    // growing direction gets one extra bit of budget.
    auto fixed_fwd = coeffs;
    transforms::embed_fft_inplace(fixed_fwd, table);
    auto ref_fwd = fwd_reference(coeffs_d, table, true);
    CHECK(max_err(fixed_fwd, ref_fwd) < 0x1p-19);

    // Full pack/unpack loop: per-coefficient quantization spreads across
    // sqrt(n) slots, so the budget is wider but still far below 2^-12.
    double err = 0, sum = 0;
    for (size_t i = 0; i < slots.size(); ++i) {
        double e = std::abs(fixed_fwd[i].to_double() - slots[i]);
        err = std::max(err, e);
        sum += e;
    }
    CHECK(err < 0x1p-16);
    CHECK(sum / slots.size() < 0x1p-20);

    // Sanity: the double-precision reference pair is an exact inverse.
    auto fwd_ref = fwd_reference(coeffs_ref, table, true);
    for (size_t i = 0; i < 8; ++i) CHECK(std::abs(fwd_ref[i] - slots[i]) < 1e-9);
}

TEST_CASE("ifft(fft(v)) = v for admissible random v") {
    // Forward-then-inverse is the contracting direction: inverse halvings do
    // not amplify the forward rounding, so 2^-20 holds at full length.
    for (size_t n : {size_t(256), size_t(4096)}) {
        auto table = transforms::FftTable::make(n);
        std::mt19937_64 gen(43 + n);
        std::uniform_real_distribution<double> small(-0.01, 0.01);
        std::vector<std::complex<double>> v(n);
        for (auto& x : v) x = {small(gen), small(gen)};
        auto ff = transforms::fft(to_fixed(v), table);
        auto back = transforms::ifft(ff, table);
        double err = 0;
        for (size_t i = 0; i < v.size(); ++i)
            err = std::max(err, std::abs(back[i].to_double() - v[i]));
        CHECK(err < 0x1p-20);
    }
}

TEST_CASE("fft overflow raises with a stage index") {
    auto table = transforms::FftTable::make(1024);
    std::vector<FixedComplex> v(1024, FixedComplex::from_double({3.5, 0}));
    CHECK_THROWS_AS(transforms::fft_inplace(v, table), OverflowError);
    try {
        std::vector<FixedComplex> w(1024, FixedComplex::from_double({3.5, 0}));
        transforms::fft_inplace(w, table);
    } catch (const OverflowError& e) {
        CHECK(e.stage() >= 1);
    }
}

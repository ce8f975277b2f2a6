// SPDX-License-Identifier: Apache-2.0
#include "hhekit/transforms.hpp"

#include <bit>
#include <cmath>

#include "hhekit/errors.hpp"

namespace hhekit::transforms {

using field::mod_add;
using field::mod_inv;
using field::mod_mul;
using field::mod_pow;
using field::mod_sub;

size_t bit_reverse(size_t x, unsigned bits) {
    size_t r = 0;
    for (unsigned i = 0; i < bits; ++i) {
        r = (r << 1) | (x & 1);
        x >>= 1;
    }
    return r;
}

NttTable NttTable::make(const field::PrimeSpec& spec, size_t n) {
    if (n < 2 || !std::has_single_bit(n)) throw ParameterError("ntt size must be a power of two");
    if ((spec.q - 1) % (2 * n) != 0) throw ParameterError("q != 1 mod 2n, no 2n-th roots");

    NttTable t;
    t.spec = spec;
    t.n = n;

    uint64_t exp = (spec.q - 1) / (2 * n);
    for (uint64_t g = 2;; ++g) {
        uint64_t cand = mod_pow(g, exp, spec);
        if (mod_pow(cand, n, spec) == spec.q - 1) {
            t.psi = cand;
            break;
        }
        if (g > 1000) throw ParameterError("no primitive 2n-th root found");
    }

    unsigned bits = std::countr_zero(n);
    uint64_t inv_psi = mod_inv(t.psi, spec);
    t.psi_br.resize(n);
    t.inv_psi_br.resize(n);
    for (size_t i = 0; i < n; ++i) {
        size_t r = bit_reverse(i, bits);
        t.psi_br[i] = mod_pow(t.psi, r, spec);
        t.inv_psi_br[i] = mod_pow(inv_psi, r, spec);
    }
    t.n_inv = mod_inv(n % spec.q, spec);
    return t;
}

void ntt_inplace(std::span<uint64_t> a, const NttTable& table) {
    const auto& spec = table.spec;
    size_t n = table.n;
    if (a.size() != n) throw ContractError("ntt length mismatch");
    size_t t = n;
    for (size_t m = 1; m < n; m <<= 1) {
        t >>= 1;
        for (size_t i = 0; i < m; ++i) {
            uint64_t w = table.psi_br[m + i];
            size_t j1 = 2 * i * t;
            for (size_t j = j1; j < j1 + t; ++j) {
                uint64_t u = a[j];
                uint64_t v = mod_mul(a[j + t], w, spec);
                a[j] = mod_add(u, v, spec);
                a[j + t] = mod_sub(u, v, spec);
            }
        }
    }
}

void intt_inplace(std::span<uint64_t> a, const NttTable& table) {
    const auto& spec = table.spec;
    size_t n = table.n;
    if (a.size() != n) throw ContractError("intt length mismatch");
    size_t t = 1;
    for (size_t m = n; m > 1; m >>= 1) {
        size_t h = m >> 1;
        size_t j1 = 0;
        for (size_t i = 0; i < h; ++i) {
            uint64_t w = table.inv_psi_br[h + i];
            for (size_t j = j1; j < j1 + t; ++j) {
                uint64_t u = a[j];
                uint64_t v = a[j + t];
                a[j] = mod_add(u, v, spec);
                a[j + t] = mod_mul(mod_sub(u, v, spec), w, spec);
            }
            j1 += 2 * t;
        }
        t <<= 1;
    }
    for (auto& x : a) x = mod_mul(x, table.n_inv, spec);
}

Polynomial ntt(const Polynomial& p, const NttTable& table) {
    if (p.domain != Domain::coefficient) throw StateError("ntt input must be in coefficient domain");
    Polynomial out = p;
    ntt_inplace(out.coeffs, table);
    out.domain = Domain::ntt;
    return out;
}

Polynomial intt(const Polynomial& p, const NttTable& table) {
    if (p.domain != Domain::ntt) throw StateError("intt input must be in ntt domain");
    Polynomial out = p;
    intt_inplace(out.coeffs, table);
    out.domain = Domain::coefficient;
    return out;
}

namespace {
void check_pair(const Polynomial& a, const Polynomial& b) {
    if (a.domain != b.domain) throw StateError("pointwise operands in different domains");
    if (a.basis_index != b.basis_index) throw StateError("pointwise operands in different bases");
    if (a.size() != b.size()) throw ContractError("pointwise length mismatch");
}
}  // namespace

Polynomial pointwise_mul(const Polynomial& a, const Polynomial& b, const field::PrimeSpec& spec) {
    check_pair(a, b);
    Polynomial out = a;
    for (size_t i = 0; i < a.size(); ++i) out.coeffs[i] = mod_mul(a.coeffs[i], b.coeffs[i], spec);
    return out;
}

Polynomial pointwise_add(const Polynomial& a, const Polynomial& b, const field::PrimeSpec& spec) {
    check_pair(a, b);
    Polynomial out = a;
    for (size_t i = 0; i < a.size(); ++i) out.coeffs[i] = mod_add(a.coeffs[i], b.coeffs[i], spec);
    return out;
}

Polynomial pointwise_mac(const Polynomial& a, const Polynomial& b, const Polynomial& acc,
                         const field::PrimeSpec& spec) {
    check_pair(a, b);
    check_pair(a, acc);
    Polynomial out = acc;
    for (size_t i = 0; i < a.size(); ++i)
        out.coeffs[i] = mod_add(out.coeffs[i], mod_mul(a.coeffs[i], b.coeffs[i], spec), spec);
    return out;
}

// --- fixed point ---

namespace {

int64_t round_half_even(int64_t v, unsigned bits) {
    int64_t q = v >> bits;
    int64_t rem = v - (q << bits);
    int64_t half = int64_t(1) << (bits - 1);
    if (rem > half || (rem == half && (q & 1))) ++q;
    return q;
}

int32_t fx_checked(int64_t raw, int stage) {
    if (raw > kFixedMaxRaw || raw < -kFixedMaxRaw)
        throw OverflowError("fixed-point value out of 29-bit range", stage);
    return static_cast<int32_t>(raw);
}

}  // namespace

FixedComplex FixedComplex::from_double(std::complex<double> v) {
    double sre = std::round(v.real() * (1 << kFracBits));
    double sim = std::round(v.imag() * (1 << kFracBits));
    return FixedComplex{fx_checked(static_cast<int64_t>(sre), -1),
                        fx_checked(static_cast<int64_t>(sim), -1)};
}

std::complex<double> FixedComplex::to_double() const {
    return {static_cast<double>(re) / (1 << kFracBits), static_cast<double>(im) / (1 << kFracBits)};
}

FixedComplex fx_add(FixedComplex a, FixedComplex b, int stage) {
    return {fx_checked(int64_t(a.re) + b.re, stage), fx_checked(int64_t(a.im) + b.im, stage)};
}

FixedComplex fx_sub(FixedComplex a, FixedComplex b, int stage) {
    return {fx_checked(int64_t(a.re) - b.re, stage), fx_checked(int64_t(a.im) - b.im, stage)};
}

FixedComplex fx_mul(FixedComplex a, FixedComplex b, int stage) {
    int64_t re = int64_t(a.re) * b.re - int64_t(a.im) * b.im;
    int64_t im = int64_t(a.re) * b.im + int64_t(a.im) * b.re;
    return {fx_checked(round_half_even(re, kFracBits), stage),
            fx_checked(round_half_even(im, kFracBits), stage)};
}

FixedComplex fx_half(FixedComplex a) {
    return {static_cast<int32_t>(round_half_even(a.re, 1)),
            static_cast<int32_t>(round_half_even(a.im, 1))};
}

FftTable FftTable::make(size_t slots) {
    if (slots < 2 || !std::has_single_bit(slots)) throw ParameterError("slot count must be a power of two >= 2");
    FftTable t;
    t.slots = slots;
    t.m = 4 * slots;
    t.roots.resize(t.m);
    for (size_t i = 0; i < t.m; ++i) {
        double angle = 2.0 * M_PI * static_cast<double>(i) / static_cast<double>(t.m);
        t.roots[i] = FixedComplex::from_double({std::cos(angle), std::sin(angle)});
    }
    t.rot.resize(slots);
    uint64_t five = 1;
    for (size_t j = 0; j < slots; ++j) {
        t.rot[j] = static_cast<uint32_t>(five);
        five = (five * 5) % t.m;
    }
    return t;
}

namespace {
void fft_bit_reverse(std::vector<FixedComplex>& v) {
    unsigned bits = std::countr_zero(v.size());
    for (size_t i = 0; i < v.size(); ++i) {
        size_t j = bit_reverse(i, bits);
        if (i < j) std::swap(v[i], v[j]);
    }
}
}  // namespace

namespace {

// Shared butterfly core; the orbit functor maps a butterfly position j to its
// angle index within the stage granularity lenq (plain DFT: 4j; packing
// transform: 5^j mod lenq).
template <typename Orbit>
void forward_core(std::vector<FixedComplex>& v, const FftTable& table, Orbit orbit) {
    size_t n = v.size();
    if (n != table.slots) throw ContractError("fft length does not match table");
    fft_bit_reverse(v);
    int stage = 0;
    for (size_t len = 2; len <= n; len <<= 1) {
        ++stage;
        size_t lenh = len >> 1;
        size_t lenq = len << 2;
        size_t quo = table.m / lenq;
        for (size_t i = 0; i < n; i += len) {
            for (size_t j = 0; j < lenh; ++j) {
                size_t idx = orbit(j, lenq) * quo;
                FixedComplex u = v[i + j];
                FixedComplex w = fx_mul(v[i + j + lenh], table.roots[idx % table.m], stage);
                v[i + j] = fx_add(u, w, stage);
                v[i + j + lenh] = fx_sub(u, w, stage);
            }
        }
    }
}

template <typename Orbit>
void inverse_core(std::vector<FixedComplex>& v, const FftTable& table, Orbit orbit) {
    size_t n = v.size();
    if (n != table.slots) throw ContractError("ifft length does not match table");
    int stage = 0;
    for (size_t len = n; len >= 2; len >>= 1) {
        ++stage;
        size_t lenh = len >> 1;
        size_t lenq = len << 2;
        size_t quo = table.m / lenq;
        for (size_t i = 0; i < n; i += len) {
            for (size_t j = 0; j < lenh; ++j) {
                size_t idx = (lenq - orbit(j, lenq)) % lenq * quo;  // conjugate twiddle
                FixedComplex u = fx_half(fx_add(v[i + j], v[i + j + lenh], stage));
                FixedComplex d = fx_half(fx_sub(v[i + j], v[i + j + lenh], stage));
                v[i + j] = u;
                v[i + j + lenh] = fx_mul(d, table.roots[idx % table.m], stage);
            }
        }
    }
    fft_bit_reverse(v);
}

size_t plain_orbit(size_t j, size_t lenq) { return (4 * j) % lenq; }

}  // namespace

void fft_inplace(std::vector<FixedComplex>& v, const FftTable& table) {
    forward_core(v, table, plain_orbit);
}

void ifft_inplace(std::vector<FixedComplex>& v, const FftTable& table) {
    inverse_core(v, table, plain_orbit);
}

void embed_fft_inplace(std::vector<FixedComplex>& v, const FftTable& table) {
    forward_core(v, table, [&table](size_t j, size_t lenq) { return table.rot[j] % lenq; });
}

void embed_ifft_inplace(std::vector<FixedComplex>& v, const FftTable& table) {
    inverse_core(v, table, [&table](size_t j, size_t lenq) { return table.rot[j] % lenq; });
}

std::vector<FixedComplex> fft(std::vector<FixedComplex> v, const FftTable& table) {
    fft_inplace(v, table);
    return v;
}

std::vector<FixedComplex> ifft(std::vector<FixedComplex> v, const FftTable& table) {
    ifft_inplace(v, table);
    return v;
}

}  // namespace hhekit::transforms

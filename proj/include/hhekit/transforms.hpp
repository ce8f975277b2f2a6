// SPDX-License-Identifier: Apache-2.0
#ifndef HHEKIT_TRANSFORMS_HPP
#define HHEKIT_TRANSFORMS_HPP

#include <complex>
#include <cstdint>
#include <span>
#include <vector>

#include "hhekit/field.hpp"

namespace hhekit::transforms {

enum class Domain { coefficient, ntt };

// Ring element of Z_q[X]/(X^N + 1) in either representation.
struct Polynomial {
    std::vector<uint64_t> coeffs;
    Domain domain = Domain::coefficient;
    size_t basis_index = 0;

    size_t size() const { return coeffs.size(); }
    static Polynomial zero(size_t n, size_t basis_index = 0, Domain d = Domain::coefficient) {
        return Polynomial{std::vector<uint64_t>(n, 0), d, basis_index};
    }
};

// Precomputed 2n-th roots of unity for one prime, bit-reversed ordering.
struct NttTable {
    field::PrimeSpec spec;
    size_t n = 0;
    uint64_t psi = 0;  // primitive 2n-th root: psi^n = -1 mod q
    std::vector<uint64_t> psi_br;      // psi^bitrev(i)
    std::vector<uint64_t> inv_psi_br;  // psi^-bitrev(i)
    uint64_t n_inv = 0;

    static NttTable make(const field::PrimeSpec& spec, size_t n);
};

void ntt_inplace(std::span<uint64_t> a, const NttTable& table);
void intt_inplace(std::span<uint64_t> a, const NttTable& table);

// Domain-checked wrappers: forward expects coefficient domain, inverse ntt domain.
Polynomial ntt(const Polynomial& p, const NttTable& table);
Polynomial intt(const Polynomial& p, const NttTable& table);

Polynomial pointwise_mul(const Polynomial& a, const Polynomial& b, const field::PrimeSpec& spec);
Polynomial pointwise_add(const Polynomial& a, const Polynomial& b, const field::PrimeSpec& spec);
// acc + a*b elementwise.
Polynomial pointwise_mac(const Polynomial& a, const Polynomial& b, const Polynomial& acc,
                         const field::PrimeSpec& spec);

// --- fixed-point complex arithmetic (29-bit signed, 26 fractional bits) ---

constexpr int kFracBits = 26;
constexpr int32_t kFixedMaxRaw = (1 << 28) - 1;

struct FixedComplex {
    int32_t re = 0;  // raw mantissa, value = re / 2^26
    int32_t im = 0;

    static FixedComplex from_double(std::complex<double> v);
    std::complex<double> to_double() const;
};

FixedComplex fx_add(FixedComplex a, FixedComplex b, int stage);
FixedComplex fx_sub(FixedComplex a, FixedComplex b, int stage);
FixedComplex fx_mul(FixedComplex a, FixedComplex b, int stage);  // round half to even
FixedComplex fx_half(FixedComplex a);

// Twiddles for the packing transform: roots of unity on the unit circle,
// quantized once from double precision, plus the 5^j index orbit.
struct FftTable {
    size_t slots = 0;  // power of two
    size_t m = 0;      // 4 * slots
    std::vector<FixedComplex> roots;  // roots[t] = e^(2*pi*i*t/m)
    std::vector<uint32_t> rot;        // rot[j] = 5^j mod m

    static FftTable make(size_t slots);
};

// Plain radix-2 transform: unnormalized butterfly accumulation, so a constant
// vector maps to (L*c, 0, ..., 0). Throws OverflowError with the stage index
// if a value leaves the 29-bit format.
void fft_inplace(std::vector<FixedComplex>& v, const FftTable& table);
// Inverse of fft: halving butterflies, so the 1/n factor is built in and
// intermediate values stay bounded by the input magnitude.
void ifft_inplace(std::vector<FixedComplex>& v, const FftTable& table);

std::vector<FixedComplex> fft(std::vector<FixedComplex> v, const FftTable& table);
std::vector<FixedComplex> ifft(std::vector<FixedComplex> v, const FftTable& table);

// Packing variant over the 5^j root orbit (conjugate-symmetric canonical
// embedding). embed_fft evaluates coefficients at the odd roots (decode
// direction); embed_ifft inverts with built-in 1/n (encode direction).
void embed_fft_inplace(std::vector<FixedComplex>& v, const FftTable& table);
void embed_ifft_inplace(std::vector<FixedComplex>& v, const FftTable& table);

size_t bit_reverse(size_t x, unsigned bits);

}  // namespace hhekit::transforms

#endif  // HHEKIT_TRANSFORMS_HPP

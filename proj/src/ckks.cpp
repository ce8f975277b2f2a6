// SPDX-License-Identifier: Apache-2.0
#include "hhekit/ckks.hpp"

#include <bit>
#include <cstring>
#include <istream>
#include <ostream>

#include "hhekit/errors.hpp"
#include "hhekit/rng.hpp"

namespace hhekit::ckks {

using transforms::Domain;
using transforms::FixedComplex;
using transforms::Polynomial;

namespace {

constexpr char kCtMagic[4] = {'H', 'H', 'E', '1'};
constexpr char kKeyMagic[4] = {'H', 'H', 'E', 'K'};

void write_u64(std::ostream& os, uint64_t v) {
    uint8_t b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<uint8_t>(v >> (8 * i));
    os.write(reinterpret_cast<const char*>(b), 8);
}

uint64_t read_u64(std::istream& is, size_t& offset) {
    uint8_t b[8];
    is.read(reinterpret_cast<char*>(b), 8);
    if (!is) throw FormatError("truncated file", offset);
    offset += 8;
    uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= uint64_t(b[i]) << (8 * i);
    return v;
}

int64_t round_half_even_shift(int64_t v, unsigned bits) {
    if (bits == 0) return v;
    int64_t q = v >> bits;
    int64_t rem = v - (q << bits);
    int64_t half = int64_t(1) << (bits - 1);
    if (rem > half || (rem == half && (q & 1))) ++q;
    return q;
}

size_t padded_slot_count(size_t len, size_t max_slots) {
    size_t p = 2;
    while (p < len) p <<= 1;
    if (p > max_slots) throw ParameterError("message longer than available slots");
    return p;
}

}  // namespace

Context::Context(EncodingParams params) : params_(std::move(params)) {
    if (!std::has_single_bit(params_.n)) throw ParameterError("ring degree must be a power of two");
    if (params_.slots > params_.n / 2) throw ParameterError("slot count exceeds N/2");
    if (params_.scale_bits < transforms::kFracBits || params_.scale_bits > 60)
        throw ParameterError("scale_bits must be in [26, 60]");
    if (params_.basis.primes.empty()) throw ParameterError("empty RNS basis");
    for (const auto& p : params_.basis.primes)
        ntt_tables_.push_back(transforms::NttTable::make(p, params_.n));
}

const transforms::NttTable& Context::ntt_table(size_t basis) const {
    if (basis >= ntt_tables_.size()) throw StateError("basis index out of range");
    return ntt_tables_[basis];
}

const transforms::FftTable& Context::fft_table(size_t slots) const {
    std::lock_guard<std::mutex> lock(fft_mutex_);
    auto it = fft_tables_.find(slots);
    if (it == fft_tables_.end()) {
        auto t = std::make_shared<transforms::FftTable>(transforms::FftTable::make(slots));
        it = fft_tables_.emplace(slots, std::move(t)).first;
    }
    return *it->second;
}

EncryptionRandomness EncryptionRandomness::zero(size_t n) {
    EncryptionRandomness r;
    r.v.assign(n, 0);
    r.e0.assign(n, 0);
    r.e1.assign(n, 0);
    return r;
}

EncryptionRandomness EncryptionRandomness::from_seed(std::span<const uint8_t> seed, size_t n) {
    EncryptionRandomness r;
    r.v = rng::Sampler(seed, "v").ternary_vector(n);
    r.e0 = rng::Sampler(seed, "e0").gaussian_vector(n);
    r.e1 = rng::Sampler(seed, "e1").gaussian_vector(n);
    return r;
}

Plaintext encode(std::span<const std::complex<double>> msg, const Context& ctx) {
    const auto& prm = ctx.params();
    if (msg.empty() || msg.size() > prm.slots) throw ParameterError("message length out of range");
    size_t nh = prm.n / 2;
    size_t packed = padded_slot_count(msg.size(), nh);
    size_t gap = nh / packed;

    std::vector<FixedComplex> u(packed);
    for (size_t i = 0; i < msg.size(); ++i) u[i] = FixedComplex::from_double(msg[i]);
    transforms::embed_ifft_inplace(u, ctx.fft_table(packed));

    unsigned shift = ctx.coeff_shift();
    uint64_t min_q = ctx.prime(0).q;
    for (size_t i = 1; i < ctx.basis_count(); ++i) min_q = std::min(min_q, ctx.prime(i).q);

    std::vector<int64_t> coeffs(prm.n, 0);
    for (size_t j = 0; j < packed; ++j) {
        int64_t re = int64_t(u[j].re) << shift;
        int64_t im = int64_t(u[j].im) << shift;
        uint64_t bound = min_q / 2;
        if (uint64_t(std::abs(re)) >= bound || uint64_t(std::abs(im)) >= bound)
            throw OverflowError("encoded coefficient exceeds q/2", int(j));
        coeffs[j * gap] = re;
        coeffs[j * gap + nh] = im;
    }

    Plaintext pt;
    for (size_t b = 0; b < ctx.basis_count(); ++b) {
        Polynomial p = Polynomial::zero(prm.n, b);
        const auto& spec = ctx.prime(b);
        for (size_t j = 0; j < prm.n; ++j) p.coeffs[j] = field::mod_from_signed(coeffs[j], spec);
        pt.rns.push_back(std::move(p));
    }
    return pt;
}

std::vector<std::complex<double>> decode(const Plaintext& pt, const Context& ctx,
                                         size_t message_len) {
    if (pt.rns.empty()) throw StateError("empty plaintext");
    const auto& poly = pt.rns.front();
    if (poly.domain != Domain::coefficient) throw StateError("decode needs coefficient domain");
    const auto& prm = ctx.params();
    if (message_len == 0) message_len = prm.slots;
    size_t nh = prm.n / 2;
    size_t packed = padded_slot_count(message_len, nh);
    size_t gap = nh / packed;
    const auto& spec = ctx.prime(poly.basis_index);
    unsigned shift = ctx.coeff_shift();

    std::vector<FixedComplex> u(packed);
    for (size_t j = 0; j < packed; ++j) {
        int64_t re = round_half_even_shift(field::mod_to_signed(poly.coeffs[j * gap], spec), shift);
        int64_t im =
            round_half_even_shift(field::mod_to_signed(poly.coeffs[j * gap + nh], spec), shift);
        if (std::abs(re) > transforms::kFixedMaxRaw || std::abs(im) > transforms::kFixedMaxRaw)
            throw OverflowError("plaintext coefficient exceeds fixed-point range", int(j));
        u[j] = FixedComplex{static_cast<int32_t>(re), static_cast<int32_t>(im)};
    }
    transforms::embed_fft_inplace(u, ctx.fft_table(packed));

    std::vector<std::complex<double>> out(message_len);
    for (size_t i = 0; i < message_len; ++i) out[i] = u[i].to_double();
    return out;
}

KeyMaterial keygen(std::span<const uint8_t> seed, const Context& ctx) {
    if (seed.empty()) throw ParameterError("keygen seed must be nonempty");
    const auto& prm = ctx.params();
    KeyMaterial keys;
    keys.seed.assign(seed.begin(), seed.end());
    keys.sk_signed = rng::Sampler(seed, "sk").ternary_vector(prm.n);
    auto e_pk = rng::Sampler(seed, "epk").gaussian_vector(prm.n);
    rng::Sampler pk1_rng(seed, "pk1");

    for (size_t b = 0; b < ctx.basis_count(); ++b) {
        const auto& spec = ctx.prime(b);
        const auto& table = ctx.ntt_table(b);

        Polynomial sk = Polynomial::zero(prm.n, b);
        Polynomial e = Polynomial::zero(prm.n, b);
        for (size_t j = 0; j < prm.n; ++j) {
            sk.coeffs[j] = field::mod_from_signed(keys.sk_signed[j], spec);
            e.coeffs[j] = field::mod_from_signed(e_pk[j], spec);
        }
        sk = transforms::ntt(sk, table);
        e = transforms::ntt(e, table);

        Polynomial pk1 = Polynomial::zero(prm.n, b, Domain::ntt);
        for (auto& c : pk1.coeffs) c = pk1_rng.uniform_below(spec.q);

        // pk0 = -pk1*sk + e_pk
        Polynomial pk0 = Polynomial::zero(prm.n, b, Domain::ntt);
        for (size_t j = 0; j < prm.n; ++j)
            pk0.coeffs[j] = field::mod_sub(
                e.coeffs[j], field::mod_mul(pk1.coeffs[j], sk.coeffs[j], spec), spec);

        keys.sk.push_back(std::move(sk));
        keys.pk0.push_back(std::move(pk0));
        keys.pk1.push_back(std::move(pk1));
    }
    return keys;
}

Ciphertext encrypt(const Plaintext& pt, const KeyMaterial& keys, const Context& ctx,
                   const EncryptionRandomness& rnd) {
    const auto& prm = ctx.params();
    if (pt.rns.size() != ctx.basis_count()) throw StateError("plaintext missing bases");
    if (rnd.v.size() != prm.n || rnd.e0.size() != prm.n || rnd.e1.size() != prm.n)
        throw ContractError("randomness length mismatch");

    Ciphertext ct;
    ct.domain = Domain::ntt;
    for (size_t b = 0; b < ctx.basis_count(); ++b) {
        const auto& spec = ctx.prime(b);
        const auto& table = ctx.ntt_table(b);

        Polynomial v = Polynomial::zero(prm.n, b);
        Polynomial e0 = Polynomial::zero(prm.n, b);
        Polynomial e1 = Polynomial::zero(prm.n, b);
        for (size_t j = 0; j < prm.n; ++j) {
            v.coeffs[j] = field::mod_from_signed(rnd.v[j], spec);
            e0.coeffs[j] = field::mod_from_signed(rnd.e0[j], spec);
            e1.coeffs[j] = field::mod_from_signed(rnd.e1[j], spec);
        }
        v = transforms::ntt(v, table);
        e0 = transforms::ntt(e0, table);
        e1 = transforms::ntt(e1, table);

        Polynomial pt_b = pt.rns[b];
        if (pt_b.domain == Domain::coefficient) pt_b = transforms::ntt(pt_b, table);

        // ct0 = v*pk0 + e0 + pt, ct1 = v*pk1 + e1, pointwise per basis.
        Polynomial ct0 = transforms::pointwise_mac(v, keys.pk0[b], e0, spec);
        ct0 = transforms::pointwise_add(ct0, pt_b, spec);
        Polynomial ct1 = transforms::pointwise_mac(v, keys.pk1[b], e1, spec);

        ct.ct0.push_back(std::move(ct0));
        ct.ct1.push_back(std::move(ct1));
    }
    return ct;
}

Ciphertext encrypt(const Plaintext& pt, const KeyMaterial& keys, const Context& ctx,
                   std::span<const uint8_t> randomness_seed) {
    return encrypt(pt, keys, ctx, EncryptionRandomness::from_seed(randomness_seed, ctx.params().n));
}

Plaintext decrypt(const Ciphertext& ct, const KeyMaterial& keys, const Context& ctx) {
    if (ct.ct0.empty()) throw StateError("ciphertext has no basis 0");
    if (ct.domain != Domain::ntt) throw StateError("decrypt expects ntt-domain ciphertext");
    const auto& spec = ctx.prime(0);
    const auto& table = ctx.ntt_table(0);
    Polynomial p = transforms::pointwise_mac(ct.ct1[0], keys.sk[0], ct.ct0[0], spec);
    Plaintext pt;
    pt.rns.push_back(transforms::intt(p, table));
    return pt;
}

void write_ciphertext(std::ostream& os, const Ciphertext& ct, const Context& ctx) {
    os.write(kCtMagic, 4);
    write_u64(os, 1);  // version
    write_u64(os, ct.domain == Domain::ntt ? 1 : 0);
    write_u64(os, ctx.params().n);
    write_u64(os, ct.ct0.size());
    for (size_t b = 0; b < ct.ct0.size(); ++b) write_u64(os, ctx.prime(b).q);
    for (size_t b = 0; b < ct.ct0.size(); ++b) {
        for (uint64_t c : ct.ct0[b].coeffs) write_u64(os, c);
        for (uint64_t c : ct.ct1[b].coeffs) write_u64(os, c);
    }
}

Ciphertext read_ciphertext(std::istream& is, const Context& ctx) {
    size_t offset = 0;
    char magic[4];
    is.read(magic, 4);
    if (!is || std::memcmp(magic, kCtMagic, 4) != 0) throw FormatError("bad ciphertext magic", 0);
    offset = 4;
    if (read_u64(is, offset) != 1) throw FormatError("unsupported version", offset - 8);
    uint64_t domain = read_u64(is, offset);
    uint64_t n = read_u64(is, offset);
    uint64_t bases = read_u64(is, offset);
    if (n != ctx.params().n) throw FormatError("ring degree mismatch", offset - 16);
    if (bases == 0 || bases > ctx.basis_count())
        throw FormatError("basis count mismatch", offset - 8);
    for (size_t b = 0; b < bases; ++b) {
        if (read_u64(is, offset) != ctx.prime(b).q) throw FormatError("modulus mismatch", offset - 8);
    }
    Ciphertext ct;
    ct.domain = domain ? Domain::ntt : Domain::coefficient;
    for (size_t b = 0; b < bases; ++b) {
        Polynomial c0 = Polynomial::zero(n, b, ct.domain);
        Polynomial c1 = Polynomial::zero(n, b, ct.domain);
        for (auto& c : c0.coeffs) c = read_u64(is, offset);
        for (auto& c : c1.coeffs) c = read_u64(is, offset);
        ct.ct0.push_back(std::move(c0));
        ct.ct1.push_back(std::move(c1));
    }
    return ct;
}

void write_keyfile(std::ostream& os, const KeyMaterial& keys, const Context& ctx) {
    os.write(kKeyMagic, 4);
    write_u64(os, ctx.params().n);
    write_u64(os, ctx.basis_count());
    write_u64(os, keys.seed.size());
    os.write(reinterpret_cast<const char*>(keys.seed.data()),
             static_cast<std::streamsize>(keys.seed.size()));
}

KeyMaterial read_keyfile(std::istream& is, const Context& ctx) {
    size_t offset = 0;
    char magic[4];
    is.read(magic, 4);
    if (!is || std::memcmp(magic, kKeyMagic, 4) != 0) throw FormatError("bad key magic", 0);
    offset = 4;
    uint64_t n = read_u64(is, offset);
    uint64_t bases = read_u64(is, offset);
    if (n != ctx.params().n || bases != ctx.basis_count())
        throw FormatError("key parameters mismatch", offset);
    uint64_t seed_len = read_u64(is, offset);
    if (seed_len == 0 || seed_len > 4096) throw FormatError("bad seed length", offset - 8);
    std::vector<uint8_t> seed(seed_len);
    is.read(reinterpret_cast<char*>(seed.data()), static_cast<std::streamsize>(seed_len));
    if (!is) throw FormatError("truncated key file", offset);
    return keygen(seed, ctx);
}

}  // namespace hhekit::ckks

// SPDX-License-Identifier: Apache-2.0
#include "hhekit/rubato.hpp"

#include <cmath>

#include "hhekit/errors.hpp"
#include "hhekit/instrument.hpp"
#include "hhekit/rng.hpp"
#include "hhekit/xof.hpp"

namespace hhekit::rubato {

namespace {

field::RubatoModulus modulus_26() {
    return field::RubatoModulus{field::PrimeSpec::from_q(67104769, 2048)};  // 2^26 - 2^12 + 1
}

field::RubatoModulus modulus_25() {
    return field::RubatoModulus{field::PrimeSpec::from_q(33550337, 2048)};  // 2^25 - 2^12 + 1
}

void check_state(const State& s, const Params& p, const char* what) {
    if (s.size() != p.n) throw ContractError(std::string(what) + " length mismatch");
    for (uint64_t w : s)
        if (w >= p.t.t()) throw ContractError(std::string(what) + " word out of range");
}

xof::Shake128 nonce_stream(std::span<const uint8_t> nonce, uint64_t counter) {
    xof::Shake128 x;
    x.absorb(nonce);
    uint8_t ctr[8];
    for (int i = 0; i < 8; ++i) ctr[i] = static_cast<uint8_t>(counter >> (8 * i));
    x.absorb(std::span<const uint8_t>(ctr, 8));
    return x;
}

uint64_t next_rejected_word(xof::Shake128& x, unsigned bits, uint64_t t) {
    for (;;) {
        uint64_t w = x.squeeze_bits(bits);
        if (w != 0 && w < t) return w;
    }
}

}  // namespace

Params Params::get(Preset p) {
    Params out;
    out.preset = p;
    switch (p) {
        case Preset::k128S:
            out.v = 4;
            out.n = 16;
            out.l = 12;
            out.log_t = 26;
            out.rounds = 5;
            out.t = modulus_26();
            out.m0 = {2, 3, 1, 1};
            break;
        case Preset::k128M:
            out.v = 6;
            out.n = 36;
            out.l = 32;
            out.log_t = 25;
            out.rounds = 3;
            out.t = modulus_25();
            out.m0 = {4, 2, 4, 3, 1, 1};
            break;
        case Preset::k128L:
            out.v = 8;
            out.n = 64;
            out.l = 60;
            out.log_t = 25;
            out.rounds = 2;
            out.t = modulus_25();
            out.m0 = {5, 3, 4, 3, 6, 2, 1, 1};
            break;
    }
    return out;
}

Params Params::parse(const std::string& name) {
    if (name == "128S" || name == "S") return get(Preset::k128S);
    if (name == "128M" || name == "M") return get(Preset::k128M);
    if (name == "128L" || name == "L") return get(Preset::k128L);
    throw ParameterError("unknown preset: " + name);
}

RoundConstants derive_round_constants(std::span<const uint8_t> nonce, uint64_t counter,
                                      const Params& params) {
    if (nonce.size() != params.lambda / 8) throw ContractError("nonce must be lambda bits");
    auto stream = nonce_stream(nonce, counter);
    RoundConstants out;
    out.rc.resize(params.rounds + 1);
    for (auto& vec : out.rc) {
        vec.resize(params.n);
        for (auto& w : vec) w = next_rejected_word(stream, params.log_t, params.t.t());
    }
    return out;
}

State ark(const State& x, const State& key, const State& rc, const Params& params) {
    check_state(x, params, "state");
    check_state(key, params, "key");
    check_state(rc, params, "round constants");
    const auto& spec = params.t.spec;
    State out(params.n);
    for (size_t j = 0; j < params.n; ++j)
        out[j] = field::mod_add(x[j], field::mod_mul(key[j], rc[j], spec), spec);
    instrument::counters().ark_mults += params.n;
    return out;
}

State feistel(const State& x, const Params& params) {
    check_state(x, params, "state");
    const auto& spec = params.t.spec;
    State out(params.n);
    out[0] = x[0];
    for (size_t i = 1; i < params.n; ++i)
        out[i] = field::mod_add(x[i], field::mod_mul(x[i - 1], x[i - 1], spec), spec);
    instrument::counters().feistel_squares += params.n - 1;
    return out;
}

namespace {

// One circulant mat-vec: y[i] = sum_j m0[(i-j) mod v] * vec[j].
void circulant_apply(const std::vector<uint64_t>& m0, const uint64_t* vec, size_t stride,
                     uint64_t* out, size_t out_stride, const field::PrimeSpec& spec) {
    size_t v = m0.size();
    for (size_t i = 0; i < v; ++i) {
        uint64_t acc = 0;
        for (size_t j = 0; j < v; ++j) {
            uint64_t coef = m0[(i + v - j) % v];
            acc = field::mod_add(acc, field::mod_mul(coef, vec[j * stride], spec), spec);
        }
        out[i * out_stride] = acc;
    }
}

}  // namespace

State mix_columns(const State& x, const Params& params) {
    check_state(x, params, "state");
    const auto& spec = params.t.spec;
    size_t v = params.v;
    State out(params.n);
    for (size_t c = 0; c < v; ++c) circulant_apply(params.m0, &x[c], v, &out[c], v, spec);
    return out;
}

State mix_rows(const State& x, const Params& params) {
    check_state(x, params, "state");
    const auto& spec = params.t.spec;
    size_t v = params.v;
    State out(params.n);
    for (size_t r = 0; r < v; ++r) circulant_apply(params.m0, &x[r * v], 1, &out[r * v], 1, spec);
    return out;
}

std::vector<uint64_t> keystream(const State& key, std::span<const uint8_t> nonce, uint64_t counter,
                                const Params& params, bool with_noise) {
    check_state(key, params, "key");
    auto rcs = derive_round_constants(nonce, counter, params);

    State state(params.n);
    for (size_t i = 0; i < params.n; ++i) state[i] = (i + 1) % params.t.t();

    state = ark(state, key, rcs.rc[0], params);
    for (unsigned round = 1; round <= params.rounds; ++round) {
        state = feistel(state, params);
        state = mix_rows(state, params);
        state = mix_columns(state, params);
        state = ark(state, key, rcs.rc[round], params);
    }

    std::vector<uint64_t> out(state.begin(), state.begin() + params.l);
    if (with_noise) {
        std::vector<uint8_t> seed(nonce.begin(), nonce.end());
        for (int i = 0; i < 8; ++i) seed.push_back(uint8_t(counter >> (8 * i)));
        rng::Sampler noise(seed, "agn");
        const auto& spec = params.t.spec;
        for (auto& w : out)
            w = field::mod_add(w, field::mod_from_signed(noise.gaussian(), spec), spec);
    }
    return out;
}

State derive_key(std::span<const uint8_t> key_material, const Params& params) {
    if (key_material.empty()) throw ParameterError("empty key material");
    xof::Shake128 x;
    x.absorb(key_material);
    x.absorb(std::string_view("key"));
    State key(params.n);
    for (auto& w : key) w = next_rejected_word(x, params.log_t, params.t.t());
    return key;
}

std::vector<uint64_t> se_encrypt(std::span<const double> msg, const State& key,
                                 std::span<const uint8_t> nonce, uint64_t counter,
                                 unsigned se_scale_bits, const Params& params) {
    if (msg.size() > params.l) throw ContractError("message longer than keystream block");
    const auto& spec = params.t.spec;
    double scale = std::ldexp(1.0, int(se_scale_bits));
    auto ks = keystream(key, nonce, counter, params);
    std::vector<uint64_t> out(msg.size());
    for (size_t j = 0; j < msg.size(); ++j) {
        double scaled = std::round(msg[j] * scale);
        if (std::abs(scaled) >= double(params.t.t()) / 2.0)
            throw OverflowError("scaled message exceeds t/2", int(j));
        uint64_t enc = field::mod_from_signed(static_cast<int64_t>(scaled), spec);
        out[j] = field::mod_add(enc, ks[j], spec);
    }
    return out;
}

std::vector<double> se_decrypt(std::span<const uint64_t> words, const State& key,
                               std::span<const uint8_t> nonce, uint64_t counter,
                               unsigned se_scale_bits, const Params& params) {
    if (words.size() > params.l) throw ContractError("ciphertext longer than keystream block");
    const auto& spec = params.t.spec;
    double scale = std::ldexp(1.0, int(se_scale_bits));
    auto ks = keystream(key, nonce, counter, params);
    std::vector<double> out(words.size());
    for (size_t j = 0; j < words.size(); ++j) {
        uint64_t centered = field::mod_sub(words[j], ks[j], spec);
        out[j] = double(field::mod_to_signed(centered, spec)) / scale;
    }
    return out;
}

}  // namespace hhekit::rubato

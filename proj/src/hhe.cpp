// SPDX-License-Identifier: Apache-2.0
#include "hhekit/hhe.hpp"

#include <algorithm>

#include "hhekit/errors.hpp"

namespace hhekit::hhe {

const char* mode_name(Mode m) { return m == Mode::CKKS ? "CKKS" : "RUBATO_SE"; }

Mode select_mode(const SessionConfig& config) {
    if (config.message_length == 0) throw ParameterError("message length not set");
    bool slow_bus = std::find(config.slow_tiers.begin(), config.slow_tiers.end(), config.bus) !=
                    config.slow_tiers.end();
    if ((config.message_length < config.rubato_threshold && config.cloud_load == CloudLoad::low) ||
        slow_bus)
        return Mode::RUBATO_SE;
    return Mode::CKKS;
}

std::vector<uint64_t> SegmentedCiphertext::flat_words() const {
    std::vector<uint64_t> out;
    for (const auto& s : segments) out.insert(out.end(), s.begin(), s.end());
    return out;
}

HybridCiphertext hhe_encrypt(std::span<const double> msg, const SessionConfig& config,
                             const ckks::Context& ctx, const ckks::KeyMaterial& ckks_keys,
                             const rubato::State& se_key, std::span<const uint8_t> base_nonce,
                             std::span<const uint8_t> enc_seed, std::optional<Mode> forced_mode) {
    SessionConfig cfg = config;
    if (cfg.message_length == 0) cfg.message_length = msg.size();
    if (cfg.message_length != msg.size()) throw ContractError("configured length != message length");

    HybridCiphertext out;
    out.mode = forced_mode ? *forced_mode : select_mode(cfg);
    if (out.mode == Mode::CKKS) {
        std::vector<std::complex<double>> cm(msg.size());
        for (size_t i = 0; i < msg.size(); ++i) cm[i] = {msg[i], 0.0};
        out.lattice = ckks::encrypt(ckks::encode(cm, ctx), ckks_keys, ctx, enc_seed);
        return out;
    }

    auto params = rubato::Params::get(cfg.preset);
    SegmentedCiphertext se;
    se.preset = cfg.preset;
    se.se_scale_bits = cfg.se_scale_bits;
    se.base_nonce.assign(base_nonce.begin(), base_nonce.end());
    se.message_length = msg.size();
    size_t done = 0;
    uint64_t counter = 0;
    while (done < msg.size()) {
        size_t chunk = std::min<size_t>(params.l, msg.size() - done);
        se.segments.push_back(rubato::se_encrypt(msg.subspan(done, chunk), se_key, base_nonce,
                                                 counter, cfg.se_scale_bits, params));
        done += chunk;
        ++counter;
    }
    out.stream = std::move(se);
    return out;
}

std::vector<double> hhe_decrypt(const HybridCiphertext& ct, const SessionConfig& config,
                                const ckks::Context& ctx, const ckks::KeyMaterial& ckks_keys,
                                const rubato::State& se_key) {
    if (ct.mode == Mode::CKKS) {
        if (!ct.lattice) throw StateError("missing lattice ciphertext");
        auto slots = ckks::decode(ckks::decrypt(*ct.lattice, ckks_keys, ctx), ctx,
                                  config.message_length ? config.message_length : 0);
        std::vector<double> out(slots.size());
        for (size_t i = 0; i < slots.size(); ++i) out[i] = slots[i].real();
        if (config.message_length && out.size() > config.message_length)
            out.resize(config.message_length);
        return out;
    }
    if (!ct.stream) throw StateError("missing stream ciphertext");
    const auto& se = *ct.stream;
    auto params = rubato::Params::get(se.preset);
    std::vector<double> out;
    out.reserve(se.message_length);
    for (size_t i = 0; i < se.segments.size(); ++i) {
        auto part = rubato::se_decrypt(se.segments[i], se_key, se.base_nonce, i, se.se_scale_bits,
                                       params);
        out.insert(out.end(), part.begin(), part.end());
    }
    if (out.size() != se.message_length) throw StateError("segment lengths disagree with header");
    return out;
}

std::vector<CrossoverRow> crossover_report(const CrossoverInputs& inputs,
                                           const netmodel::CalibrationTable& cal,
                                           netmodel::BusConfig bus) {
    if (inputs.ckks_m2ct_cycles <= 0 || inputs.rubato_block_cycles_s <= 0 ||
        inputs.rubato_block_cycles_m <= 0 || inputs.rubato_block_cycles_l <= 0)
        throw StateError("crossover report needs both latency sources");

    const auto& row = cal.at(bus);
    double per_word = double(row.load_cycles + row.store_cycles) / 8192.0;
    double ckks_transfer = 6.0 * double(row.load_cycles + row.store_cycles);

    struct Tier {
        size_t lm;
        rubato::Preset preset;
        double block;
    };
    const Tier tiers[] = {
        {12, rubato::Preset::k128S, inputs.rubato_block_cycles_s},
        {32, rubato::Preset::k128M, inputs.rubato_block_cycles_m},
        {60, rubato::Preset::k128L, inputs.rubato_block_cycles_l},
        {512, rubato::Preset::k128L, inputs.rubato_block_cycles_l},
        {4096, rubato::Preset::k128L, inputs.rubato_block_cycles_l},
    };

    std::vector<CrossoverRow> out;
    for (const auto& tier : tiers) {
        auto params = rubato::Params::get(tier.preset);
        CrossoverRow r;
        r.message_length = tier.lm;
        r.preset = tier.preset;
        r.segments = (tier.lm + params.l - 1) / params.l;
        r.rubato_cycles = double(r.segments) * tier.block;
        r.ckks_cycles = inputs.ckks_m2ct_cycles;
        r.compute_speedup = r.ckks_cycles / r.rubato_cycles;
        r.rubato_e2e = r.rubato_cycles + double(tier.lm) * per_word;
        r.ckks_e2e = r.ckks_cycles + ckks_transfer;
        r.e2e_speedup = r.ckks_e2e / r.rubato_e2e;
        out.push_back(r);
    }
    return out;
}

}  // namespace hhekit::hhe

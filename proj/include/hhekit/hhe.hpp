// SPDX-License-Identifier: Apache-2.0
#ifndef HHEKIT_HHE_HPP
#define HHEKIT_HHE_HPP

#include <optional>
#include <span>
#include <vector>

#include "hhekit/ckks.hpp"
#include "hhekit/netmodel.hpp"
#include "hhekit/rubato.hpp"

namespace hhekit::hhe {

enum class Mode { CKKS, RUBATO_SE };
const char* mode_name(Mode m);

enum class CloudLoad { low, high };

struct SessionConfig {
    size_t message_length = 0;
    CloudLoad cloud_load = CloudLoad::high;
    netmodel::BusConfig bus{1, 64};
    // Below this length a lightly loaded cloud tips the choice to the stream
    // cipher; exactly at the threshold the lattice path wins (documented tie).
    size_t rubato_threshold = 1000;
    std::vector<netmodel::BusConfig> slow_tiers = {{1, 64}};
    rubato::Preset preset = rubato::Preset::k128L;
    unsigned se_scale_bits = 20;
};

Mode select_mode(const SessionConfig& config);

// Stream-cipher ciphertext split into per-segment blocks; segment i uses the
// base nonce with counter i, so every block has a distinct keystream.
struct SegmentedCiphertext {
    rubato::Preset preset = rubato::Preset::k128L;
    unsigned se_scale_bits = 20;
    std::vector<uint8_t> base_nonce;
    size_t message_length = 0;
    std::vector<std::vector<uint64_t>> segments;

    std::vector<uint64_t> flat_words() const;
};

struct HybridCiphertext {
    Mode mode = Mode::CKKS;
    std::optional<ckks::Ciphertext> lattice;
    std::optional<SegmentedCiphertext> stream;
};

// Encrypts under select_mode(config), or under forced_mode when given.
HybridCiphertext hhe_encrypt(std::span<const double> msg, const SessionConfig& config,
                             const ckks::Context& ctx, const ckks::KeyMaterial& ckks_keys,
                             const rubato::State& se_key, std::span<const uint8_t> base_nonce,
                             std::span<const uint8_t> enc_seed,
                             std::optional<Mode> forced_mode = {});

std::vector<double> hhe_decrypt(const HybridCiphertext& ct, const SessionConfig& config,
                                const ckks::Context& ctx, const ckks::KeyMaterial& ckks_keys,
                                const rubato::State& se_key);

// Cycle comparison of the two edge pipelines across message-length tiers.
struct CrossoverRow {
    size_t message_length = 0;
    rubato::Preset preset = rubato::Preset::k128L;
    size_t segments = 0;
    double rubato_cycles = 0;  // compute, all segments
    double ckks_cycles = 0;    // compute, constant in message length
    double compute_speedup = 0;
    double rubato_e2e = 0;  // compute + ciphertext transfer over the bus
    double ckks_e2e = 0;
    double e2e_speedup = 0;
};

struct CrossoverInputs {
    double ckks_m2ct_cycles = 0;                      // from the simulator
    double rubato_block_cycles_s = 0;                 // per-block, preset 128S
    double rubato_block_cycles_m = 0;
    double rubato_block_cycles_l = 0;
};

// Tiers 12/32/60 run the matching preset; longer messages segment under 128L.
std::vector<CrossoverRow> crossover_report(const CrossoverInputs& inputs,
                                           const netmodel::CalibrationTable& cal,
                                           netmodel::BusConfig bus);

}  // namespace hhekit::hhe

#endif  // HHEKIT_HHE_HPP

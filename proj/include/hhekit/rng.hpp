// SPDX-License-Identifier: Apache-2.0
#ifndef HHEKIT_RNG_HPP
#define HHEKIT_RNG_HPP

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hhekit/xof.hpp"

namespace hhekit::rng {

// Deterministic sampler over a seeded SHAKE stream. Every distribution the
// toolkit needs comes from one generator so a (seed, label) pair fully
// reproduces any run.
class Sampler {
public:
    Sampler(std::span<const uint8_t> seed, std::string_view label);
    static Sampler from_hex(const std::string& hex_seed, std::string_view label);

    // P(-1) = P(+1) = 1/4, P(0) = 1/2.
    int ternary();
    // Rounded Gaussian, sigma = 3.2, resampled beyond 6*sigma.
    int gaussian();
    // Uniform in [0, bound).
    uint64_t uniform_below(uint64_t bound);
    uint64_t u64();
    double canonical_double();  // uniform in [0, 1)

    std::vector<int> ternary_vector(size_t n);
    std::vector<int> gaussian_vector(size_t n);

    static constexpr double kSigma = 3.2;
    static constexpr int kTailBound = 19;  // floor(6 * sigma)

private:
    xof::Shake128 stream_;
};

std::vector<uint8_t> parse_hex(const std::string& hex);
std::string to_hex(std::span<const uint8_t> bytes);

}  // namespace hhekit::rng

#endif  // HHEKIT_RNG_HPP

// SPDX-License-Identifier: Apache-2.0
#include <cstdint>
#include <vector>

#include "doctest.h"
#include "hhekit/rng.hpp"
#include "hhekit/xof.hpp"

using namespace hhekit;

TEST_CASE("shake128 known answer, empty input") {
    // FIPS 202 vector.
    auto out = xof::shake128({}, 32);
    auto hex = rng::to_hex(out);
    CHECK(hex == "7f9c2ba4e88f827d616045507605853ed73b8093f6efbc88eb1a6eacfa66ef26");
}

TEST_CASE("shake128 known answer, short message") {
    std::string msg = "rubato";
    std::vector<uint8_t> seed(msg.begin(), msg.end());
    auto out = xof::shake128(seed, 16);
    CHECK(rng::to_hex(out) == "cf6692e44861f81a4d4944c1c70c3f5d");
}

TEST_CASE("shake output stream is prefix-stable") {
    std::vector<uint8_t> seed = {1, 2, 3};
    auto a = xof::shake128(seed, 500);
    auto b = xof::shake128(seed, 64);
    CHECK(std::equal(b.begin(), b.end(), a.begin()));

    xof::Shake128 inc(seed);
    std::vector<uint8_t> c(500);
    inc.squeeze(c.data(), 200);
    inc.squeeze(c.data() + 200, 300);
    CHECK(a == c);
}

TEST_CASE("squeeze_bits consumes the byte stream LSB-first") {
    std::vector<uint8_t> seed = {42};
    xof::Shake128 a(seed);
    xof::Shake128 b(seed);
    auto bytes = a.squeeze(8);
    uint64_t lo = b.squeeze_bits(13);
    uint64_t hi = b.squeeze_bits(13);
    uint64_t word = 0;
    for (int i = 0; i < 8; ++i) word |= uint64_t(bytes[i]) << (8 * i);
    CHECK(lo == (word & 0x1fff));
    CHECK(hi == ((word >> 13) & 0x1fff));
}

TEST_CASE("sampler determinism and distributions") {
    std::vector<uint8_t> seed = {9, 9, 9};
    rng::Sampler s1(seed, "v");
    rng::Sampler s2(seed, "v");
    rng::Sampler s3(seed, "e0");

    auto a = s1.ternary_vector(256);
    auto b = s2.ternary_vector(256);
    CHECK(a == b);
    CHECK(s3.ternary_vector(256) != a);  // distinct label, distinct stream

    int zeros = 0;
    for (int x : a) {
        CHECK(x >= -1);
        CHECK(x <= 1);
        if (x == 0) ++zeros;
    }
    CHECK(zeros > 64);  // ~128 expected
    CHECK(zeros < 192);

    rng::Sampler g(seed, "g");
    double sum = 0, sq = 0;
    const int n = 20000;
    for (int i = 0; i < n; ++i) {
        int x = g.gaussian();
        CHECK(std::abs(x) <= rng::Sampler::kTailBound);
        sum += x;
        sq += double(x) * x;
    }
    double mean = sum / n;
    double var = sq / n - mean * mean;
    CHECK(std::abs(mean) < 0.1);
    CHECK(var > 8.5);   // sigma^2 = 10.24
    CHECK(var < 12.0);
}

TEST_CASE("uniform_below stays below the bound and covers it") {
    rng::Sampler s(std::vector<uint8_t>{7}, "u");
    uint64_t bound = 67104769;
    uint64_t max_seen = 0;
    for (int i = 0; i < 5000; ++i) {
        uint64_t v = s.uniform_below(bound);
        CHECK(v < bound);
        max_seen = std::max(max_seen, v);
    }
    CHECK(max_seen > bound / 2);
}

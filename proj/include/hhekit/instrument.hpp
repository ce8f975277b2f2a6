// SPDX-License-Identifier: Apache-2.0
#ifndef HHEKIT_INSTRUMENT_HPP
#define HHEKIT_INSTRUMENT_HPP

#include <cstdint>

namespace hhekit::instrument {

// Structural operation counters, used by tests to pin op counts
// (3 partial products per wide multiply, (r+1)*n ARK multiplies, ...).
// Thread-local so concurrent use stays race-free.
struct Counters {
    uint64_t wide_mul_partials = 0;
    uint64_t ark_mults = 0;
    uint64_t feistel_squares = 0;
    uint64_t barrett_corrections_max = 0;  // max conditional subtractions seen in one reduce
};

inline Counters& counters() {
    thread_local Counters c;
    return c;
}

inline void reset() { counters() = Counters{}; }

}  // namespace hhekit::instrument

#endif  // HHEKIT_INSTRUMENT_HPP

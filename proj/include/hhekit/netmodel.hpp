// SPDX-License-Identifier: Apache-2.0
#ifndef HHEKIT_NETMODEL_HPP
#define HHEKIT_NETMODEL_HPP

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace hhekit::netmodel {

struct BusConfig {
    unsigned channels = 1;    // 1 or 2
    unsigned width_bits = 64; // 64, 128, 256
    bool operator==(const BusConfig&) const = default;
};

BusConfig parse_bus(const std::string& name);  // "1x64" ... "2x256"
std::string bus_name(BusConfig bus);

// Measured cycles to move one 8192-word polynomial over the system bus, plus
// the measured end-to-end totals the model reconstructs.
struct BusCalibration {
    uint64_t load_cycles = 0;
    uint64_t store_cycles = 0;
    double overall_m2c = 0;  // m-to-ct-to-cloud total cycles
    double overall_c2m = 0;  // cloud-to-ct-to-m total cycles
};

enum class Direction { m_to_ct_to_cloud, cloud_to_ct_to_m };

// Outbound ships 2 components x 3 bases; inbound 1 basis x 2 components.
constexpr unsigned polys_transferred(Direction d) {
    return d == Direction::m_to_ct_to_cloud ? 6 : 2;
}

struct CalibrationTable {
    std::vector<std::pair<BusConfig, BusCalibration>> entries;
    std::optional<double> niu_out;  // non-overlapped packaging delay, outbound
    std::optional<double> niu_in;
    double compute_m2ct = 358000;  // crypto-core compute constants at 200 MHz
    double compute_ct2m = 58000;

    static CalibrationTable builtin();
    static CalibrationTable from_json_file(const std::string& path);

    const BusCalibration& at(BusConfig bus) const;
    // Per-row compute base: measured overall minus the poly transfer term.
    double backsolved_compute(BusConfig bus, Direction d) const;
};

struct TransferScenario {
    Direction direction = Direction::m_to_ct_to_cloud;
    unsigned polys = 6;
    double compute_cycles = 0;
};

TransferScenario table_scenario(Direction d, BusConfig bus, const CalibrationTable& cal);

struct LatencyReport {
    double overall_cycles = 0;
    double transfer_cycles = 0;
    double transfer_percentage = 0;  // transfer / overall, in [0, 1)
    std::optional<double> speedup;
};

// overall = compute + polys * (load + store); transfer share reported.
LatencyReport standalone_latency(const TransferScenario& scenario, BusConfig bus,
                                 const CalibrationTable& cal);
// overall = compute + the direction's NIU non-overlap constant; bus-independent.
LatencyReport near_network_latency(const TransferScenario& scenario, const CalibrationTable& cal);

struct SweepRow {
    BusConfig bus;
    Direction direction;
    double standalone_cycles = 0;
    double nearnet_cycles = 0;
    double speedup = 0;
};

// All six bus configs x both directions; near-network compute base is the
// 1x64 back-solve so the near-network overall is bus-independent.
std::vector<SweepRow> speedup_sweep(const CalibrationTable& cal);

// --- packet encapsulation ---

struct PacketFormat {
    size_t header_bytes = 16;   // >= 8
    size_t segment_words = 1024;
    static constexpr unsigned flit_bits = 64;
};

// Packets are header || segment, one coefficient per 64-bit LE flit; the last
// segment may be short. Total bytes = packets*header_bytes + words*8.
std::vector<uint8_t> encapsulate(std::span<const uint64_t> payload, const PacketFormat& fmt);
std::vector<uint64_t> decapsulate(std::span<const uint8_t> bytes, const PacketFormat& fmt);
size_t packet_count(size_t payload_words, const PacketFormat& fmt);

// Equivalent number of slices: DSP*100 + BRAM*196 + LUT/4 + FF/2, rounded.
int64_t ens(double lut, double ff, double dsp, double bram);

}  // namespace hhekit::netmodel

#endif  // HHEKIT_NETMODEL_HPP

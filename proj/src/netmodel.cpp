// SPDX-License-Identifier: Apache-2.0
#include "hhekit/netmodel.hpp"

#include <cmath>
#include <fstream>

#include "hhekit/errors.hpp"
#include "json.hpp"

namespace hhekit::netmodel {

BusConfig parse_bus(const std::string& name) {
    auto x = name.find('x');
    if (x == std::string::npos) throw ParameterError("bus config must look like 1x64");
    unsigned ch = std::stoul(name.substr(0, x));
    unsigned width = std::stoul(name.substr(x + 1));
    if ((ch != 1 && ch != 2) || (width != 64 && width != 128 && width != 256))
        throw ParameterError("unknown bus config " + name);
    return BusConfig{ch, width};
}

std::string bus_name(BusConfig bus) {
    return std::to_string(bus.channels) + "x" + std::to_string(bus.width_bits);
}

CalibrationTable CalibrationTable::builtin() {
    CalibrationTable t;
    t.entries = {
        {{1, 64}, {16924, 12520, 533500, 116500}},
        {{1, 128}, {12807, 12338, 505700, 107800}},
        {{1, 256}, {10767, 12343, 492500, 103700}},
        {{2, 64}, {9882, 8288, 461900, 91800}},
        {{2, 128}, {6623, 6300, 428800, 80300}},
        {{2, 256}, {5551, 6187, 421100, 77900}},
    };
    t.niu_out = 16300;
    t.niu_in = 17100;
    t.compute_m2ct = 358000;
    t.compute_ct2m = 58000;
    return t;
}

CalibrationTable CalibrationTable::from_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParameterError("cannot open calibration file " + path);
    nlohmann::json j;
    in >> j;
    CalibrationTable t;
    for (const auto& row : j.at("bus")) {
        BusConfig bus{row.at("channels").get<unsigned>(), row.at("width_bits").get<unsigned>()};
        BusCalibration cal{row.at("load_cycles").get<uint64_t>(),
                           row.at("store_cycles").get<uint64_t>(),
                           row.at("overall_m2c").get<double>(),
                           row.at("overall_c2m").get<double>()};
        t.entries.emplace_back(bus, cal);
    }
    if (j.contains("niu")) {
        t.niu_out = j["niu"].at("outbound").get<double>();
        t.niu_in = j["niu"].at("inbound").get<double>();
    }
    if (j.contains("compute")) {
        t.compute_m2ct = j["compute"].at("m_to_ct").get<double>();
        t.compute_ct2m = j["compute"].at("ct_to_m").get<double>();
    }
    return t;
}

const BusCalibration& CalibrationTable::at(BusConfig bus) const {
    for (const auto& [b, cal] : entries)
        if (b == bus) return cal;
    throw ParameterError("bus config " + bus_name(bus) + " not in calibration table");
}

double CalibrationTable::backsolved_compute(BusConfig bus, Direction d) const {
    const auto& cal = at(bus);
    double overall = d == Direction::m_to_ct_to_cloud ? cal.overall_m2c : cal.overall_c2m;
    double transfer = double(polys_transferred(d)) * double(cal.load_cycles + cal.store_cycles);
    return overall - transfer;
}

TransferScenario table_scenario(Direction d, BusConfig bus, const CalibrationTable& cal) {
    return TransferScenario{d, polys_transferred(d), cal.backsolved_compute(bus, d)};
}

LatencyReport standalone_latency(const TransferScenario& scenario, BusConfig bus,
                                 const CalibrationTable& cal) {
    const auto& row = cal.at(bus);
    LatencyReport r;
    r.transfer_cycles = double(scenario.polys) * double(row.load_cycles + row.store_cycles);
    r.overall_cycles = scenario.compute_cycles + r.transfer_cycles;
    r.transfer_percentage = r.overall_cycles > 0 ? r.transfer_cycles / r.overall_cycles : 0.0;
    return r;
}

LatencyReport near_network_latency(const TransferScenario& scenario, const CalibrationTable& cal) {
    const auto& niu = scenario.direction == Direction::m_to_ct_to_cloud ? cal.niu_out : cal.niu_in;
    if (!niu) throw StateError("NIU non-overlap delay not calibrated");
    LatencyReport r;
    r.transfer_cycles = *niu;
    r.overall_cycles = scenario.compute_cycles + *niu;
    r.transfer_percentage = r.overall_cycles > 0 ? r.transfer_cycles / r.overall_cycles : 0.0;
    return r;
}

std::vector<SweepRow> speedup_sweep(const CalibrationTable& cal) {
    std::vector<SweepRow> rows;
    const BusConfig reference{1, 64};
    for (Direction d : {Direction::m_to_ct_to_cloud, Direction::cloud_to_ct_to_m}) {
        TransferScenario scenario = table_scenario(d, reference, cal);
        auto nearnet = near_network_latency(scenario, cal);
        for (const auto& [bus, row] : cal.entries) {
            (void)row;
            TransferScenario per_bus = table_scenario(d, bus, cal);
            auto standalone = standalone_latency(per_bus, bus, cal);
            rows.push_back(SweepRow{bus, d, standalone.overall_cycles, nearnet.overall_cycles,
                                    standalone.overall_cycles / nearnet.overall_cycles});
        }
    }
    return rows;
}

namespace {
constexpr uint16_t kPacketMagic = 0x4850;

void put_u16(std::vector<uint8_t>& out, uint16_t v) {
    out.push_back(uint8_t(v));
    out.push_back(uint8_t(v >> 8));
}

uint16_t get_u16(std::span<const uint8_t> b, size_t off) {
    return uint16_t(uint16_t(b[off]) | (uint16_t(b[off + 1]) << 8));
}
}  // namespace

size_t packet_count(size_t payload_words, const PacketFormat& fmt) {
    if (fmt.segment_words == 0) throw ParameterError("segment_words must be positive");
    return (payload_words + fmt.segment_words - 1) / fmt.segment_words;
}

std::vector<uint8_t> encapsulate(std::span<const uint64_t> payload, const PacketFormat& fmt) {
    if (fmt.header_bytes < 8) throw ParameterError("header must be at least 8 bytes");
    if (fmt.segment_words == 0 || fmt.segment_words > 0xffff)
        throw ParameterError("segment_words out of range");
    std::vector<uint8_t> out;
    size_t packets = packet_count(payload.size(), fmt);
    out.reserve(packets * fmt.header_bytes + payload.size() * 8);
    for (size_t p = 0; p < packets; ++p) {
        size_t begin = p * fmt.segment_words;
        size_t words = std::min(fmt.segment_words, payload.size() - begin);
        put_u16(out, kPacketMagic);
        put_u16(out, uint16_t(p & 0xffff));
        put_u16(out, uint16_t(words));
        put_u16(out, 0);
        out.resize(out.size() + fmt.header_bytes - 8, 0);
        for (size_t i = 0; i < words; ++i) {
            uint64_t w = payload[begin + i];
            for (int byte = 0; byte < 8; ++byte) out.push_back(uint8_t(w >> (8 * byte)));
        }
    }
    return out;
}

std::vector<uint64_t> decapsulate(std::span<const uint8_t> bytes, const PacketFormat& fmt) {
    if (fmt.header_bytes < 8) throw ParameterError("header must be at least 8 bytes");
    std::vector<uint64_t> out;
    size_t off = 0;
    size_t seq = 0;
    while (off < bytes.size()) {
        if (off + fmt.header_bytes > bytes.size())
            throw FormatError("truncated packet header", off);
        if (get_u16(bytes, off) != kPacketMagic) throw FormatError("bad packet magic", off);
        if (get_u16(bytes, off + 2) != (seq & 0xffff))
            throw FormatError("packet out of order", off + 2);
        size_t words = get_u16(bytes, off + 4);
        if (words == 0 || words > fmt.segment_words)
            throw FormatError("bad segment length", off + 4);
        off += fmt.header_bytes;
        if (off + words * 8 > bytes.size()) throw FormatError("truncated packet payload", off);
        for (size_t i = 0; i < words; ++i) {
            uint64_t w = 0;
            for (int byte = 0; byte < 8; ++byte)
                w |= uint64_t(bytes[off + 8 * i + byte]) << (8 * byte);
            out.push_back(w);
        }
        off += words * 8;
        ++seq;
    }
    return out;
}

int64_t ens(double lut, double ff, double dsp, double bram) {
    if (lut < 0 || ff < 0 || dsp < 0 || bram < 0)
        throw ParameterError("ens inputs must be nonnegative");
    return std::llround(dsp * 100.0 + bram * 196.0 + lut / 4.0 + ff / 2.0);
}

}  // namespace hhekit::netmodel

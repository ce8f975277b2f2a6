// SPDX-License-Identifier: Apache-2.0
#include <fstream>
#include <random>
#include <sstream>

#include "doctest.h"
#include "hhekit/accelsim.hpp"
#include "hhekit/errors.hpp"
#include "hhekit/rng.hpp"

using namespace hhekit;
using accelsim::Opcode;
using accelsim::Simulator;
using accelsim::Task;
using accelsim::Unit;

namespace {

const ckks::Context& sim_ctx() {
    static ckks::Context ctx{ckks::EncodingParams{}};
    return ctx;
}

bool conflicting(const Task& a, const Task& b) {
    auto hit = [](const std::vector<accelsim::Region>& xs, const std::vector<accelsim::Region>& ys) {
        for (const auto& x : xs)
            for (const auto& y : ys)
                if (x.overlaps(y)) return true;
        return false;
    };
    return hit(a.writes, b.writes) || hit(a.writes, b.reads) || hit(a.reads, b.writes);
}

bool intervals_overlap(const Task& a, const Task& b) {
    return a.start < b.finish && b.start < a.finish;
}

void check_hazard_soundness(const accelsim::CycleReport& report) {
    for (size_t i = 0; i < report.tasks.size(); ++i)
        for (size_t j = i + 1; j < report.tasks.size(); ++j)
            if (conflicting(report.tasks[i], report.tasks[j]))
                CHECK(!intervals_overlap(report.tasks[i], report.tasks[j]));
}

std::string random_program(std::mt19937_64& gen) {
    std::ostringstream p;
    p << "SET_MOD 0 " << sim_ctx().prime(0).q << "\n";
    auto off = [&] { return 64 * (gen() % 16); };
    auto len = [&] { return uint64_t(64) << (gen() % 3); };
    int ops = 4 + int(gen() % 12);
    int streams = 0;
    for (int i = 0; i < ops; ++i) {
        switch (gen() % 6) {
            case 0:
                p << "SAMPLE RAM3 " << off() << ' ' << len() << " tern s" << streams++ << "\n";
                break;
            case 1:
                p << "SAMPLE RAM4 " << off() << ' ' << len() << " gauss g" << streams++ << "\n";
                break;
            case 2:
                p << "MOVE raw RAM4 " << off() << " RAM3 " << off() << ' ' << len() << "\n";
                break;
            case 3:
                p << "PWADD b0 RAM3 " << off() << " RAM3 " << off() << " RAM4 " << off() << ' '
                  << len() << "\n";
                break;
            case 4:
                p << "MAC b0 RAM4 " << off() << " RAM3 " << off() << " RAM4 " << off() << ' '
                  << len() << "\n";
                break;
            case 5:
                p << "NTT RAM3 " << off() << " 64 0\n";
                break;
        }
    }
    return p.str();
}

}  // namespace

TEST_CASE("assembler accepts the format and reports line numbers") {
    auto prog = accelsim::assemble("SET_MOD 0 18014398508400641\n# comment\n\nNTT RAM3 0 64 0\n");
    REQUIRE(prog.size() == 2);
    CHECK(prog[0].op == Opcode::SET_MOD);
    CHECK(accelsim::is_config(prog[0].op));
    CHECK(prog[1].op == Opcode::NTT);
    CHECK(prog[1].line == 4);

    CHECK_THROWS_AS(accelsim::assemble("FROBNICATE 1 2\n"), FormatError);
    CHECK_THROWS_AS(accelsim::assemble("NTT RAM3 0\n"), FormatError);
    try {
        accelsim::assemble("\nNTT RAM3 0\n");
    } catch (const FormatError& e) {
        CHECK(e.offset() == 2);  // line number
    }
    Simulator bad_buf;
    CHECK_THROWS_AS(bad_buf.load_program_text("NTT NOPE 0 64 0\n"), FormatError);
}

TEST_CASE("empty program simulates to zero cycles") {
    Simulator sim;
    sim.load_program_text("");
    auto report = sim.run();
    CHECK(report.total_cycles == 0);
    CHECK(report.tasks.empty());

    std::ostringstream os;
    accelsim::trace_export(report, os);
    CHECK(os.str() == "task_id,unit,opcode,start,finish,read_set,write_set\n");
}

TEST_CASE("config-only program runs in zero cycles") {
    Simulator sim;
    sim.load_program_text("SET_MOD 0 18014398508400641\nSET_PKT 16 64\n");
    CHECK(sim.run().total_cycles == 0);
}

TEST_CASE("two samples on disjoint buffers overlap, RAW serializes") {
    Simulator sim;
    sim.load_program_text(
        "SAMPLE RAM3 0 1024 tern a\n"
        "SAMPLE RAM4 0 1024 tern b\n");
    auto report = sim.run();
    REQUIRE(report.tasks.size() == 2);
    CHECK(intervals_overlap(report.tasks[0], report.tasks[1]));  // two RSU lanes

    Simulator sim2(accelsim::Calibration::defaults(), {1});
    sim2.load_program_text(
        "SET_MOD 0 18014398508400641\n"
        "SAMPLE RAM3 0 64 tern a\n"
        "NTT RAM3 0 64 0\n");
    auto r2 = sim2.run();
    REQUIRE(r2.tasks.size() == 2);
    CHECK(r2.tasks[1].start >= r2.tasks[0].finish);  // NTT reads what RSU writes
}

TEST_CASE("conflicts stall only the younger task") {
    Simulator sim;
    sim.load_program_text(
        "SAMPLE RAM3 0 1024 tern a\n"
        "MOVE raw RAM4 0 RAM3 0 1024\n"   // RAW on RAM3[0,1024)
        "SAMPLE RAM4 4096 512 gauss c\n"  // independent, overtakes the MOVE
    );
    auto report = sim.run();
    REQUIRE(report.tasks.size() == 3);
    CHECK(report.tasks[1].start >= report.tasks[0].finish);
    CHECK(report.tasks[2].start < report.tasks[1].start);
    check_hazard_soundness(report);
}

TEST_CASE("WAR and WAW hazards respected") {
    Simulator sim;
    sim.load_program_text(
        "SAMPLE RAM3 0 2048 gauss g1\n"
        "MOVE raw RAM4 0 RAM3 0 2048\n"    // reads RAM3
        "SAMPLE RAM3 0 2048 tern t1\n"     // WAR with MOVE read, WAW with first sample
    );
    auto report = sim.run();
    check_hazard_soundness(report);
    CHECK(report.tasks[2].start >= report.tasks[1].finish);
}

TEST_CASE("built-in m2ct program matches the golden file and pins its size") {
    auto text = accelsim::ckks_m2ct_program(sim_ctx());
    auto prog = accelsim::assemble(text);
    CHECK(prog.size() == 55);  // 4 config + 51 functional

    std::ifstream golden(std::string(HHEKIT_SOURCE_DIR) + "/tests/golden/ckks_m2ct.prog");
    REQUIRE(golden.good());
    std::stringstream buf;
    buf << golden.rdbuf();
    CHECK(text == buf.str());
}

TEST_CASE("ckks workflow: cycle targets, overlap, functional bit-identity") {
    const auto& ctx = sim_ctx();
    std::vector<uint8_t> kg_seed = {9, 9};
    auto keys = ckks::keygen(kg_seed, ctx);

    std::mt19937_64 gen(77);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    std::vector<std::complex<double>> msg(4096);
    for (auto& m : msg) m = {unit(gen), unit(gen)};

    std::vector<uint8_t> enc_seed = {4, 2};
    auto result = accelsim::run_ckks_workflow(ctx, keys, msg, enc_seed);

    // Table targets: 1.79 ms and 0.29 ms at 200 MHz, +/- 15%.
    CHECK(result.m2ct.compute_cycles > uint64_t(358000 * 0.85));
    CHECK(result.m2ct.compute_cycles < uint64_t(358000 * 1.15));
    CHECK(result.ct2m.compute_cycles > uint64_t(58000 * 0.85));
    CHECK(result.ct2m.compute_cycles < uint64_t(58000 * 1.15));
    CHECK(result.ct2m.compute_cycles * 4 < result.m2ct.compute_cycles);

    // Out-of-order dispatch realizes overlap on the workflow program.
    CHECK(result.m2ct.total_cycles < accelsim::in_order_total(result.m2ct.tasks));
    check_hazard_soundness(result.m2ct);
    check_hazard_soundness(result.ct2m);

    // The simulator's data path is the library's data path, bit for bit.
    auto ct_lib = ckks::encrypt(ckks::encode(msg, ctx), keys, ctx, enc_seed);
    for (size_t b = 0; b < 3; ++b) {
        CHECK(result.ct.ct0[b].coeffs == ct_lib.ct0[b].coeffs);
        CHECK(result.ct.ct1[b].coeffs == ct_lib.ct1[b].coeffs);
    }
    auto decoded_lib = ckks::decode(ckks::decrypt(ct_lib, keys, ctx), ctx);
    for (size_t i = 0; i < decoded_lib.size(); ++i) {
        CHECK(result.decoded[i].real() == doctest::Approx(decoded_lib[i].real()).epsilon(1e-9));
        CHECK(std::abs(result.decoded[i] - msg[i]) < 0x1p-12);
    }
}

TEST_CASE("rubato schedule: cycle targets, ordering, keystream identity") {
    std::vector<uint8_t> nonce(16, 0x3c);
    uint64_t targets[3] = {1235, 2087, 3036};
    uint64_t got[3];
    int idx = 0;
    for (auto preset : {rubato::Preset::k128S, rubato::Preset::k128M, rubato::Preset::k128L}) {
        auto params = rubato::Params::get(preset);
        auto key = rubato::derive_key(std::vector<uint8_t>{1, 2, 3}, params);
        auto res = accelsim::run_rubato_schedule(preset, key, nonce, 0);
        got[idx] = res.report.total_cycles;
        CHECK(double(res.report.total_cycles) > 0.85 * double(targets[idx]));
        CHECK(double(res.report.total_cycles) < 1.15 * double(targets[idx]));
        CHECK(res.keystream == rubato::keystream(key, nonce, 0, params));
        check_hazard_soundness(res.report);

        // Mix tasks read and write the state exactly once: one n-word region each.
        int mix_tasks = 0;
        for (const auto& t : res.report.tasks) {
            if (t.op == Opcode::MAC && (t.detail == "mixrow" || t.detail == "mixcol")) {
                ++mix_tasks;
                REQUIRE(t.reads.size() == 1);
                REQUIRE(t.writes.size() == 1);
                CHECK(t.reads[0].len == params.n);
                CHECK(t.writes[0].len == params.n);
                CHECK(t.reads[0].buf == t.writes[0].buf);
                CHECK(t.reads[0].off == t.writes[0].off);
            }
            if (t.op == Opcode::MAC && t.detail == "feistel") {
                // (n-1) MACs drain in ceil((n-1)/2) cycles plus the pipeline depth.
                CHECK(t.exec_core == (params.n - 1 + 1) / 2 + 7);
            }
        }
        CHECK(mix_tasks == int(2 * params.rounds));

        // Constants for round i are produced while round i-1 computes.
        bool xof_overlaps = false;
        for (const auto& t : res.report.tasks)
            if (t.op == Opcode::SAMPLE)
                for (const auto& u : res.report.tasks)
                    if (u.unit == Unit::UCU && intervals_overlap(t, u)) xof_overlaps = true;
        CHECK(xof_overlaps);
        ++idx;
    }
    CHECK(got[0] < got[1]);
    CHECK(got[1] < got[2]);
}

TEST_CASE("random programs: hazard soundness, in-order bound, deterministic replay") {
    std::mt19937_64 gen(2024);
    for (int trial = 0; trial < 100; ++trial) {
        auto text = random_program(gen);
        Simulator a(accelsim::Calibration::defaults(), {uint8_t(trial)});
        a.set_host_buffer("h", std::vector<uint64_t>(4096, 7));
        a.load_program_text(text);
        auto ra = a.run();

        check_hazard_soundness(ra);
        CHECK(ra.total_cycles <= accelsim::in_order_total(ra.tasks));
        for (const auto& t : ra.tasks) {
            CHECK(t.finish <= ra.total_cycles);
            CHECK(t.start <= t.finish);
        }

        Simulator b(accelsim::Calibration::defaults(), {uint8_t(trial)});
        b.set_host_buffer("h", std::vector<uint64_t>(4096, 7));
        b.load_program_text(text);
        auto rb = b.run();
        REQUIRE(ra.tasks.size() == rb.tasks.size());
        for (size_t i = 0; i < ra.tasks.size(); ++i) {
            CHECK(ra.tasks[i].start == rb.tasks[i].start);
            CHECK(ra.tasks[i].finish == rb.tasks[i].finish);
        }
        CHECK(ra.total_cycles == rb.total_cycles);
    }
}

TEST_CASE("trace export round trips through re-simulation") {
    std::mt19937_64 gen(31337);
    auto text = random_program(gen);
    Simulator a;
    a.set_host_buffer("h", std::vector<uint64_t>(4096, 1));
    a.load_program_text(text);
    auto ra = a.run();
    std::ostringstream csv_a;
    accelsim::trace_export(ra, csv_a);

    Simulator b;
    b.set_host_buffer("h", std::vector<uint64_t>(4096, 1));
    b.load_program_text(text);
    auto rb = b.run();
    std::ostringstream csv_b;
    accelsim::trace_export(rb, csv_b);
    std::string text_a = csv_a.str();
    CHECK(text_a == csv_b.str());

    size_t lines = size_t(std::count(text_a.begin(), text_a.end(), '\n'));
    CHECK(lines == ra.tasks.size() + 1);
}

TEST_CASE("send/recv move data through packets") {
    Simulator tx;
    tx.set_host_buffer("payload", std::vector<uint64_t>{10, 20, 30, 40});
    tx.load_program_text(
        "SET_PKT 16 2\n"
        "DMA_LOAD RAM3 0 payload 0 4\n"
        "MOVE raw NIC 0 RAM3 0 4\n"
        "SEND NIC 0 4\n");
    tx.run();
    auto bytes = tx.output_packets();
    CHECK(!bytes.empty());

    Simulator rx;
    rx.set_input_packets(bytes);
    rx.load_program_text(
        "SET_PKT 16 2\n"
        "RECV RAM4 0 4\n"
        "DMA_STORE out 0 RAM4 0 4\n");
    rx.run();
    CHECK(rx.host_buffer("out") == std::vector<uint64_t>{10, 20, 30, 40});
}

TEST_CASE("simulator rejects double runs and bad regions") {
    Simulator sim;
    sim.load_program_text("SAMPLE RAM3 0 16 tern x\n");
    sim.run();
    CHECK_THROWS_AS(sim.run(), StateError);

    Simulator sim2;
    CHECK_THROWS_AS(sim2.load_program_text("SAMPLE RAM6 0 999999 tern x\n"), FormatError);
}

TEST_CASE("calibration file round trips against defaults") {
    auto file = accelsim::Calibration::from_json_file(std::string(HHEKIT_SOURCE_DIR) +
                                                      "/data/calibration.json");
    auto defaults = accelsim::Calibration::defaults();
    CHECK(file.butterfly_rate == defaults.butterfly_rate);
    CHECK(file.mix_mac_rate == defaults.mix_mac_rate);
    CHECK(file.ucu_pipeline_fill == defaults.ucu_pipeline_fill);
    CHECK(file.ucu_task_overhead == defaults.ucu_task_overhead);
    CHECK(file.rc_cycles_per_word == defaults.rc_cycles_per_word);
}

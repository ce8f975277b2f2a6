// SPDX-License-Identifier: Apache-2.0
#ifndef HHEKIT_ACCELSIM_HPP
#define HHEKIT_ACCELSIM_HPP

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "hhekit/ckks.hpp"
#include "hhekit/field.hpp"
#include "hhekit/netmodel.hpp"
#include "hhekit/rubato.hpp"
#include "hhekit/transforms.hpp"

namespace hhekit::accelsim {

enum class Unit { DAU, RSU, UCU, DTU, NIU };
const char* unit_name(Unit u);

enum class Opcode {
    SET_MOD, SET_RUBATO, SET_PKT,                    // configuration
    DMA_LOAD, DMA_STORE, SAMPLE, NTT, INTT, FFT, IFFT,
    PWMUL, PWADD, MAC, MOVE, SEND, RECV              // functionality
};
const char* opcode_name(Opcode op);
bool is_config(Opcode op);

// Named on-chip buffers. RAM0/RAM1 form the key cluster with dual-domain
// backups, RAM3/RAM4 the ping-pong transform cluster, RAM5/RAM6 hold twiddle
// factors, NIC is the network staging buffer.
enum Buffer : int { RAM0 = 0, RAM1, RAM3, RAM4, RAM5, RAM6, NIC, kBufferCount };
const char* buffer_name(int buf);
int parse_buffer(const std::string& name);
uint64_t buffer_capacity(int buf);

struct Region {
    int buf = 0;
    uint64_t off = 0;
    uint64_t len = 0;
    bool overlaps(const Region& other) const {
        return buf == other.buf && off < other.off + other.len && other.off < off + len;
    }
};

struct Instruction {
    Opcode op;
    std::vector<std::string> args;
    int line = 0;
};

// Parses the textual program format: one `OPCODE arg...` per line, `#` comments.
// Unknown opcodes or wrong operand counts raise FormatError with the line.
std::vector<Instruction> assemble(const std::string& program_text);

struct Task {
    size_t id = 0;
    Unit unit = Unit::UCU;
    Opcode op = Opcode::MAC;
    std::string detail;
    std::vector<Region> reads;
    std::vector<Region> writes;
    uint64_t duration = 0;
    uint64_t exec_core = 0;  // duration minus fill and dispatch overhead
    uint64_t issue = 0;      // program order
    uint64_t start = 0;
    uint64_t finish = 0;
};

// The shared compute datapath: two butterfly units, each with a 3-stage
// multiplier feeding a 4-stage reduction, processing paired coefficients.
struct PipelineSpec {
    unsigned bfu_count = 2;
    unsigned reduction_stages = 4;
    unsigned multiplier_stages = 3;
    unsigned lanes_per_bfu = 2;

    unsigned depth() const { return reduction_stages + multiplier_stages; }
};

// Per-unit rate and overhead constants; the shipped calibration file carries
// the same values so targets can be re-fit without code changes.
struct Calibration {
    PipelineSpec pipeline;
    double butterfly_rate = 2.0;   // butterflies/cycle across the BFU pair
    double pw_rate = 2.0;          // pointwise ops/cycle
    double mix_mac_rate = 1.0;     // MACs/cycle during Mix (shared state port)
    double intt_scale_rate = 1.0;  // words/cycle for the n^-1 pass
    double dma_words_per_cycle = 1.0;
    double dtu_words_per_cycle = 2.0;
    double niu_words_per_cycle = 1.0;
    double tern_cycles_per_word = 1.0;
    double gauss_cycles_per_word = 2.0;
    double unif_cycles_per_word = 1.0;
    double rc_cycles_per_word = 3.0;   // XOF squeeze + rejection
    uint64_t ucu_pipeline_fill = PipelineSpec{}.depth();
    uint64_t ucu_task_overhead = 16;
    uint64_t dau_overhead = 8;
    uint64_t rsu_overhead = 4;
    uint64_t dtu_overhead = 2;
    uint64_t niu_overhead = 8;

    static Calibration defaults();
    static Calibration from_json_file(const std::string& path);
};

struct UnitStats {
    uint64_t busy_cycles = 0;
    uint64_t tasks = 0;
};

struct CycleReport {
    uint64_t total_cycles = 0;
    uint64_t compute_cycles = 0;  // finish of the last crypto-core (UCU) task
    std::map<Unit, UnitStats> units;
    std::vector<Task> tasks;
};

uint64_t in_order_total(const std::vector<Task>& tasks);

void trace_export(const CycleReport& report, std::ostream& os);

class Simulator {
public:
    explicit Simulator(Calibration cal = Calibration::defaults(),
                       std::vector<uint8_t> seed = {0});

    void set_host_buffer(const std::string& name, std::vector<uint64_t> data);
    const std::vector<uint64_t>& host_buffer(const std::string& name) const;
    void set_input_packets(std::vector<uint8_t> bytes);
    const std::vector<uint8_t>& output_packets() const { return output_packets_; }
    std::vector<uint64_t> read_buffer(int buf, uint64_t off, uint64_t len) const;
    void preload_buffer(int buf, uint64_t off, const std::vector<uint64_t>& words);

    void load_program(const std::vector<Instruction>& program);
    void load_program_text(const std::string& text) { load_program(assemble(text)); }

    // Decodes pending instructions into tasks and advances one cycle of the
    // hazard-aware out-of-order dispatch. run() loops it to completion.
    bool dispatch_step();
    CycleReport run();

    const Calibration& calibration() const { return cal_; }

private:
    struct Config {
        std::vector<field::PrimeSpec> moduli;
        std::optional<rubato::Params> rubato;
        std::vector<uint8_t> nonce;
        uint64_t counter = 0;
        netmodel::PacketFormat pkt;
    };

    Task decode(const Instruction& ins, size_t id);
    void execute(const Task& task, const Instruction& ins);
    const transforms::NttTable& ntt_table(size_t basis, size_t n);
    const transforms::FftTable& fft_table(size_t n);
    const field::PrimeSpec& modulus(const std::string& field_token) const;

    Calibration cal_;
    std::vector<uint8_t> seed_;
    Config cfg_;
    std::vector<std::vector<uint64_t>> buffers_;
    std::map<std::string, std::vector<uint64_t>> host_;
    std::vector<uint8_t> input_packets_;
    std::vector<uint8_t> output_packets_;

    std::vector<Instruction> pending_instructions_;
    std::vector<Task> tasks_;       // decoded, program order
    std::vector<size_t> waiting_;   // indices not yet started
    std::vector<size_t> in_flight_;
    std::vector<int> unit_free_;
    uint64_t cycle_ = 0;
    bool ran_ = false;

    std::map<std::pair<uint64_t, size_t>, std::shared_ptr<transforms::NttTable>> ntt_tables_;
    std::map<size_t, std::shared_ptr<transforms::FftTable>> fft_tables_;
};

// --- built-in workflows ---

// Message-to-ciphertext program for N=8192 over three bases (sampling, packing
// IFFT, per-basis NTT and pointwise combine with the resident public key,
// write-back into the key buffer, packetization into NIC).
std::string ckks_m2ct_program(const ckks::Context& ctx);
// Ciphertext-to-message program over basis 0 only.
std::string ckks_ct2m_program(const ckks::Context& ctx);
std::string rubato_program(const rubato::Params& params, const std::string& nonce_hex,
                           uint64_t counter);

struct CkksWorkflowResult {
    CycleReport m2ct;
    CycleReport ct2m;
    ckks::Ciphertext ct;                        // produced by the m-to-ct run
    std::vector<std::complex<double>> decoded;  // produced by the ct-to-m run
};

CkksWorkflowResult run_ckks_workflow(const ckks::Context& ctx, const ckks::KeyMaterial& keys,
                                     const std::vector<std::complex<double>>& message,
                                     const std::vector<uint8_t>& enc_seed,
                                     const Calibration& cal = Calibration::defaults());

struct RubatoScheduleResult {
    CycleReport report;
    std::vector<uint64_t> keystream;  // from the simulator's functional path
};

RubatoScheduleResult run_rubato_schedule(rubato::Preset preset, const rubato::State& key,
                                         const std::vector<uint8_t>& nonce, uint64_t counter,
                                         const Calibration& cal = Calibration::defaults());

}  // namespace hhekit::accelsim

#endif  // HHEKIT_ACCELSIM_HPP

// SPDX-License-Identifier: Apache-2.0
#include "hhekit/accelsim.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>

#include "hhekit/errors.hpp"
#include "hhekit/rng.hpp"
#include "json.hpp"

namespace hhekit::accelsim {

const char* unit_name(Unit u) {
    switch (u) {
        case Unit::DAU: return "DAU";
        case Unit::RSU: return "RSU";
        case Unit::UCU: return "UCU";
        case Unit::DTU: return "DTU";
        case Unit::NIU: return "NIU";
    }
    return "?";
}

const char* opcode_name(Opcode op) {
    switch (op) {
        case Opcode::SET_MOD: return "SET_MOD";
        case Opcode::SET_RUBATO: return "SET_RUBATO";
        case Opcode::SET_PKT: return "SET_PKT";
        case Opcode::DMA_LOAD: return "DMA_LOAD";
        case Opcode::DMA_STORE: return "DMA_STORE";
        case Opcode::SAMPLE: return "SAMPLE";
        case Opcode::NTT: return "NTT";
        case Opcode::INTT: return "INTT";
        case Opcode::FFT: return "FFT";
        case Opcode::IFFT: return "IFFT";
        case Opcode::PWMUL: return "PWMUL";
        case Opcode::PWADD: return "PWADD";
        case Opcode::MAC: return "MAC";
        case Opcode::MOVE: return "MOVE";
        case Opcode::SEND: return "SEND";
        case Opcode::RECV: return "RECV";
    }
    return "?";
}

bool is_config(Opcode op) {
    return op == Opcode::SET_MOD || op == Opcode::SET_RUBATO || op == Opcode::SET_PKT;
}

const char* buffer_name(int buf) {
    static const char* names[] = {"RAM0", "RAM1", "RAM3", "RAM4", "RAM5", "RAM6", "NIC"};
    if (buf < 0 || buf >= kBufferCount) return "?";
    return names[buf];
}

int parse_buffer(const std::string& name) {
    for (int i = 0; i < kBufferCount; ++i)
        if (name == buffer_name(i)) return i;
    throw FormatError("unknown buffer " + name, 0);
}

uint64_t buffer_capacity(int buf) {
    switch (buf) {
        case RAM0: case RAM1: return 4 * 8192;
        case RAM3: return 8 * 8192;
        case RAM4: return 16 * 8192;
        case RAM5: return 2 * 8192;
        case RAM6: return 8192;
        case NIC: return 8 * 8192;
        default: return 0;
    }
}

namespace {

const std::map<std::string, Opcode>& opcode_map() {
    static const std::map<std::string, Opcode> m = {
        {"SET_MOD", Opcode::SET_MOD},   {"SET_RUBATO", Opcode::SET_RUBATO},
        {"SET_PKT", Opcode::SET_PKT},   {"DMA_LOAD", Opcode::DMA_LOAD},
        {"DMA_STORE", Opcode::DMA_STORE}, {"SAMPLE", Opcode::SAMPLE},
        {"NTT", Opcode::NTT},           {"INTT", Opcode::INTT},
        {"FFT", Opcode::FFT},           {"IFFT", Opcode::IFFT},
        {"PWMUL", Opcode::PWMUL},       {"PWADD", Opcode::PWADD},
        {"MAC", Opcode::MAC},           {"MOVE", Opcode::MOVE},
        {"SEND", Opcode::SEND},         {"RECV", Opcode::RECV},
    };
    return m;
}

// Valid operand counts per opcode; MAC and MOVE have the binary and unary forms.
bool arg_count_ok(Opcode op, size_t n) {
    switch (op) {
        case Opcode::SET_MOD: return n == 2;
        case Opcode::SET_RUBATO: return n == 3;
        case Opcode::SET_PKT: return n == 2;
        case Opcode::DMA_LOAD: return n == 5;
        case Opcode::DMA_STORE: return n == 5;
        case Opcode::SAMPLE: return n == 5;
        case Opcode::NTT: case Opcode::INTT: return n == 4;
        case Opcode::FFT: case Opcode::IFFT: return n == 3;
        case Opcode::PWMUL: case Opcode::PWADD: return n == 8;
        case Opcode::MAC: return n == 8 || n == 6;
        case Opcode::MOVE: return n == 6;
        case Opcode::SEND: case Opcode::RECV: return n == 3;
    }
    return false;
}

uint64_t parse_u64(const std::string& s, int line) {
    try {
        size_t pos = 0;
        uint64_t v = std::stoull(s, &pos);
        if (pos != s.size()) throw std::invalid_argument("trailing");
        return v;
    } catch (const std::exception&) {
        throw FormatError("bad integer operand '" + s + "'", size_t(line));
    }
}

uint64_t ceil_div_rate(double amount, double rate) {
    return static_cast<uint64_t>(std::ceil(amount / rate));
}

uint64_t log2_of(uint64_t n, int line) {
    if (n < 2 || !std::has_single_bit(n)) throw FormatError("length must be a power of two", size_t(line));
    return std::countr_zero(n);
}

int64_t rhe_shift(int64_t v, unsigned bits) {
    if (bits == 0) return v;
    int64_t q = v >> bits;
    int64_t rem = v - (q << bits);
    int64_t half = int64_t(1) << (bits - 1);
    if (rem > half || (rem == half && (q & 1))) ++q;
    return q;
}

constexpr unsigned kScaleShift = 28;  // 2^54 scale over the 26-bit fraction

}  // namespace

std::vector<Instruction> assemble(const std::string& program_text) {
    std::vector<Instruction> out;
    std::istringstream in(program_text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        std::istringstream ls(line);
        std::string opname;
        if (!(ls >> opname)) continue;
        auto it = opcode_map().find(opname);
        if (it == opcode_map().end())
            throw FormatError("unknown opcode '" + opname + "' at line " + std::to_string(lineno),
                              size_t(lineno));
        Instruction ins;
        ins.op = it->second;
        ins.line = lineno;
        std::string arg;
        while (ls >> arg) ins.args.push_back(arg);
        if (!arg_count_ok(ins.op, ins.args.size()))
            throw FormatError("bad operand count for " + opname + " at line " + std::to_string(lineno),
                              size_t(lineno));
        out.push_back(std::move(ins));
    }
    return out;
}

Calibration Calibration::defaults() { return Calibration{}; }

Calibration Calibration::from_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParameterError("cannot open calibration file " + path);
    nlohmann::json j;
    in >> j;
    Calibration c;
    const auto& a = j.at("accel");
    auto get = [&](const char* key, auto& fieldref) {
        if (a.contains(key)) fieldref = a.at(key).get<std::decay_t<decltype(fieldref)>>();
    };
    get("butterfly_rate", c.butterfly_rate);
    get("pw_rate", c.pw_rate);
    get("mix_mac_rate", c.mix_mac_rate);
    get("intt_scale_rate", c.intt_scale_rate);
    get("dma_words_per_cycle", c.dma_words_per_cycle);
    get("dtu_words_per_cycle", c.dtu_words_per_cycle);
    get("niu_words_per_cycle", c.niu_words_per_cycle);
    get("tern_cycles_per_word", c.tern_cycles_per_word);
    get("gauss_cycles_per_word", c.gauss_cycles_per_word);
    get("unif_cycles_per_word", c.unif_cycles_per_word);
    get("rc_cycles_per_word", c.rc_cycles_per_word);
    get("ucu_pipeline_fill", c.ucu_pipeline_fill);
    get("ucu_task_overhead", c.ucu_task_overhead);
    get("dau_overhead", c.dau_overhead);
    get("rsu_overhead", c.rsu_overhead);
    get("dtu_overhead", c.dtu_overhead);
    get("niu_overhead", c.niu_overhead);
    return c;
}

uint64_t in_order_total(const std::vector<Task>& tasks) {
    uint64_t total = 0;
    for (const auto& t : tasks) total += t.duration;
    return total;
}

namespace {
std::string regions_to_string(const std::vector<Region>& regions) {
    std::string s;
    for (size_t i = 0; i < regions.size(); ++i) {
        if (i) s += '|';
        s += buffer_name(regions[i].buf);
        s += '[' + std::to_string(regions[i].off) + '+' + std::to_string(regions[i].len) + ')';
    }
    return s;
}
}  // namespace

void trace_export(const CycleReport& report, std::ostream& os) {
    os << "task_id,unit,opcode,start,finish,read_set,write_set\n";
    for (const auto& t : report.tasks) {
        os << t.id << ',' << unit_name(t.unit) << ',' << opcode_name(t.op) << ',' << t.start << ','
           << t.finish << ',' << regions_to_string(t.reads) << ',' << regions_to_string(t.writes)
           << '\n';
    }
}

Simulator::Simulator(Calibration cal, std::vector<uint8_t> seed)
    : cal_(cal), seed_(std::move(seed)) {
    buffers_.resize(kBufferCount);
    for (int b = 0; b < kBufferCount; ++b) buffers_[b].assign(buffer_capacity(b), 0);
    unit_free_.assign(5, 1);
    unit_free_[size_t(Unit::RSU)] = 2;  // two sampling lanes
}

void Simulator::set_host_buffer(const std::string& name, std::vector<uint64_t> data) {
    host_[name] = std::move(data);
}

const std::vector<uint64_t>& Simulator::host_buffer(const std::string& name) const {
    auto it = host_.find(name);
    if (it == host_.end()) throw StateError("host buffer '" + name + "' not set");
    return it->second;
}

void Simulator::set_input_packets(std::vector<uint8_t> bytes) { input_packets_ = std::move(bytes); }

std::vector<uint64_t> Simulator::read_buffer(int buf, uint64_t off, uint64_t len) const {
    if (buf < 0 || buf >= kBufferCount || off + len > buffer_capacity(buf))
        throw ContractError("buffer read out of range");
    return {buffers_[buf].begin() + long(off), buffers_[buf].begin() + long(off + len)};
}

void Simulator::preload_buffer(int buf, uint64_t off, const std::vector<uint64_t>& words) {
    if (buf < 0 || buf >= kBufferCount || off + words.size() > buffer_capacity(buf))
        throw ContractError("buffer preload out of range");
    std::copy(words.begin(), words.end(), buffers_[buf].begin() + long(off));
}

const field::PrimeSpec& Simulator::modulus(const std::string& token) const {
    if (token == "t") {
        if (!cfg_.rubato) throw StateError("rubato field used before SET_RUBATO");
        return cfg_.rubato->t.spec;
    }
    std::string digits = token;
    if (!digits.empty() && digits[0] == 'b') digits = digits.substr(1);
    size_t idx = std::stoul(digits);
    if (idx >= cfg_.moduli.size()) throw StateError("modulus " + token + " not configured");
    return cfg_.moduli[idx];
}

const transforms::NttTable& Simulator::ntt_table(size_t basis, size_t n) {
    const auto& spec = cfg_.moduli.at(basis);
    auto key = std::make_pair(spec.q, n);
    auto it = ntt_tables_.find(key);
    if (it == ntt_tables_.end())
        it = ntt_tables_
                 .emplace(key, std::make_shared<transforms::NttTable>(
                                   transforms::NttTable::make(spec, n)))
                 .first;
    return *it->second;
}

const transforms::FftTable& Simulator::fft_table(size_t n) {
    auto it = fft_tables_.find(n);
    if (it == fft_tables_.end())
        it = fft_tables_.emplace(n, std::make_shared<transforms::FftTable>(transforms::FftTable::make(n)))
                 .first;
    return *it->second;
}

void Simulator::load_program(const std::vector<Instruction>& program) {
    if (ran_) throw StateError("simulator already ran; use a fresh instance");
    for (const auto& ins : program) {
        if (is_config(ins.op)) {
            // Configuration writes the parameter registers immediately at decode.
            if (ins.op == Opcode::SET_MOD) {
                size_t idx = parse_u64(ins.args[0], ins.line);
                uint64_t q = parse_u64(ins.args[1], ins.line);
                if (cfg_.moduli.size() <= idx) cfg_.moduli.resize(idx + 1);
                cfg_.moduli[idx] = field::PrimeSpec::from_q(q, 8192);
            } else if (ins.op == Opcode::SET_RUBATO) {
                cfg_.rubato = rubato::Params::parse(ins.args[0]);
                cfg_.nonce = rng::parse_hex(ins.args[1]);
                cfg_.counter = parse_u64(ins.args[2], ins.line);
            } else {
                cfg_.pkt.header_bytes = parse_u64(ins.args[0], ins.line);
                cfg_.pkt.segment_words = parse_u64(ins.args[1], ins.line);
            }
            continue;
        }
        Task task = decode(ins, tasks_.size());
        task.issue = tasks_.size();
        for (const auto& r : task.reads)
            if (r.off + r.len > buffer_capacity(r.buf))
                throw FormatError("read region exceeds " + std::string(buffer_name(r.buf)) +
                                      " at line " + std::to_string(ins.line),
                                  size_t(ins.line));
        for (const auto& r : task.writes)
            if (r.off + r.len > buffer_capacity(r.buf))
                throw FormatError("write region exceeds " + std::string(buffer_name(r.buf)) +
                                      " at line " + std::to_string(ins.line),
                                  size_t(ins.line));
        waiting_.push_back(tasks_.size());
        tasks_.push_back(std::move(task));
        pending_instructions_.push_back(ins);
    }
}

Task Simulator::decode(const Instruction& ins, size_t id) {
    Task t;
    t.id = id;
    t.op = ins.op;
    const auto& a = ins.args;
    auto buf_at = [&](size_t i) { return parse_buffer(a[i]); };
    auto num_at = [&](size_t i) { return parse_u64(a[i], ins.line); };

    switch (ins.op) {
        case Opcode::DMA_LOAD: {
            t.unit = Unit::DAU;
            uint64_t len = num_at(4);
            t.writes = {{buf_at(0), num_at(1), len}};
            t.detail = a[2];
            t.duration = cal_.dau_overhead + ceil_div_rate(double(len), cal_.dma_words_per_cycle);
            break;
        }
        case Opcode::DMA_STORE: {
            t.unit = Unit::DAU;
            uint64_t len = num_at(4);
            t.reads = {{buf_at(2), num_at(3), len}};
            t.detail = a[0];
            t.duration = cal_.dau_overhead + ceil_div_rate(double(len), cal_.dma_words_per_cycle);
            break;
        }
        case Opcode::SAMPLE: {
            t.unit = Unit::RSU;
            uint64_t len = num_at(2);
            t.writes = {{buf_at(0), num_at(1), len}};
            const std::string& dist = a[3];
            double cpw;
            if (dist == "tern")
                cpw = cal_.tern_cycles_per_word;
            else if (dist == "gauss")
                cpw = cal_.gauss_cycles_per_word;
            else if (dist.rfind("unif", 0) == 0)
                cpw = cal_.unif_cycles_per_word;
            else if (dist == "rc")
                cpw = cal_.rc_cycles_per_word;
            else
                throw FormatError("unknown distribution '" + dist + "' at line " +
                                      std::to_string(ins.line),
                                  size_t(ins.line));
            t.detail = dist + ":" + a[4];
            t.duration = cal_.rsu_overhead + ceil_div_rate(double(len) * cpw, 1.0);
            break;
        }
        case Opcode::NTT:
        case Opcode::INTT: {
            t.unit = Unit::UCU;
            uint64_t len = num_at(2);
            uint64_t stages = log2_of(len, ins.line);
            Region r{buf_at(0), num_at(1), len};
            t.reads = {r, {RAM6, 0, buffer_capacity(RAM6)}};
            t.writes = {r};
            t.detail = "b" + a[3];
            t.exec_core = cal_.ucu_pipeline_fill +
                          ceil_div_rate(double(len / 2 * stages), cal_.butterfly_rate);
            if (ins.op == Opcode::INTT)
                t.exec_core += ceil_div_rate(double(len), cal_.intt_scale_rate);
            t.duration = t.exec_core + cal_.ucu_task_overhead;
            break;
        }
        case Opcode::FFT:
        case Opcode::IFFT: {
            t.unit = Unit::UCU;
            uint64_t len = num_at(2);
            uint64_t stages = log2_of(len, ins.line);
            Region r{buf_at(0), num_at(1), len};
            t.reads = {r, {RAM5, 0, buffer_capacity(RAM5)}};
            t.writes = {r};
            t.exec_core = cal_.ucu_pipeline_fill +
                          ceil_div_rate(double(len / 2 * stages), cal_.butterfly_rate);
            t.duration = t.exec_core + cal_.ucu_task_overhead;
            break;
        }
        case Opcode::PWMUL:
        case Opcode::PWADD: {
            t.unit = Unit::UCU;
            uint64_t len = num_at(7);
            t.reads = {{buf_at(3), num_at(4), len}, {buf_at(5), num_at(6), len}};
            t.writes = {{buf_at(1), num_at(2), len}};
            t.detail = a[0];
            t.exec_core = cal_.ucu_pipeline_fill + ceil_div_rate(double(len), cal_.pw_rate);
            t.duration = t.exec_core + cal_.ucu_task_overhead;
            break;
        }
        case Opcode::MAC: {
            t.unit = Unit::UCU;
            t.detail = a[0];
            if (a.size() == 8) {
                uint64_t len = num_at(7);
                Region dst{buf_at(1), num_at(2), len};
                t.reads = {dst, {buf_at(3), num_at(4), len}, {buf_at(5), num_at(6), len}};
                t.writes = {dst};
                t.exec_core = cal_.ucu_pipeline_fill + ceil_div_rate(double(len), cal_.pw_rate);
            } else {
                uint64_t len = num_at(5);
                Region dst{buf_at(1), num_at(2), len};
                Region src{buf_at(3), num_at(4), len};
                t.reads = {src};
                t.writes = {dst};
                if (a[0] == "feistel") {
                    t.exec_core = cal_.ucu_pipeline_fill +
                                  ceil_div_rate(double(len - 1), cal_.pw_rate);
                } else if (a[0] == "mixrow" || a[0] == "mixcol") {
                    if (!cfg_.rubato)
                        throw FormatError("mix before SET_RUBATO at line " + std::to_string(ins.line),
                                          size_t(ins.line));
                    t.exec_core = cal_.ucu_pipeline_fill +
                                  ceil_div_rate(double(len) * double(cfg_.rubato->v),
                                                cal_.mix_mac_rate);
                } else {
                    throw FormatError("unknown MAC mode '" + a[0] + "' at line " +
                                          std::to_string(ins.line),
                                      size_t(ins.line));
                }
            }
            t.duration = t.exec_core + cal_.ucu_task_overhead;
            break;
        }
        case Opcode::MOVE: {
            t.unit = Unit::DTU;
            uint64_t len = num_at(5);
            const std::string& mode = a[0];
            uint64_t in_words = len, out_words = len;
            if (mode.rfind("enc", 0) == 0)
                out_words = 2 * len;
            else if (mode.rfind("dec", 0) == 0)
                in_words = 2 * len;
            else if (mode != "raw" && mode.rfind("sgn", 0) != 0)
                throw FormatError("unknown MOVE mode '" + mode + "' at line " +
                                      std::to_string(ins.line),
                                  size_t(ins.line));
            t.reads = {{buf_at(3), num_at(4), in_words}};
            t.writes = {{buf_at(1), num_at(2), out_words}};
            t.detail = mode;
            t.duration = cal_.dtu_overhead +
                         ceil_div_rate(double(std::max(in_words, out_words)), cal_.dtu_words_per_cycle);
            break;
        }
        case Opcode::SEND: {
            t.unit = Unit::NIU;
            uint64_t len = num_at(2);
            t.reads = {{buf_at(0), num_at(1), len}};
            size_t pkts = netmodel::packet_count(len, cfg_.pkt);
            t.duration = cal_.niu_overhead + ceil_div_rate(double(len), cal_.niu_words_per_cycle) +
                         ceil_div_rate(double(pkts * cfg_.pkt.header_bytes), 8.0);
            break;
        }
        case Opcode::RECV: {
            t.unit = Unit::NIU;
            uint64_t len = num_at(2);
            t.writes = {{buf_at(0), num_at(1), len}};
            size_t pkts = netmodel::packet_count(len, cfg_.pkt);
            t.duration = cal_.niu_overhead + ceil_div_rate(double(len), cal_.niu_words_per_cycle) +
                         ceil_div_rate(double(pkts * cfg_.pkt.header_bytes), 8.0);
            break;
        }
        default:
            throw FormatError("config opcode decoded as task", size_t(ins.line));
    }
    return t;
}

void Simulator::execute(const Task& task, const Instruction& ins) {
    const auto& a = ins.args;
    auto buf_at = [&](size_t i) { return parse_buffer(a[i]); };
    auto num_at = [&](size_t i) { return parse_u64(a[i], ins.line); };

    switch (ins.op) {
        case Opcode::DMA_LOAD: {
            const auto& src = host_buffer(a[2]);
            uint64_t hoff = num_at(3), len = num_at(4);
            if (hoff + len > src.size()) throw SimulationError("DMA_LOAD past end of host buffer " + a[2]);
            std::copy(src.begin() + long(hoff), src.begin() + long(hoff + len),
                      buffers_[buf_at(0)].begin() + long(num_at(1)));
            break;
        }
        case Opcode::DMA_STORE: {
            auto& dst = host_[a[0]];
            uint64_t hoff = num_at(1), len = num_at(4);
            if (dst.size() < hoff + len) dst.resize(hoff + len, 0);
            auto& src = buffers_[buf_at(2)];
            std::copy(src.begin() + long(num_at(3)), src.begin() + long(num_at(3) + len),
                      dst.begin() + long(hoff));
            break;
        }
        case Opcode::SAMPLE: {
            auto& dst = buffers_[buf_at(0)];
            uint64_t off = num_at(1), len = num_at(2);
            const std::string& dist = a[3];
            if (dist == "tern") {
                auto v = rng::Sampler(seed_, a[4]).ternary_vector(len);
                for (uint64_t i = 0; i < len; ++i) dst[off + i] = uint64_t(int64_t(v[i]));
            } else if (dist == "gauss") {
                auto v = rng::Sampler(seed_, a[4]).gaussian_vector(len);
                for (uint64_t i = 0; i < len; ++i) dst[off + i] = uint64_t(int64_t(v[i]));
            } else if (dist.rfind("unif", 0) == 0) {
                const auto& spec = modulus(dist.substr(4));
                rng::Sampler s(seed_, a[4]);
                for (uint64_t i = 0; i < len; ++i) dst[off + i] = s.uniform_below(spec.q);
            } else {  // rc
                if (!cfg_.rubato) throw SimulationError("rc sample before SET_RUBATO");
                auto rcs = rubato::derive_round_constants(cfg_.nonce, cfg_.counter, *cfg_.rubato);
                size_t round = num_at(4);
                if (round >= rcs.rc.size()) throw SimulationError("rc round out of range");
                if (len != cfg_.rubato->n) throw SimulationError("rc sample length != n");
                for (uint64_t i = 0; i < len; ++i) dst[off + i] = rcs.rc[round][i];
            }
            break;
        }
        case Opcode::NTT:
        case Opcode::INTT: {
            size_t basis = parse_u64(a[3], ins.line);
            uint64_t off = num_at(1), len = num_at(2);
            const auto& table = ntt_table(basis, len);
            auto& buf = buffers_[buf_at(0)];
            std::vector<uint64_t> work(buf.begin() + long(off), buf.begin() + long(off + len));
            for (auto& w : work) w %= table.spec.q;
            if (ins.op == Opcode::NTT)
                transforms::ntt_inplace(work, table);
            else
                transforms::intt_inplace(work, table);
            std::copy(work.begin(), work.end(), buf.begin() + long(off));
            break;
        }
        case Opcode::FFT:
        case Opcode::IFFT: {
            uint64_t off = num_at(1), len = num_at(2);
            auto& buf = buffers_[buf_at(0)];
            std::vector<transforms::FixedComplex> v(len);
            for (uint64_t i = 0; i < len; ++i) {
                uint64_t w = buf[off + i];
                v[i] = {int32_t(uint32_t(w)), int32_t(uint32_t(w >> 32))};
            }
            if (ins.op == Opcode::FFT)
                transforms::embed_fft_inplace(v, fft_table(len));
            else
                transforms::embed_ifft_inplace(v, fft_table(len));
            for (uint64_t i = 0; i < len; ++i)
                buf[off + i] = uint64_t(uint32_t(v[i].re)) | (uint64_t(uint32_t(v[i].im)) << 32);
            break;
        }
        case Opcode::PWMUL:
        case Opcode::PWADD:
        case Opcode::MAC: {
            const bool binary = a.size() == 8;
            if (binary && (a[0] == "feistel" || a[0] == "mixrow" || a[0] == "mixcol"))
                throw SimulationError("unary MAC mode with binary operands");
            if (binary) {
                const auto& spec = modulus(a[0]);
                uint64_t len = num_at(7);
                auto& dbuf = buffers_[buf_at(1)];
                const auto& abuf = buffers_[buf_at(3)];
                const auto& bbuf = buffers_[buf_at(5)];
                uint64_t doff = num_at(2), aoff = num_at(4), boff = num_at(6);
                for (uint64_t i = 0; i < len; ++i) {
                    uint64_t x = abuf[aoff + i] % spec.q;
                    uint64_t y = bbuf[boff + i] % spec.q;
                    uint64_t d = dbuf[doff + i] % spec.q;
                    if (ins.op == Opcode::PWMUL)
                        dbuf[doff + i] = field::mod_mul(x, y, spec);
                    else if (ins.op == Opcode::PWADD)
                        dbuf[doff + i] = field::mod_add(x, y, spec);
                    else
                        dbuf[doff + i] = field::mod_add(d, field::mod_mul(x, y, spec), spec);
                }
            } else {
                if (!cfg_.rubato) throw SimulationError("rubato MAC before SET_RUBATO");
                const auto& p = *cfg_.rubato;
                uint64_t len = num_at(5);
                auto& dbuf = buffers_[buf_at(1)];
                const auto& sbuf = buffers_[buf_at(3)];
                uint64_t doff = num_at(2), soff = num_at(4);
                rubato::State s(len);
                for (uint64_t i = 0; i < len; ++i) s[i] = sbuf[soff + i] % p.t.t();
                rubato::State r;
                if (a[0] == "feistel")
                    r = rubato::feistel(s, p);
                else if (a[0] == "mixrow")
                    r = rubato::mix_rows(s, p);
                else
                    r = rubato::mix_columns(s, p);
                for (uint64_t i = 0; i < len; ++i) dbuf[doff + i] = r[i];
            }
            break;
        }
        case Opcode::MOVE: {
            const std::string& mode = a[0];
            uint64_t len = num_at(5);
            auto& dbuf = buffers_[buf_at(1)];
            const auto& sbuf = buffers_[buf_at(3)];
            uint64_t doff = num_at(2), soff = num_at(4);
            if (mode == "raw") {
                std::copy(sbuf.begin() + long(soff), sbuf.begin() + long(soff + len),
                          dbuf.begin() + long(doff));
            } else if (mode.rfind("sgn", 0) == 0) {
                const auto& spec = modulus(mode.substr(3));
                for (uint64_t i = 0; i < len; ++i)
                    dbuf[doff + i] = field::mod_from_signed(int64_t(sbuf[soff + i]), spec);
            } else if (mode.rfind("enc", 0) == 0) {
                const auto& spec = modulus(mode.substr(3));
                for (uint64_t i = 0; i < len; ++i) {
                    uint64_t w = sbuf[soff + i];
                    int64_t re = int64_t(int32_t(uint32_t(w)));
                    int64_t im = int64_t(int32_t(uint32_t(w >> 32)));
                    dbuf[doff + i] = field::mod_from_signed(re << kScaleShift, spec);
                    dbuf[doff + len + i] = field::mod_from_signed(im << kScaleShift, spec);
                }
            } else {  // dec<b>: residues -> packed fixed complex
                const auto& spec = modulus(mode.substr(3));
                for (uint64_t i = 0; i < len; ++i) {
                    int64_t re = rhe_shift(field::mod_to_signed(sbuf[soff + i] % spec.q, spec),
                                           kScaleShift);
                    int64_t im = rhe_shift(field::mod_to_signed(sbuf[soff + len + i] % spec.q, spec),
                                           kScaleShift);
                    dbuf[doff + i] =
                        uint64_t(uint32_t(int32_t(re))) | (uint64_t(uint32_t(int32_t(im))) << 32);
                }
            }
            break;
        }
        case Opcode::SEND: {
            auto words = read_buffer(buf_at(0), num_at(1), num_at(2));
            auto bytes = netmodel::encapsulate(words, cfg_.pkt);
            output_packets_.insert(output_packets_.end(), bytes.begin(), bytes.end());
            break;
        }
        case Opcode::RECV: {
            auto words = netmodel::decapsulate(input_packets_, cfg_.pkt);
            uint64_t len = num_at(2);
            if (words.size() < len) throw SimulationError("RECV: not enough input packet data");
            std::copy(words.begin(), words.begin() + long(len),
                      buffers_[buf_at(0)].begin() + long(num_at(1)));
            break;
        }
        default:
            break;
    }
    (void)task;
}

bool Simulator::dispatch_step() {
    // Retire tasks finishing now.
    for (auto it = in_flight_.begin(); it != in_flight_.end();) {
        if (tasks_[*it].finish <= cycle_) {
            unit_free_[size_t(tasks_[*it].unit)] += 1;
            it = in_flight_.erase(it);
        } else {
            ++it;
        }
    }

    // Start every ready task: unit slot free, no conflict with in-flight work,
    // no conflict with an older not-yet-started task (conflicts stall the
    // younger side). Scanning oldest-first lets independent younger tasks pass.
    auto conflicts = [](const Task& a, const Task& b) {
        for (const auto& ra : a.reads)
            for (const auto& wb : b.writes)
                if (ra.overlaps(wb)) return true;
        for (const auto& wa : a.writes) {
            for (const auto& rb : b.reads)
                if (wa.overlaps(rb)) return true;
            for (const auto& wb : b.writes)
                if (wa.overlaps(wb)) return true;
        }
        return false;
    };

    bool started_any = false;
    std::vector<size_t> still_waiting;
    std::vector<size_t> older_blockers;
    for (size_t idx : waiting_) {
        Task& t = tasks_[idx];
        bool blocked = unit_free_[size_t(t.unit)] == 0;
        if (!blocked)
            for (size_t fl : in_flight_)
                if (conflicts(t, tasks_[fl])) {
                    blocked = true;
                    break;
                }
        if (!blocked)
            for (size_t ob : older_blockers)
                if (conflicts(t, tasks_[ob])) {
                    blocked = true;
                    break;
                }
        if (blocked) {
            still_waiting.push_back(idx);
            older_blockers.push_back(idx);
            continue;
        }
        t.start = cycle_;
        t.finish = cycle_ + t.duration;
        unit_free_[size_t(t.unit)] -= 1;
        in_flight_.push_back(idx);
        execute(t, pending_instructions_[idx]);
        started_any = true;
    }
    waiting_ = std::move(still_waiting);

    if (in_flight_.empty()) {
        if (!waiting_.empty() && !started_any)
            throw SimulationError("dispatch deadlock at cycle " + std::to_string(cycle_));
        return !waiting_.empty();
    }
    uint64_t next = UINT64_MAX;
    for (size_t fl : in_flight_) next = std::min(next, tasks_[fl].finish);
    cycle_ = next;
    return true;
}

CycleReport Simulator::run() {
    if (ran_) throw StateError("simulator already ran; use a fresh instance");
    ran_ = true;
    while (dispatch_step()) {
    }
    CycleReport report;
    report.tasks = tasks_;
    for (const auto& t : tasks_) {
        report.total_cycles = std::max(report.total_cycles, t.finish);
        auto& stats = report.units[t.unit];
        stats.busy_cycles += t.duration;
        stats.tasks += 1;
        if (t.unit == Unit::UCU) report.compute_cycles = std::max(report.compute_cycles, t.finish);
    }
    return report;
}

// --- built-in workflows ---

std::string ckks_m2ct_program(const ckks::Context& ctx) {
    std::ostringstream p;
    p << "# message-to-ciphertext, N=8192, three bases, keys resident in RAM0/RAM1\n";
    for (size_t b = 0; b < ctx.basis_count(); ++b)
        p << "SET_MOD " << b << ' ' << ctx.prime(b).q << '\n';
    p << "SET_PKT 16 1024\n";
    p << "DMA_LOAD RAM3 0 msg 0 4096\n";
    p << "IFFT RAM3 0 4096\n";
    p << "SAMPLE RAM3 8192 8192 tern v\n";
    p << "SAMPLE RAM3 16384 8192 gauss e0\n";
    p << "SAMPLE RAM3 24576 8192 gauss e1\n";
    for (size_t b = 0; b < ctx.basis_count(); ++b) {
        uint64_t base = b * 32768;
        p << "MOVE enc" << b << " RAM4 " << base << " RAM3 0 4096\n";
        p << "MOVE sgn" << b << " RAM4 " << base + 8192 << " RAM3 8192 8192\n";
        p << "MOVE sgn" << b << " RAM4 " << base + 16384 << " RAM3 16384 8192\n";
        p << "MOVE sgn" << b << " RAM4 " << base + 24576 << " RAM3 24576 8192\n";
        p << "NTT RAM4 " << base << " 8192 " << b << '\n';
        p << "NTT RAM4 " << base + 8192 << " 8192 " << b << '\n';
        p << "NTT RAM4 " << base + 16384 << " 8192 " << b << '\n';
        p << "NTT RAM4 " << base + 24576 << " 8192 " << b << '\n';
        p << "MAC b" << b << " RAM4 " << base + 16384 << " RAM4 " << base + 8192 << " RAM0 "
          << b * 8192 << " 8192\n";
        p << "PWADD b" << b << " RAM4 " << base + 16384 << " RAM4 " << base + 16384 << " RAM4 "
          << base << " 8192\n";
        p << "MAC b" << b << " RAM4 " << base + 24576 << " RAM4 " << base + 8192 << " RAM1 "
          << b * 8192 << " 8192\n";
        p << "MOVE raw RAM0 " << b * 8192 << " RAM4 " << base + 16384 << " 8192\n";
        p << "MOVE raw RAM1 " << b * 8192 << " RAM4 " << base + 24576 << " 8192\n";
    }
    p << "# packetize ct0 || ct1 into the NIC staging buffer and send\n";
    for (size_t b = 0; b < ctx.basis_count(); ++b) {
        p << "MOVE raw NIC " << b * 8192 << " RAM0 " << b * 8192 << " 8192\n";
        p << "MOVE raw NIC " << 24576 + b * 8192 << " RAM1 " << b * 8192 << " 8192\n";
    }
    p << "SEND NIC 0 49152\n";
    return p.str();
}

std::string ckks_ct2m_program(const ckks::Context& ctx) {
    std::ostringstream p;
    p << "# ciphertext-to-message over basis 0; ct resident after receive\n";
    p << "SET_MOD 0 " << ctx.prime(0).q << '\n';
    p << "MAC b0 RAM0 0 RAM1 0 RAM0 8192 8192\n";
    p << "INTT RAM0 0 8192 0\n";
    p << "MOVE dec0 RAM3 0 RAM0 0 4096\n";
    p << "FFT RAM3 0 4096\n";
    p << "DMA_STORE msg_out 0 RAM3 0 4096\n";
    return p.str();
}

std::string rubato_program(const rubato::Params& params, const std::string& nonce_hex,
                           uint64_t counter) {
    std::ostringstream p;
    unsigned n = params.n;
    const char* name = params.preset == rubato::Preset::k128S
                           ? "128S"
                           : (params.preset == rubato::Preset::k128M ? "128M" : "128L");
    p << "SET_RUBATO " << name << ' ' << nonce_hex << ' ' << counter << '\n';
    p << "SET_PKT 16 " << params.l << '\n';
    p << "DMA_LOAD RAM0 0 key 0 " << n << '\n';
    p << "DMA_LOAD RAM3 0 ic 0 " << n << '\n';
    p << "SAMPLE RAM4 0 " << n << " rc 0\n";
    p << "MAC t RAM3 0 RAM0 0 RAM4 0 " << n << '\n';
    for (unsigned i = 1; i <= params.rounds; ++i) {
        p << "SAMPLE RAM4 " << i * n << ' ' << n << " rc " << i << '\n';
        p << "MAC feistel RAM3 0 RAM3 0 " << n << '\n';
        p << "MAC mixrow RAM3 0 RAM3 0 " << n << '\n';
        p << "MAC mixcol RAM3 0 RAM3 0 " << n << '\n';
        p << "MAC t RAM3 0 RAM0 0 RAM4 " << i * n << ' ' << n << '\n';
    }
    p << "MOVE raw NIC 0 RAM3 0 " << params.l << '\n';
    p << "SEND NIC 0 " << params.l << '\n';
    return p.str();
}

namespace {

std::vector<uint64_t> pack_message(const std::vector<std::complex<double>>& message) {
    if (message.size() > 4096) throw ParameterError("message exceeds 4096 slots");
    std::vector<uint64_t> words(4096, 0);
    for (size_t i = 0; i < message.size(); ++i) {
        auto f = transforms::FixedComplex::from_double(message[i]);
        words[i] = uint64_t(uint32_t(f.re)) | (uint64_t(uint32_t(f.im)) << 32);
    }
    return words;
}

}  // namespace

CkksWorkflowResult run_ckks_workflow(const ckks::Context& ctx, const ckks::KeyMaterial& keys,
                                     const std::vector<std::complex<double>>& message,
                                     const std::vector<uint8_t>& enc_seed, const Calibration& cal) {
    CkksWorkflowResult result;

    Simulator enc(cal, enc_seed);
    enc.set_host_buffer("msg", pack_message(message));
    for (size_t b = 0; b < ctx.basis_count(); ++b) {
        enc.preload_buffer(RAM0, b * 8192, keys.pk0[b].coeffs);
        enc.preload_buffer(RAM1, b * 8192, keys.pk1[b].coeffs);
    }
    enc.load_program_text(ckks_m2ct_program(ctx));
    result.m2ct = enc.run();

    result.ct.domain = transforms::Domain::ntt;
    for (size_t b = 0; b < ctx.basis_count(); ++b) {
        transforms::Polynomial c0{enc.read_buffer(RAM0, b * 8192, 8192), transforms::Domain::ntt, b};
        transforms::Polynomial c1{enc.read_buffer(RAM1, b * 8192, 8192), transforms::Domain::ntt, b};
        result.ct.ct0.push_back(std::move(c0));
        result.ct.ct1.push_back(std::move(c1));
    }

    Simulator dec(cal, enc_seed);
    dec.preload_buffer(RAM0, 0, result.ct.ct0[0].coeffs);
    dec.preload_buffer(RAM1, 0, result.ct.ct1[0].coeffs);
    dec.preload_buffer(RAM0, 8192, keys.sk[0].coeffs);
    dec.load_program_text(ckks_ct2m_program(ctx));
    result.ct2m = dec.run();

    auto words = dec.host_buffer("msg_out");
    result.decoded.resize(4096);
    for (size_t i = 0; i < 4096; ++i) {
        transforms::FixedComplex f{int32_t(uint32_t(words[i])), int32_t(uint32_t(words[i] >> 32))};
        result.decoded[i] = f.to_double();
    }
    return result;
}

RubatoScheduleResult run_rubato_schedule(rubato::Preset preset, const rubato::State& key,
                                         const std::vector<uint8_t>& nonce, uint64_t counter,
                                         const Calibration& cal) {
    auto params = rubato::Params::get(preset);
    if (key.size() != params.n) throw ContractError("key length mismatch");

    Simulator sim(cal, {0});
    sim.set_host_buffer("key", key);
    std::vector<uint64_t> ic(params.n);
    for (size_t i = 0; i < params.n; ++i) ic[i] = (i + 1) % params.t.t();
    sim.set_host_buffer("ic", ic);
    sim.load_program_text(rubato_program(params, rng::to_hex(nonce), counter));

    RubatoScheduleResult result;
    result.report = sim.run();
    auto words = netmodel::decapsulate(sim.output_packets(), netmodel::PacketFormat{16, params.l});
    result.keystream.assign(words.begin(), words.begin() + params.l);
    return result;
}

}  // namespace hhekit::accelsim
